#include "tabscout/header_index.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>

#include "tabscout/error.hpp"

namespace tabscout {

namespace {

constexpr char kMagic[4] = {'T', 'S', 'H', 'X'};

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
}

void put_f32(std::string& out, float f) {
    std::uint32_t bits = 0;
    std::memcpy(&bits, &f, sizeof bits);
    put_u32(out, bits);
}

class ByteReader {
  public:
    explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        }
        pos_ += 4;
        return v;
    }

    float f32() {
        std::uint32_t bits = u32();
        float f = 0;
        std::memcpy(&f, &bits, sizeof f);
        return f;
    }

    std::string str() {
        auto len = u32();
        need(len);
        std::string s(bytes_.substr(pos_, len));
        pos_ += len;
        return s;
    }

    std::string_view raw(std::size_t n) {
        need(n);
        auto s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    bool done() const { return pos_ == bytes_.size(); }

  private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) {
            throw IndexFormatError("header index truncated at byte " + std::to_string(pos_));
        }
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

/// Round through float32 so the in-memory matrix equals what is stored.
void round_to_float(HeaderIndex::Matrix& m) {
    m = m.cast<float>().cast<double>();
}

} // namespace

HeaderIndex::HeaderIndex(std::vector<std::string> names, Matrix vectors, std::string encoder_id)
    : names_(std::move(names)), vectors_(std::move(vectors)), encoder_id_(std::move(encoder_id)) {
    if (static_cast<Eigen::Index>(names_.size()) != vectors_.rows()) {
        throw std::invalid_argument("HeaderIndex: name count does not match vector rows");
    }
    std::set<std::string_view> seen;
    for (const auto& name : names_) {
        if (!seen.insert(name).second) {
            throw std::invalid_argument("HeaderIndex: duplicate name '" + name + "'");
        }
    }
    for (Eigen::Index i = 0; i < vectors_.rows(); ++i) {
        if (std::abs(vectors_.row(i).norm() - 1.0) > 1e-6) {
            throw std::invalid_argument("HeaderIndex: row for '" + names_[static_cast<std::size_t>(i)] +
                                        "' is not unit norm");
        }
    }
}

HeaderIndex HeaderIndex::build(const Corpus& corpus, const Encoder& encoder, std::size_t batch_size) {
    if (corpus.size() == 0) {
        throw EmptyCorpus("cannot index an empty corpus");
    }
    batch_size = std::max<std::size_t>(batch_size, 1);
    std::vector<std::string> names;
    names.reserve(corpus.header_table_counts().size());
    for (const auto& [name, count] : corpus.header_table_counts()) {
        names.push_back(name);
    }
    Matrix vectors(static_cast<Eigen::Index>(names.size()), encoder.dimension());
    for (std::size_t start = 0; start < names.size(); start += batch_size) {
        std::size_t n = std::min(batch_size, names.size() - start);
        std::span<const std::string> batch(names.data() + start, n);
        Eigen::MatrixXd encoded = encoder.encode(batch);
        if (encoded.rows() != static_cast<Eigen::Index>(n) || encoded.cols() != encoder.dimension()) {
            throw EncoderFailure("encoder '" + encoder.id() + "' returned a " + std::to_string(encoded.rows()) +
                                 "x" + std::to_string(encoded.cols()) + " block for batch starting at '" +
                                 batch.front() + "'");
        }
        if (!encoded.allFinite()) {
            throw EncoderFailure("encoder '" + encoder.id() + "' produced non-finite values for batch starting at '" +
                                 batch.front() + "'");
        }
        vectors.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(n)) = encoded;
    }
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
        if (vectors.row(i).norm() == 0.0) {
            throw EncoderFailure("encoder '" + encoder.id() + "' produced a zero vector for '" +
                                 names[static_cast<std::size_t>(i)] + "'");
        }
    }
    normalize_rows(vectors);
    round_to_float(vectors);
    return HeaderIndex(std::move(names), std::move(vectors), encoder.id());
}

std::optional<std::size_t> HeaderIndex::find(std::string_view name) const {
    auto it = std::lower_bound(names_.begin(), names_.end(), name);
    if (it != names_.end() && *it == name) {
        return static_cast<std::size_t>(it - names_.begin());
    }
    // Names are sorted when built from a corpus; fall back for hand-built indexes.
    auto lin = std::find(names_.begin(), names_.end(), name);
    if (lin == names_.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(lin - names_.begin());
}

Eigen::VectorXd HeaderIndex::similarities(const Eigen::Ref<const Eigen::VectorXd>& query) const {
    if (query.size() != dimension()) {
        throw DimensionMismatch("query has dimension " + std::to_string(query.size()) + ", index has " +
                                std::to_string(dimension()));
    }
    return cosine_scores(vectors_, query);
}

std::vector<NameScore> HeaderIndex::top_k_names(const Eigen::Ref<const Eigen::VectorXd>& query,
                                                std::size_t k) const {
    if (k == 0) {
        throw std::invalid_argument("top_k_names: k must be >= 1");
    }
    Eigen::VectorXd scores = similarities(query);
    std::vector<std::size_t> order(names_.size());
    std::iota(order.begin(), order.end(), 0);
    auto better = [&](std::size_t a, std::size_t b) {
        double sa = scores[static_cast<Eigen::Index>(a)];
        double sb = scores[static_cast<Eigen::Index>(b)];
        if (sa != sb) {
            return sa > sb;
        }
        return names_[a] < names_[b];
    };
    std::size_t take = std::min(k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(), better);
    std::vector<NameScore> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        out.push_back({names_[order[i]], scores[static_cast<Eigen::Index>(order[i])]});
    }
    return out;
}

// Layout (little endian):
//   "TSHX" u32 version u32 d u32 count str encoder_id
//   count x str name, then count*d float32 row-major.
// str = u32 byte length + bytes.
std::string HeaderIndex::serialize() const {
    std::string out(kMagic, sizeof kMagic);
    put_u32(out, kFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(dimension()));
    put_u32(out, static_cast<std::uint32_t>(names_.size()));
    put_u32(out, static_cast<std::uint32_t>(encoder_id_.size()));
    out.append(encoder_id_);
    for (const auto& name : names_) {
        put_u32(out, static_cast<std::uint32_t>(name.size()));
        out.append(name);
    }
    out.reserve(out.size() + static_cast<std::size_t>(vectors_.size()) * 4);
    for (Eigen::Index i = 0; i < vectors_.rows(); ++i) {
        for (Eigen::Index j = 0; j < vectors_.cols(); ++j) {
            put_f32(out, static_cast<float>(vectors_(i, j)));
        }
    }
    return out;
}

HeaderIndex HeaderIndex::deserialize(std::string_view bytes) {
    ByteReader in(bytes);
    if (in.raw(4) != std::string_view(kMagic, 4)) {
        throw IndexFormatError("not a header index file (bad magic)");
    }
    auto version = in.u32();
    if (version != kFormatVersion) {
        throw IndexFormatError("unsupported header index version " + std::to_string(version));
    }
    auto dim = in.u32();
    auto count = in.u32();
    std::string encoder_id = in.str();
    std::vector<std::string> names;
    names.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        names.push_back(in.str());
    }
    Matrix vectors(count, dim);
    for (std::uint32_t i = 0; i < count; ++i) {
        for (std::uint32_t j = 0; j < dim; ++j) {
            vectors(i, j) = static_cast<double>(in.f32());
        }
    }
    if (!in.done()) {
        throw IndexFormatError("trailing bytes after header index payload");
    }
    try {
        return HeaderIndex(std::move(names), std::move(vectors), std::move(encoder_id));
    } catch (const std::invalid_argument& e) {
        throw IndexFormatError(e.what());
    }
}

void HeaderIndex::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write '" + path.string() + "'");
    }
    auto bytes = serialize();
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("write failed for '" + path.string() + "'");
    }
}

HeaderIndex HeaderIndex::load(const std::filesystem::path& path) {
    return deserialize(read_file(path));
}

} // namespace tabscout
