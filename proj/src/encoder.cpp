#include "tabscout/encoder.hpp"

#include <cmath>
#include <cstdint>

#include <json.hpp>

#include "tabscout/error.hpp"
#include "tabscout/http.hpp"
#include "tabscout/text.hpp"

namespace tabscout {

namespace {

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

/// " " + lowercase text with whitespace runs collapsed + " ".
std::string padded_form(std::string_view text) {
    std::string out = " ";
    bool last_space = true;
    for (char c : to_lower(trim(text))) {
        bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r';
        if (space) {
            if (!last_space) {
                out.push_back(' ');
            }
        } else {
            out.push_back(c);
        }
        last_space = space;
    }
    if (out.back() != ' ') {
        out.push_back(' ');
    }
    return out;
}

} // namespace

HashingEncoder::HashingEncoder(Eigen::Index dimension) : dimension_(dimension) {
    if (dimension <= 0) {
        throw std::invalid_argument("HashingEncoder: dimension must be positive");
    }
}

std::string HashingEncoder::id() const {
    return "hash-trigram-v1-d" + std::to_string(dimension_);
}

Eigen::VectorXd HashingEncoder::encode_one(const std::string& text) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dimension_);
    std::string padded = padded_form(text);
    if (padded.size() >= 3 && padded != "  ") {
        for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
            auto bucket = fnv1a(std::string_view(padded).substr(i, 3)) % static_cast<std::uint64_t>(dimension_);
            v[static_cast<Eigen::Index>(bucket)] += 1.0;
        }
    }
    double norm = v.norm();
    if (norm > 0.0) {
        v /= norm;
    }
    return v;
}

Eigen::MatrixXd HashingEncoder::encode(std::span<const std::string> texts) const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(texts.size()), dimension_);
    for (std::size_t i = 0; i < texts.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = encode_one(texts[i]).transpose();
    }
    return out;
}

RemoteEncoder::RemoteEncoder(RemoteEncoderOptions options) : options_(std::move(options)) {
    if (options_.url.empty() || options_.dimension <= 0 || options_.batch_size == 0) {
        throw ConfigError("remote encoder needs a url, a positive dimension and batch size");
    }
}

std::string RemoteEncoder::id() const {
    return "remote:" + options_.model_id + ":d" + std::to_string(options_.dimension);
}

Eigen::MatrixXd RemoteEncoder::encode(std::span<const std::string> texts) const {
    using nlohmann::json;
    Eigen::MatrixXd out(static_cast<Eigen::Index>(texts.size()), options_.dimension);
    std::vector<std::pair<std::string, std::string>> headers;
    if (!options_.api_key.empty()) {
        headers.emplace_back("Authorization", "Bearer " + options_.api_key);
    }
    for (std::size_t start = 0; start < texts.size(); start += options_.batch_size) {
        auto batch = texts.subspan(start, std::min(options_.batch_size, texts.size() - start));
        const std::string batch_desc = "batch [" + std::to_string(start) + ", " +
                                       std::to_string(start + batch.size()) + ")";
        json request{{"texts", json::array()}};
        for (const auto& text : batch) {
            request["texts"].push_back(text);
        }
        http::Response response;
        try {
            response = http::post_json(options_.url, request.dump(), headers, options_.timeout);
        } catch (const IoError& e) {
            throw EncoderFailure(batch_desc + ": " + e.what());
        }
        if (response.status != 200) {
            throw EncoderFailure(batch_desc + ": HTTP " + std::to_string(response.status));
        }
        json reply;
        try {
            reply = json::parse(response.body);
            const auto& vectors = reply.at("vectors");
            if (!vectors.is_array() || vectors.size() != batch.size()) {
                throw EncoderFailure(batch_desc + ": expected " + std::to_string(batch.size()) + " vectors");
            }
            for (std::size_t i = 0; i < batch.size(); ++i) {
                const auto& row = vectors[i];
                if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != options_.dimension) {
                    throw EncoderFailure(batch_desc + ": vector " + std::to_string(i) + " has wrong dimension");
                }
                for (Eigen::Index j = 0; j < options_.dimension; ++j) {
                    double x = row[static_cast<std::size_t>(j)].get<double>();
                    if (!std::isfinite(x)) {
                        throw EncoderFailure(batch_desc + ": non-finite component");
                    }
                    out(static_cast<Eigen::Index>(start + i), j) = x;
                }
            }
        } catch (const json::exception& e) {
            throw EncoderFailure(batch_desc + ": malformed reply: " + e.what());
        }
    }
    return out;
}

} // namespace tabscout
