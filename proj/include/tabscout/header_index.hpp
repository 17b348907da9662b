#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "tabscout/corpus.hpp"
#include "tabscout/encoder.hpp"

namespace tabscout {

/// Cosines are snapped to this grid before any comparison so that equal
/// similarities compare equal independent of summation order.
inline constexpr double kSimilarityGrid = 1e9;

inline double snap_similarity(double cosine) {
    double clamped = std::clamp(cosine, -1.0, 1.0);
    return std::round(clamped * kSimilarityGrid) / kSimilarityGrid;
}

/// Scales every row to unit L2 norm. Returns the number of zero rows, which
/// are left untouched.
template <typename Derived>
Eigen::Index normalize_rows(Eigen::MatrixBase<Derived>& m) {
    Eigen::Index zero_rows = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        auto norm = m.row(i).norm();
        if (norm > 0) {
            m.row(i) /= norm;
        } else {
            ++zero_rows;
        }
    }
    return zero_rows;
}

/// Snapped cosine similarity of `query` against every row of `rows`
/// (rows are assumed unit norm; the query is normalized here).
template <typename RowsDerived, typename QueryDerived>
Eigen::VectorXd cosine_scores(const Eigen::MatrixBase<RowsDerived>& rows,
                              const Eigen::MatrixBase<QueryDerived>& query) {
    Eigen::VectorXd q = query.template cast<double>();
    double norm = q.norm();
    if (norm > 0) {
        q /= norm;
    }
    Eigen::VectorXd scores = rows.template cast<double>() * q;
    return scores.unaryExpr([](double x) { return snap_similarity(x); });
}

struct NameScore {
    std::string name;
    double score;

    bool operator==(const NameScore&) const = default;
};

/// Embeddings of the distinct normalized header names of a corpus.
class HeaderIndex {
  public:
    using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    static constexpr std::uint32_t kFormatVersion = 1;

    HeaderIndex() = default;

    /// Validates: names distinct, one unit-norm row per name.
    HeaderIndex(std::vector<std::string> names, Matrix vectors, std::string encoder_id);

    static HeaderIndex build(const Corpus& corpus, const Encoder& encoder, std::size_t batch_size = 256);

    const std::vector<std::string>& names() const { return names_; }
    const Matrix& vectors() const { return vectors_; }
    Eigen::Index dimension() const { return vectors_.cols(); }
    std::size_t size() const { return names_.size(); }
    const std::string& encoder_id() const { return encoder_id_; }
    std::optional<std::size_t> find(std::string_view name) const;

    /// Snapped cosine of the query against every stored name.
    Eigen::VectorXd similarities(const Eigen::Ref<const Eigen::VectorXd>& query) const;

    /// min(k, size()) names by cosine descending, ties by name ascending.
    std::vector<NameScore> top_k_names(const Eigen::Ref<const Eigen::VectorXd>& query, std::size_t k) const;

    std::string serialize() const;
    static HeaderIndex deserialize(std::string_view bytes);
    void save(const std::filesystem::path& path) const;
    static HeaderIndex load(const std::filesystem::path& path);

  private:
    std::vector<std::string> names_;
    Matrix vectors_;
    std::string encoder_id_;
};

} // namespace tabscout
