#pragma once

#include <chrono>
#include <span>
#include <string>

#include <Eigen/Core>

namespace tabscout {

/// Text encoder contract: deterministic, finite outputs, one row per input.
class Encoder {
  public:
    virtual ~Encoder() = default;

    virtual std::string id() const = 0;
    virtual Eigen::Index dimension() const = 0;

    /// Returns a texts.size() x dimension() matrix. Throws EncoderFailure.
    virtual Eigen::MatrixXd encode(std::span<const std::string> texts) const = 0;
};

/// Offline encoder: case-folded character trigrams (with a space pad on
/// each side) hashed by FNV-1a into `dimension` buckets, L2-normalized.
/// Strings without any trigram encode to the zero vector.
class HashingEncoder final : public Encoder {
  public:
    explicit HashingEncoder(Eigen::Index dimension = 256);

    std::string id() const override;
    Eigen::Index dimension() const override { return dimension_; }
    Eigen::MatrixXd encode(std::span<const std::string> texts) const override;

    Eigen::VectorXd encode_one(const std::string& text) const;

  private:
    Eigen::Index dimension_;
};

struct RemoteEncoderOptions {
    std::string url; ///< full endpoint, e.g. http://host:8080/embed
    Eigen::Index dimension = 0;
    std::size_t batch_size = 64;
    std::chrono::seconds timeout{60};
    std::string api_key;
    std::string model_id = "remote";
};

/// HTTP encoder: POST {"texts": [...]} -> {"vectors": [[...], ...]}.
class RemoteEncoder final : public Encoder {
  public:
    explicit RemoteEncoder(RemoteEncoderOptions options);

    std::string id() const override;
    Eigen::Index dimension() const override { return options_.dimension; }
    Eigen::MatrixXd encode(std::span<const std::string> texts) const override;

  private:
    RemoteEncoderOptions options_;
};

} // namespace tabscout
