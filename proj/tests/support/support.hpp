#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "tabscout/csv.hpp"

namespace testing {

inline std::filesystem::path fixture_dir() { return TABSCOUT_FIXTURE_DIR; }

class TempDir {
  public:
    TempDir() {
        static std::mt19937_64 rng{std::random_device{}()};
        path_ = std::filesystem::temp_directory_path() / ("tabscout-test-" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

  private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

inline std::string csv_text(const std::vector<std::string>& headers, const std::vector<std::vector<std::string>>& rows) {
    auto line = [](const std::vector<std::string>& fields) {
        std::string out;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            out += (i ? "," : "") + tabscout::csv::escape_field(fields[i]);
        }
        return out + "\n";
    };
    std::string text = line(headers);
    for (const auto& row : rows) {
        text += line(row);
    }
    return text;
}

/// Writes `<root>/<id>.csv`.
inline void write_csv(const std::filesystem::path& root, const std::string& id, const std::vector<std::string>& headers,
                      const std::vector<std::vector<std::string>>& rows = {}) {
    write_file(root / (id + ".csv"), csv_text(headers, rows));
}

} // namespace testing
