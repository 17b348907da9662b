#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tabscout {

using TableId = std::string;

/// One CSV table: identity, location and the verbatim header row.
struct TableMeta {
    TableId id; ///< relative path without extension, '/' separated
    std::filesystem::path path;
    std::vector<std::string> headers;
    std::optional<std::size_t> row_count;
};

/// Immutable collection of tables plus the table-level header statistics
/// needed for column idf. Tables are ordered by id.
class Corpus {
  public:
    Corpus() = default;

    /// Builds the statistics over an explicit table list. Throws EmptyCorpus
    /// for an empty list and std::invalid_argument on duplicate ids or empty
    /// header lists.
    static Corpus from_tables(std::vector<TableMeta> tables, std::vector<std::string> warnings = {});

    const std::vector<TableMeta>& tables() const { return tables_; }
    std::size_t size() const { return tables_.size(); }

    const TableMeta* find(std::string_view id) const;
    const TableMeta& at(std::string_view id) const;
    std::optional<std::size_t> index_of(std::string_view id) const;

    /// Number of distinct tables whose normalized headers contain `header`
    /// (normalized here before lookup). Zero when unknown.
    std::size_t header_table_count(std::string_view header) const;
    const std::map<std::string, std::size_t>& header_table_counts() const { return header_counts_; }

    /// Indices (into tables()) of the tables holding a normalized header name.
    const std::vector<std::size_t>& tables_with_header(const std::string& normalized) const;

    /// Distinct normalized header names of one table, sorted.
    const std::vector<std::string>& normalized_headers(std::size_t table_index) const {
        return normalized_[table_index];
    }

    /// First verbatim header in the table whose normalized form is `normalized`.
    std::optional<std::string> verbatim_header(std::size_t table_index, const std::string& normalized) const;

    /// Files skipped while loading, with reasons.
    const std::vector<std::string>& warnings() const { return warnings_; }

  private:
    std::vector<TableMeta> tables_;
    std::map<TableId, std::size_t, std::less<>> by_id_;
    std::vector<std::vector<std::string>> normalized_;
    std::map<std::string, std::size_t> header_counts_;
    std::map<std::string, std::vector<std::size_t>> postings_;
    std::vector<std::string> warnings_;
};

/// Recursively loads every `.csv` under `root`; headers come from the first
/// record. Unparseable files are skipped and listed in Corpus::warnings().
Corpus load_corpus(const std::filesystem::path& root);

enum class ValueMatchMode { substring, cell };

struct ScanOptions {
    ValueMatchMode mode = ValueMatchMode::substring;
    bool case_sensitive = false;
};

struct ScanResult {
    std::vector<TableId> tables; ///< sorted ids
    std::vector<std::string> unreadable;
};

/// grep-style scan of every table body (header record excluded) for a
/// literal. Reads the files on each call; nothing is indexed.
ScanResult scan_for_value(const Corpus& corpus, std::string_view value, const ScanOptions& options = {});

/// Counts body records of one table file.
std::size_t count_rows(const TableMeta& table);

std::string read_file(const std::filesystem::path& path);

ValueMatchMode parse_value_match_mode(std::string_view text);
std::string_view to_string(ValueMatchMode mode);

} // namespace tabscout
