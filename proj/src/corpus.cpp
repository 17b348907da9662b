#include "tabscout/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "tabscout/csv.hpp"
#include "tabscout/error.hpp"
#include "tabscout/text.hpp"

namespace tabscout {

namespace fs = std::filesystem;

Corpus Corpus::from_tables(std::vector<TableMeta> tables, std::vector<std::string> warnings) {
    if (tables.empty()) {
        throw EmptyCorpus("corpus contains no parseable tables");
    }
    std::sort(tables.begin(), tables.end(),
              [](const TableMeta& a, const TableMeta& b) { return a.id < b.id; });
    Corpus corpus;
    corpus.tables_ = std::move(tables);
    corpus.warnings_ = std::move(warnings);
    corpus.normalized_.reserve(corpus.tables_.size());
    for (std::size_t i = 0; i < corpus.tables_.size(); ++i) {
        const TableMeta& table = corpus.tables_[i];
        if (table.headers.empty()) {
            throw std::invalid_argument("table '" + table.id + "' has no headers");
        }
        if (!corpus.by_id_.emplace(table.id, i).second) {
            throw std::invalid_argument("duplicate table id '" + table.id + "'");
        }
        std::set<std::string> names;
        for (const auto& header : table.headers) {
            auto name = normalize_header(header);
            if (!name.empty()) {
                names.insert(std::move(name));
            }
        }
        for (const auto& name : names) {
            ++corpus.header_counts_[name];
            corpus.postings_[name].push_back(i);
        }
        corpus.normalized_.emplace_back(names.begin(), names.end());
    }
    return corpus;
}

const TableMeta* Corpus::find(std::string_view id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &tables_[it->second];
}

const TableMeta& Corpus::at(std::string_view id) const {
    const TableMeta* table = find(id);
    if (table == nullptr) {
        throw std::out_of_range("unknown table '" + std::string(id) + "'");
    }
    return *table;
}

std::optional<std::size_t> Corpus::index_of(std::string_view id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::size_t Corpus::header_table_count(std::string_view header) const {
    auto it = header_counts_.find(normalize_header(header));
    return it == header_counts_.end() ? 0 : it->second;
}

const std::vector<std::size_t>& Corpus::tables_with_header(const std::string& normalized) const {
    static const std::vector<std::size_t> kEmpty;
    auto it = postings_.find(normalized);
    return it == postings_.end() ? kEmpty : it->second;
}

std::optional<std::string> Corpus::verbatim_header(std::size_t table_index,
                                                   const std::string& normalized) const {
    for (const auto& header : tables_[table_index].headers) {
        if (normalize_header(header) == normalized) {
            return header;
        }
    }
    return std::nullopt;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) {
        throw IoError("read failed for '" + path.string() + "'");
    }
    return std::move(buffer).str();
}

namespace {

bool has_csv_extension(const fs::path& path) {
    return iequals(path.extension().string(), ".csv");
}

TableId table_id_for(const fs::path& root, const fs::path& file) {
    fs::path rel = fs::relative(file, root);
    rel.replace_extension();
    return rel.generic_string();
}

/// Offset of the first byte after the header record.
std::size_t body_offset(std::string_view data) {
    csv::Reader reader(data);
    csv::Record header;
    reader.next(header);
    return reader.offset();
}

} // namespace

Corpus load_corpus(const fs::path& root) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        throw IoError("corpus root '" + root.string() + "' is not a readable directory");
    }
    std::vector<fs::path> files;
    for (auto it = fs::recursive_directory_iterator(root, fs::directory_options::skip_permission_denied, ec);
         !ec && it != fs::recursive_directory_iterator(); it.increment(ec)) {
        if (it->is_regular_file() && has_csv_extension(it->path())) {
            files.push_back(it->path());
        }
    }
    if (ec) {
        throw IoError("walking '" + root.string() + "': " + ec.message());
    }
    std::sort(files.begin(), files.end());

    std::vector<TableMeta> tables;
    std::vector<std::string> warnings;
    for (const auto& file : files) {
        std::string data;
        try {
            data = read_file(file);
        } catch (const IoError& e) {
            warnings.push_back(std::string("skipped: ") + e.what());
            continue;
        }
        csv::Record header;
        try {
            csv::Reader reader(data);
            if (!reader.next(header)) {
                warnings.push_back("skipped '" + file.string() + "': empty file");
                continue;
            }
        } catch (const csv::ParseError& e) {
            warnings.push_back("skipped '" + file.string() + "': " + e.what());
            continue;
        }
        bool all_blank = std::all_of(header.begin(), header.end(),
                                     [](const std::string& h) { return trim(h).empty(); });
        if (all_blank) {
            warnings.push_back("skipped '" + file.string() + "': blank header record");
            continue;
        }
        TableMeta meta;
        meta.id = table_id_for(root, file);
        meta.path = file;
        meta.headers.reserve(header.size());
        for (auto& h : header) {
            meta.headers.push_back(sanitize_utf8(h));
        }
        tables.push_back(std::move(meta));
    }
    if (tables.empty()) {
        throw EmptyCorpus("no parseable CSV files under '" + root.string() + "'");
    }
    return Corpus::from_tables(std::move(tables), std::move(warnings));
}

namespace {

bool body_contains_substring(std::string_view body, const std::string& needle, bool case_sensitive) {
    if (case_sensitive) {
        return body.find(needle) != std::string_view::npos;
    }
    return to_lower(body).find(needle) != std::string::npos;
}

bool body_contains_cell(std::string_view body, std::string_view needle, bool case_sensitive) {
    csv::Reader reader(body);
    csv::Record record;
    while (reader.next(record)) {
        for (const auto& cell : record) {
            auto value = trim(cell);
            if (case_sensitive ? value == needle : iequals(value, needle)) {
                return true;
            }
        }
    }
    return false;
}

} // namespace

ScanResult scan_for_value(const Corpus& corpus, std::string_view value, const ScanOptions& options) {
    auto needle_view = trim(value);
    if (needle_view.empty()) {
        throw std::invalid_argument("scan_for_value: value is empty after trimming");
    }
    const std::string needle =
        options.case_sensitive ? std::string(needle_view) : to_lower(needle_view);

    ScanResult result;
    for (const auto& table : corpus.tables()) {
        std::string data;
        try {
            data = read_file(table.path);
        } catch (const IoError& e) {
            result.unreadable.push_back(e.what());
            continue;
        }
        bool hit = false;
        try {
            std::string_view body = std::string_view(data).substr(body_offset(data));
            hit = options.mode == ValueMatchMode::substring
                      ? body_contains_substring(body, needle, options.case_sensitive)
                      : body_contains_cell(body, needle_view, options.case_sensitive);
        } catch (const csv::ParseError& e) {
            result.unreadable.push_back("'" + table.path.string() + "': " + e.what());
            continue;
        }
        if (hit) {
            result.tables.push_back(table.id);
        }
    }
    return result;
}

std::size_t count_rows(const TableMeta& table) {
    std::string data = read_file(table.path);
    csv::Reader reader(data);
    csv::Record record;
    std::size_t rows = 0;
    bool first = true;
    while (reader.next(record)) {
        if (first) {
            first = false;
            continue;
        }
        if (record.size() == 1 && record[0].empty()) {
            continue;
        }
        ++rows;
    }
    return rows;
}

ValueMatchMode parse_value_match_mode(std::string_view text) {
    if (text == "substring") {
        return ValueMatchMode::substring;
    }
    if (text == "cell") {
        return ValueMatchMode::cell;
    }
    throw ConfigError("value_match_mode must be 'substring' or 'cell', got '" + std::string(text) + "'");
}

std::string_view to_string(ValueMatchMode mode) {
    return mode == ValueMatchMode::substring ? "substring" : "cell";
}

} // namespace tabscout
