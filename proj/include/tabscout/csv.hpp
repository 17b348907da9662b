#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace tabscout::csv {

using Record = std::vector<std::string>;

/// Incremental RFC 4180 reader over an in-memory buffer. A leading UTF-8 BOM
/// is skipped. Fields are returned verbatim (quotes removed, "" unescaped);
/// bare quotes inside unquoted fields are kept literally.
class Reader {
  public:
    explicit Reader(std::string_view data);

    /// Reads the next record into `out`. Returns false at end of input.
    /// Throws csv::ParseError on an unterminated quoted field.
    bool next(Record& out);

    /// Byte offset of the first unread character.
    std::size_t offset() const { return pos_; }

  private:
    std::string_view data_;
    std::size_t pos_ = 0;
};

class ParseError : public std::exception {
  public:
    explicit ParseError(std::size_t offset);
    const char* what() const noexcept override { return message_.c_str(); }
    std::size_t offset() const { return offset_; }

  private:
    std::size_t offset_;
    std::string message_;
};

std::vector<Record> parse(std::string_view data);

/// Quote a field when it contains a delimiter, quote or line break.
std::string escape_field(std::string_view field);

} // namespace tabscout::csv
