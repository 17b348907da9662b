#include "tabscout/csv.hpp"

namespace tabscout::csv {

ParseError::ParseError(std::size_t offset)
    : offset_(offset), message_("unterminated quoted field at byte " + std::to_string(offset)) {}

Reader::Reader(std::string_view data) : data_(data) {
    if (data_.substr(0, 3) == "\xEF\xBB\xBF") {
        pos_ = 3;
    }
}

bool Reader::next(Record& out) {
    out.clear();
    if (pos_ >= data_.size()) {
        return false;
    }
    std::string field;
    bool in_quotes = false;
    std::size_t quote_start = 0;
    while (pos_ < data_.size()) {
        char c = data_[pos_];
        if (in_quotes) {
            if (c == '"') {
                if (pos_ + 1 < data_.size() && data_[pos_ + 1] == '"') {
                    field.push_back('"');
                    pos_ += 2;
                    continue;
                }
                in_quotes = false;
                ++pos_;
                continue;
            }
            field.push_back(c);
            ++pos_;
            continue;
        }
        if (c == '"' && field.empty()) {
            in_quotes = true;
            quote_start = pos_;
            ++pos_;
            continue;
        }
        if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
            ++pos_;
            continue;
        }
        if (c == '\r' || c == '\n') {
            ++pos_;
            if (c == '\r' && pos_ < data_.size() && data_[pos_] == '\n') {
                ++pos_;
            }
            out.push_back(std::move(field));
            return true;
        }
        field.push_back(c);
        ++pos_;
    }
    if (in_quotes) {
        throw ParseError(quote_start);
    }
    out.push_back(std::move(field));
    return true;
}

std::vector<Record> parse(std::string_view data) {
    std::vector<Record> records;
    Reader reader(data);
    Record rec;
    while (reader.next(rec)) {
        records.push_back(rec);
    }
    return records;
}

std::string escape_field(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
        return std::string(field);
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out.push_back('"');
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

} // namespace tabscout::csv
