#include "tabscout/parser.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <set>

#include "tabscout/error.hpp"
#include "tabscout/prompts.hpp"
#include "tabscout/sql_lexer.hpp"
#include "tabscout/text.hpp"

namespace tabscout {

std::string build_parse_prompt(std::string_view question) {
    if (trim(question).empty()) {
        throw std::invalid_argument("build_parse_prompt: empty question");
    }
    return prompts::render(prompts::kParseQuestionV1, {{"{question}", question}});
}

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        auto line = text.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        lines.push_back(line);
        start = nl + 1;
    }
    return lines;
}

} // namespace

ParserOutput parse_llm_output(std::string_view raw) {
    auto lines = split_lines(raw);
    if (trim(lines[0]).empty()) {
        throw UnparseableOutput("parser output has a blank first line");
    }
    ParserOutput out;
    std::string_view header = trim(lines[0]);
    static constexpr std::string_view kSep = " || ";
    std::size_t pos = 0;
    while (true) {
        auto next = header.find(kSep, pos);
        auto piece = trim(header.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
        if (!piece.empty()) {
            out.column_mentions.emplace_back(piece);
        }
        if (next == std::string_view::npos) {
            break;
        }
        pos = next + kSep.size();
    }
    if (out.column_mentions.empty()) {
        throw UnparseableOutput("parser output line 1 holds no column mentions");
    }
    if (lines.size() > 1) {
        out.sql_sketch = std::string(trim(lines[1]));
    }
    std::size_t extra = 0;
    for (std::size_t i = 2; i < lines.size(); ++i) {
        if (!trim(lines[i]).empty()) {
            ++extra;
        }
    }
    if (extra > 0) {
        out.warnings.push_back("ignored " + std::to_string(extra) + " extra line(s) in parser output");
    }
    return out;
}

namespace {

bool is_clause_start(const sql::Token& t) {
    return t.is_word("WHERE") || t.is_word("GROUP") || t.is_word("ORDER") || t.is_word("HAVING") ||
           t.is_word("LIMIT") || t.is_word("UNION") || t.is_word("EXCEPT") || t.is_word("INTERSECT") ||
           (t.kind == sql::TokenKind::punct && t.raw == ";");
}

bool is_comparison(const sql::Token& t) {
    if (t.kind == sql::TokenKind::op) {
        return t.raw == "=" || t.raw == "==" || t.raw == "<" || t.raw == ">" || t.raw == "<=" || t.raw == ">=" ||
               t.raw == "!=" || t.raw == "<>";
    }
    return t.is_word("LIKE") || t.is_word("ILIKE");
}

/// Cleans a quoted literal: trims, strips LIKE wildcards at the ends and
/// keeps the longest fragment free of quote characters.
std::string clean_literal(std::string_view value) {
    std::string_view v = trim(value);
    while (!v.empty() && v.front() == '%') {
        v.remove_prefix(1);
    }
    while (!v.empty() && v.back() == '%') {
        v.remove_suffix(1);
    }
    std::string_view best;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= v.size(); ++i) {
        if (i == v.size() || v[i] == '\'' || v[i] == '"') {
            auto frag = trim(v.substr(start, i - start));
            if (frag.size() > best.size()) {
                best = frag;
            }
            start = i + 1;
        }
    }
    return std::string(best);
}

} // namespace

std::vector<std::string> extract_values_from_sql(std::string_view sql_sketch) {
    auto tokens = sql::significant(sql::tokenize(sql_sketch));

    // Drop FROM ... up to the next clause keyword.
    std::vector<sql::Token> kept;
    bool in_from = false;
    int depth = 0;
    for (auto& t : tokens) {
        if (t.kind == sql::TokenKind::punct && t.raw == "(") {
            ++depth;
        } else if (t.kind == sql::TokenKind::punct && t.raw == ")") {
            depth = std::max(0, depth - 1);
        }
        if (!in_from && t.is_word("FROM")) {
            in_from = true;
            continue;
        }
        if (in_from && (is_clause_start(t) || (t.kind == sql::TokenKind::punct && t.raw == ")" && depth == 0))) {
            in_from = false;
        }
        if (!in_from) {
            kept.push_back(std::move(t));
        }
    }

    std::set<std::string> values;
    auto add = [&](std::string_view raw) {
        auto cleaned = clean_literal(raw);
        if (!cleaned.empty()) {
            values.insert(std::move(cleaned));
        }
    };
    bool between_pending = false; // saw BETWEEN <x>, waiting for AND <y>
    for (std::size_t i = 0; i < kept.size(); ++i) {
        const auto& t = kept[i];
        const sql::Token* prev = i > 0 ? &kept[i - 1] : nullptr;
        bool after_comparison = prev != nullptr && (is_comparison(*prev) || prev->is_word("BETWEEN"));
        bool between_and = prev != nullptr && prev->is_word("AND") && between_pending;

        if (t.is_word("BETWEEN")) {
            between_pending = false;
            continue;
        }
        if (t.kind == sql::TokenKind::string) {
            add(t.value);
        } else if (t.kind == sql::TokenKind::quoted_ident && (after_comparison || between_and)) {
            add(t.value);
        } else if (t.kind == sql::TokenKind::number && (after_comparison || between_and)) {
            add(t.raw);
        } else if (t.kind == sql::TokenKind::op && (t.raw == "-" || t.raw == "+") &&
                   (after_comparison || between_and) && i + 1 < kept.size() &&
                   kept[i + 1].kind == sql::TokenKind::number) {
            std::string signed_number = (t.raw == "-" ? "-" : "") + std::string(kept[i + 1].raw);
            values.insert(signed_number);
            if (prev->is_word("BETWEEN")) {
                between_pending = true;
            } else if (between_and) {
                between_pending = false;
            }
            ++i;
            continue;
        }
        if (prev != nullptr && prev->is_word("BETWEEN")) {
            between_pending = true;
        } else if (between_and) {
            between_pending = false;
        }
    }
    return {values.begin(), values.end()};
}

ParsedQuestion make_parsed_question(std::string question, std::string_view raw_output) {
    auto out = parse_llm_output(raw_output);
    ParsedQuestion parsed;
    parsed.question = std::move(question);
    parsed.column_mentions = std::move(out.column_mentions);
    parsed.sql_sketch = std::move(out.sql_sketch);
    parsed.value_mentions = extract_values_from_sql(parsed.sql_sketch);
    return parsed;
}

std::vector<std::vector<std::size_t>> schedule_batches(std::span<const std::string> questions,
                                                       std::size_t max_batch, double var_bound) {
    if (max_batch == 0) {
        throw std::invalid_argument("schedule_batches: max_batch must be >= 1");
    }
    if (!(var_bound > 0.0 && var_bound <= 1.0)) {
        throw std::invalid_argument("schedule_batches: var_bound must be in (0, 1]");
    }
    std::vector<std::size_t> order(questions.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::size_t> tokens(questions.size());
    for (std::size_t i = 0; i < questions.size(); ++i) {
        tokens[i] = estimate_tokens(questions[i]);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return tokens[a] < tokens[b]; });

    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t idx : order) {
        if (!batches.empty()) {
            auto& batch = batches.back();
            double lo = static_cast<double>(tokens[batch.front()]);
            double hi = static_cast<double>(tokens[idx]);
            double spread = hi > 0 ? (hi - lo) / hi : 0.0;
            if (batch.size() < max_batch && spread <= var_bound) {
                batch.push_back(idx);
                continue;
            }
        }
        batches.push_back({idx});
    }
    return batches;
}

std::vector<RawParse> LlmQuestionParser::parse(std::span<const std::string> batch) {
    std::vector<RawParse> out;
    out.reserve(batch.size());
    for (const auto& question : batch) {
        try {
            out.push_back({model_.complete(build_parse_prompt(question)), {}});
        } catch (const Error& e) {
            out.push_back({std::nullopt, e.what()});
        }
    }
    return out;
}

std::vector<std::string> quoted_spans(std::string_view text) {
    std::vector<std::string> spans;
    auto boundary_before = [&](std::size_t i) {
        return i == 0 || std::isspace(static_cast<unsigned char>(text[i - 1])) != 0 || text[i - 1] == '(' ||
               text[i - 1] == '[' || text[i - 1] == ',';
    };
    auto boundary_after = [&](std::size_t i) {
        return i + 1 >= text.size() || std::isalnum(static_cast<unsigned char>(text[i + 1])) == 0;
    };
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c == '"' || (c == '\'' && boundary_before(i))) {
            std::size_t close = i + 1;
            while (close < text.size()) {
                if (text[close] == c && (c == '"' || boundary_after(close))) {
                    break;
                }
                ++close;
            }
            if (close < text.size()) {
                auto span = trim(text.substr(i + 1, close - i - 1));
                if (!span.empty()) {
                    spans.emplace_back(span);
                }
                i = close + 1;
                continue;
            }
        }
        ++i;
    }
    return spans;
}

OfflineQuestionParser::OfflineQuestionParser(std::vector<std::string> known_headers) {
    std::set<std::string> seen;
    for (auto& header : known_headers) {
        auto name = normalize_header(header);
        auto tokens = word_tokens(name);
        if (tokens.empty() || !seen.insert(name).second) {
            continue;
        }
        known_.push_back({std::move(name), std::move(tokens)});
    }
    std::sort(known_.begin(), known_.end(), [](const Known& a, const Known& b) {
        if (a.tokens.size() != b.tokens.size()) {
            return a.tokens.size() > b.tokens.size();
        }
        return a.name < b.name;
    });
}

namespace {

bool is_stopword(const std::string& w) {
    static const std::set<std::string> kStop = {
        "a",    "an",   "the",  "of",    "in",   "on",   "for",   "to",   "and",  "or",    "is",   "are",
        "was",  "were", "what", "which", "who",  "whom", "when",  "where", "how",  "many",  "much", "list",
        "show", "give", "find", "with",  "by",   "from", "that",  "this", "all",  "each",  "do",   "does",
        "did",  "me",   "their", "its",  "at",   "as",   "be",    "there", "have", "has",  "tell",
    };
    return kStop.count(w) != 0;
}

std::string strip_quoted(std::string_view text, const std::vector<std::string>& spans) {
    std::string out(text);
    for (const auto& span : spans) {
        auto pos = out.find(span);
        if (pos != std::string::npos) {
            out.replace(pos, span.size(), " ");
        }
    }
    return out;
}

} // namespace

std::string OfflineQuestionParser::render(std::string_view question) const {
    auto values = quoted_spans(question);
    std::string bare = strip_quoted(question, values);
    auto words = word_tokens(bare);

    std::vector<bool> used(words.size(), false);
    std::map<std::size_t, std::string> found; // position -> mention
    for (const auto& known : known_) {
        const auto n = known.tokens.size();
        for (std::size_t pos = 0; pos + n <= words.size(); ++pos) {
            bool free = std::none_of(used.begin() + static_cast<std::ptrdiff_t>(pos),
                                     used.begin() + static_cast<std::ptrdiff_t>(pos + n), [](bool u) { return u; });
            if (free && std::equal(known.tokens.begin(), known.tokens.end(), words.begin() + static_cast<std::ptrdiff_t>(pos))) {
                std::fill(used.begin() + static_cast<std::ptrdiff_t>(pos),
                          used.begin() + static_cast<std::ptrdiff_t>(pos + n), true);
                found.emplace(pos, known.name);
            }
        }
    }
    std::vector<std::string> mentions;
    for (auto& [pos, name] : found) {
        mentions.push_back(name);
    }
    if (mentions.empty()) {
        // Capitalized words past the first one, then the first content word.
        std::vector<std::string> raw_words;
        std::string current;
        for (char c : bare) {
            if (std::isalnum(static_cast<unsigned char>(c)) != 0) {
                current.push_back(c);
            } else if (!current.empty()) {
                raw_words.push_back(std::move(current));
                current.clear();
            }
        }
        if (!current.empty()) {
            raw_words.push_back(std::move(current));
        }
        for (std::size_t i = 1; i < raw_words.size(); ++i) {
            if (std::isupper(static_cast<unsigned char>(raw_words[i][0])) != 0) {
                mentions.push_back(to_lower(raw_words[i]));
            }
        }
        if (mentions.empty()) {
            for (const auto& w : words) {
                if (!is_stopword(w)) {
                    mentions.push_back(w);
                    break;
                }
            }
        }
        if (mentions.empty()) {
            mentions.push_back(words.empty() ? std::string("value") : words.front());
        }
    }

    std::string sketch = "SELECT " + join(mentions, ", ");
    for (std::size_t i = 0; i < values.size(); ++i) {
        sketch += (i == 0 ? " WHERE " : " AND ") + mentions.front() + " = " + sql::quote_string(values[i]);
    }
    return join(mentions, " || ") + "\n" + sketch;
}

std::vector<RawParse> OfflineQuestionParser::parse(std::span<const std::string> batch) {
    std::vector<RawParse> out;
    out.reserve(batch.size());
    for (const auto& question : batch) {
        out.push_back({render(question), {}});
    }
    return out;
}

std::vector<ParseOutcome> parse_questions(QuestionParser& parser, std::span<const std::string> questions,
                                          std::size_t max_batch, double var_bound) {
    std::vector<ParseOutcome> outcomes(questions.size());
    for (const auto& batch : schedule_batches(questions, max_batch, var_bound)) {
        std::vector<std::string> texts;
        texts.reserve(batch.size());
        for (auto idx : batch) {
            texts.push_back(questions[idx]);
        }
        std::vector<RawParse> raw;
        try {
            raw = parser.parse(texts);
        } catch (const Error& e) {
            raw.assign(batch.size(), RawParse{std::nullopt, e.what()});
        }
        if (raw.size() != batch.size()) {
            raw.assign(batch.size(), RawParse{std::nullopt, "parser returned a batch of the wrong size"});
        }
        for (std::size_t j = 0; j < batch.size(); ++j) {
            auto& outcome = outcomes[batch[j]];
            if (!raw[j].output) {
                outcome.error = "UnparseableOutput: " + raw[j].error;
                continue;
            }
            try {
                outcome.parsed = make_parsed_question(questions[batch[j]], *raw[j].output);
            } catch (const UnparseableOutput& e) {
                outcome.error = std::string("UnparseableOutput: ") + e.what();
            }
        }
    }
    return outcomes;
}

} // namespace tabscout
