#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tabscout/chat_model.hpp"

namespace tabscout {

/// Column mentions E, value mentions V and the SQL sketch for one question.
struct ParsedQuestion {
    std::string question;
    std::vector<std::string> column_mentions; ///< ordered, duplicates kept
    std::vector<std::string> value_mentions;  ///< sorted, distinct
    std::string sql_sketch;                   ///< single line, no FROM expected
};

std::string build_parse_prompt(std::string_view question);

struct ParserOutput {
    std::vector<std::string> column_mentions;
    std::string sql_sketch;
    std::vector<std::string> warnings;
};

/// Line 1 split on " || " into mentions, line 2 is the sketch, further lines
/// are ignored with a warning. Throws UnparseableOutput if line 1 is blank.
ParserOutput parse_llm_output(std::string_view raw);

/// Conservative literal extraction from an SQL sketch: single-quoted strings,
/// double-quoted strings on the right of a comparison, and numbers on the
/// right of =, <, >, <=, >=, !=, <>, LIKE, ILIKE and BETWEEN .. AND ..
/// A FROM clause, if present, is ignored. Result is sorted and distinct.
std::vector<std::string> extract_values_from_sql(std::string_view sql_sketch);

/// Builds the full ParsedQuestion from a raw two-line parser output.
ParsedQuestion make_parsed_question(std::string question, std::string_view raw_output);

/// Groups question indices into batches of near-equal estimated token count:
/// within a batch (max - min) / max <= var_bound and size <= max_batch.
std::vector<std::vector<std::size_t>> schedule_batches(std::span<const std::string> questions,
                                                       std::size_t max_batch, double var_bound = 0.05);

/// Parser backend contract: one raw output (or an error) per input, same order.
struct RawParse {
    std::optional<std::string> output;
    std::string error;
};

class QuestionParser {
  public:
    virtual ~QuestionParser() = default;
    virtual std::string id() const = 0;
    virtual std::vector<RawParse> parse(std::span<const std::string> batch) = 0;
};

/// LLM-backed parser: builds the parse prompt for every question and sends it
/// through the chat model (which owns retries). Failures stay per question.
class LlmQuestionParser final : public QuestionParser {
  public:
    explicit LlmQuestionParser(ChatModel& model) : model_(model) {}

    std::string id() const override { return "llm:" + model_.id(); }
    std::vector<RawParse> parse(std::span<const std::string> batch) override;

  private:
    ChatModel& model_;
};

/// Deterministic parser for offline runs and tests. Column mentions are the
/// known header names found as word n-grams in the question (longest first,
/// non-overlapping, question order); values are quoted spans.
class OfflineQuestionParser final : public QuestionParser {
  public:
    explicit OfflineQuestionParser(std::vector<std::string> known_headers);

    std::string id() const override { return "offline-v1"; }
    std::vector<RawParse> parse(std::span<const std::string> batch) override;

    /// The two-line output for one question.
    std::string render(std::string_view question) const;

  private:
    struct Known {
        std::string name;
        std::vector<std::string> tokens;
    };
    std::vector<Known> known_;
};

struct ParseOutcome {
    std::optional<ParsedQuestion> parsed;
    std::string error;
};

/// Schedules, parses batch by batch and reassociates results by position.
std::vector<ParseOutcome> parse_questions(QuestionParser& parser, std::span<const std::string> questions,
                                          std::size_t max_batch = 32, double var_bound = 0.05);

/// Quoted spans of a question (double quotes, or single quotes at word
/// boundaries so apostrophes are left alone).
std::vector<std::string> quoted_spans(std::string_view text);

} // namespace tabscout
