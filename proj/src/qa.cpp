#include "tabscout/qa.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "tabscout/error.hpp"
#include "tabscout/prompts.hpp"
#include "tabscout/sql_lexer.hpp"
#include "tabscout/text.hpp"

namespace tabscout {

std::vector<Cluster> cluster_by_signature(std::span<const ScoredTable> scored) {
    std::vector<Cluster> clusters;
    std::map<std::vector<std::string>, std::size_t> by_signature;
    for (const auto& table : scored) {
        std::set<std::string> names;
        for (const auto& hit : table.hits) {
            names.insert(hit.header);
        }
        if (names.empty()) {
            clusters.push_back(Cluster{{table.table_id}, std::nullopt});
            continue;
        }
        std::vector<std::string> signature(names.begin(), names.end());
        auto [it, inserted] = by_signature.emplace(signature, clusters.size());
        if (inserted) {
            clusters.push_back(Cluster{{table.table_id}, std::move(signature)});
        } else {
            clusters[it->second].tables.push_back(table.table_id);
        }
    }
    for (auto& cluster : clusters) {
        std::sort(cluster.tables.begin(), cluster.tables.end());
        cluster.tables.erase(std::unique(cluster.tables.begin(), cluster.tables.end()), cluster.tables.end());
    }
    return clusters;
}

std::string build_judge_prompt(std::string_view question, std::string_view table_name,
                               const std::vector<std::string>& columns) {
    auto cols = join(columns, ", ");
    return prompts::render(prompts::kJudgeAnswerableV1, {{"{question}", question},
                                                         {"{table name}", table_name},
                                                         {"{relevant columns to the question}", cols}});
}

std::string build_sql_prompt(std::string_view question, std::string_view table_name,
                             const std::vector<std::string>& columns) {
    auto cols = join(columns, ", ");
    return prompts::render(prompts::kGenerateSqlV1,
                           {{"{question}", question}, {"{table name}", table_name}, {"{columns}", cols}});
}

Judgement parse_judgement(std::string_view response) {
    std::size_t i = 0;
    while (i < response.size() && std::isalpha(static_cast<unsigned char>(response[i])) == 0) {
        ++i;
    }
    std::size_t start = i;
    while (i < response.size() && std::isalpha(static_cast<unsigned char>(response[i])) != 0) {
        ++i;
    }
    return iequals(response.substr(start, i - start), "yes") ? Judgement::yes : Judgement::no;
}

namespace {

std::string strip_fences(std::string_view text) {
    std::string_view t = trim(text);
    if (t.substr(0, 3) == "```") {
        auto first_nl = t.find('\n');
        t = first_nl == std::string_view::npos ? std::string_view{} : t.substr(first_nl + 1);
        auto close = t.rfind("```");
        if (close != std::string_view::npos) {
            t = t.substr(0, close);
        }
    }
    return std::string(trim(t));
}

} // namespace

std::string validate_sql(std::string_view sql_text, std::string_view table_name,
                         const std::vector<std::string>& columns) {
    std::string cleaned = strip_fences(sql_text);
    while (!cleaned.empty() && (cleaned.back() == ';' || std::isspace(static_cast<unsigned char>(cleaned.back())))) {
        cleaned.pop_back();
    }
    if (cleaned.empty()) {
        throw InvalidSql("empty statement");
    }
    auto toks = sql::significant(sql::tokenize(cleaned));
    if (toks.empty() || !(toks.front().is_word("SELECT") || toks.front().is_word("WITH"))) {
        throw InvalidSql("statement must start with SELECT or WITH");
    }
    for (const auto& t : toks) {
        if (t.kind == sql::TokenKind::punct && t.raw == ";") {
            throw InvalidSql("multiple statements");
        }
    }
    auto tables = referenced_tables(cleaned);
    if (tables.empty()) {
        throw InvalidSql("no FROM clause");
    }
    for (const auto& t : tables) {
        if (!iequals(t, table_name)) {
            throw InvalidSql("references unknown table '" + t + "'");
        }
    }

    std::set<std::string> allowed;
    allowed.insert(to_lower(table_name));
    for (const auto& c : columns) {
        allowed.insert(to_lower(trim(c)));
    }
    // Aliases: identifier after AS, and CTE names before AS (.
    for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
        if (toks[i].is_word("AS") && toks[i + 1].is_identifier()) {
            allowed.insert(to_lower(toks[i + 1].value));
        }
        if (toks[i].is_identifier() && toks[i + 1].is_word("AS") && i + 2 < toks.size() &&
            toks[i + 2].kind == sql::TokenKind::punct && toks[i + 2].raw == "(") {
            allowed.insert(to_lower(toks[i].value));
        }
    }
    // Bare alias after a table reference: FROM "t" x
    for (std::size_t i = 1; i + 1 < toks.size(); ++i) {
        if (toks[i].is_identifier() && iequals(toks[i].value, table_name) && toks[i + 1].kind == sql::TokenKind::word &&
            !sql::is_keyword(toks[i + 1].raw)) {
            allowed.insert(to_lower(toks[i + 1].value));
        }
    }
    for (std::size_t i = 0; i < toks.size(); ++i) {
        const auto& t = toks[i];
        if (!t.is_identifier()) {
            continue;
        }
        if (t.kind == sql::TokenKind::word) {
            if (sql::is_keyword(t.raw)) {
                continue;
            }
            bool call = i + 1 < toks.size() && toks[i + 1].kind == sql::TokenKind::punct && toks[i + 1].raw == "(";
            if (call && sql::is_function_name(t.raw)) {
                continue;
            }
        }
        if (allowed.count(to_lower(t.value)) == 0) {
            throw InvalidSql("unknown identifier '" + t.value + "'");
        }
    }
    return cleaned;
}

Judgement SqlGenerator::judge_answerable(std::string_view question, std::string_view table_name,
                                         const std::vector<std::string>& columns) {
    if (columns.empty()) {
        return Judgement::no;
    }
    ++stats_.judge_calls;
    try {
        return parse_judgement(model_.complete(build_judge_prompt(question, table_name, columns)));
    } catch (const Error& e) {
        ++stats_.llm_failures;
        log_.push_back("judge failed on '" + std::string(table_name) + "': " + e.what());
        return Judgement::no;
    }
}

std::optional<std::string> SqlGenerator::generate_sql(std::string_view question, std::string_view table_name,
                                                      const std::vector<std::string>& columns) {
    ++stats_.sql_calls;
    std::string response;
    try {
        response = model_.complete(build_sql_prompt(question, table_name, columns));
    } catch (const Error& e) {
        ++stats_.llm_failures;
        log_.push_back("sql generation failed on '" + std::string(table_name) + "': " + e.what());
        return std::nullopt;
    }
    auto text = trim(response);
    if (text.empty() || iequals(text, "none") || iequals(text, "none.")) {
        return std::nullopt;
    }
    try {
        return validate_sql(text, table_name, columns);
    } catch (const InvalidSql& e) {
        ++stats_.invalid_sql;
        log_.push_back("invalid SQL for '" + std::string(table_name) + "': " + e.what());
        return std::nullopt;
    }
}

std::optional<std::string> SqlGenerator::text_to_sql(std::string_view question, std::string_view table_name,
                                                     const std::vector<std::string>& columns) {
    if (columns.empty()) {
        return std::nullopt;
    }
    if (!options_.combined_judge_and_generate &&
        judge_answerable(question, table_name, columns) == Judgement::no) {
        return std::nullopt;
    }
    return generate_sql(question, table_name, columns);
}

QueryResult execute_sql(const std::string& sql_text, const TableMeta& table, SqlEngine& engine) {
    return engine.execute(sql_text, table);
}

std::vector<std::string> prompt_columns(const TableMeta& table) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& header : table.headers) {
        auto name = std::string(trim(header));
        if (!name.empty() && seen.insert(to_lower(name)).second) {
            out.push_back(std::move(name));
        }
    }
    return out;
}

AnswerSet answer_question(const ParsedQuestion& question, std::span<const Cluster> clusters, const Corpus& corpus,
                          SqlEngine& engine, SqlGenerator& generator) {
    AnswerSet answers;
    auto& stats = generator.stats();
    auto run = [&](const std::string& sql_text, const TableMeta& table) -> std::optional<QueryResult> {
        ++stats.executions;
        try {
            return execute_sql(sql_text, table, engine);
        } catch (const Error& e) {
            answers.failures.push_back({table.id, sql_text, e.what()});
            return std::nullopt;
        }
    };

    for (const auto& cluster : clusters) {
        ++stats.clusters;
        if (cluster.tables.empty()) {
            continue;
        }
        if (cluster.shared_cols) {
            const auto rep_index = corpus.index_of(cluster.tables.front());
            if (!rep_index) {
                throw std::out_of_range("cluster references unknown table '" + cluster.tables.front() + "'");
            }
            const TableMeta& rep = corpus.tables()[*rep_index];
            std::vector<std::string> cols;
            for (const auto& name : *cluster.shared_cols) {
                auto verbatim = corpus.verbatim_header(*rep_index, name);
                cols.push_back(std::string(trim(verbatim.value_or(name))));
            }
            std::optional<std::string> sql_text;
            std::size_t before = stats.sql_calls;
            sql_text = generator.text_to_sql(question.question, rep.id, cols);
            stats.cluster_sql_calls += stats.sql_calls - before;
            if (sql_text) {
                for (const auto& id : cluster.tables) {
                    const TableMeta& table = corpus.at(id);
                    std::string table_sql = id == rep.id ? *sql_text : replace_table_name(*sql_text, rep.id, id);
                    if (auto result = run(table_sql, table)) {
                        answers.entries.push_back({id, table_sql, std::move(result->columns), std::move(result->rows)});
                    }
                }
                continue;
            }
            ++stats.cluster_refusals;
        }
        for (const auto& id : cluster.tables) {
            const TableMeta& table = corpus.at(id);
            ++stats.fallback_attempts;
            auto sql_text = generator.text_to_sql(question.question, id, prompt_columns(table));
            if (!sql_text) {
                continue;
            }
            auto result = run(*sql_text, table);
            if (result && !result->rows.empty()) {
                answers.entries.push_back({id, *sql_text, std::move(result->columns), std::move(result->rows)});
            }
        }
    }
    return answers;
}

namespace {

/// Text between `label` line and the next blank line, trimmed.
std::string prompt_field(std::string_view prompt, std::string_view label) {
    auto pos = prompt.find(label);
    if (pos == std::string_view::npos) {
        return {};
    }
    pos = prompt.find('\n', pos);
    if (pos == std::string_view::npos) {
        return {};
    }
    auto end = prompt.find('\n', pos + 1);
    return std::string(trim(prompt.substr(pos + 1, end == std::string_view::npos ? std::string_view::npos : end - pos - 1)));
}

std::string question_of(std::string_view prompt) {
    auto pos = prompt.find("Question:\n");
    if (pos == std::string_view::npos) {
        return {};
    }
    pos += 10;
    auto end = prompt.find("\n\nTable:\n", pos);
    return std::string(prompt.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
}

std::vector<std::string> split_columns(const std::string& text) {
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto comma = text.find(", ", start);
        auto piece = trim(std::string_view(text).substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (!piece.empty()) {
            cols.emplace_back(piece);
        }
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 2;
    }
    return cols;
}

bool shares_word(const std::string& column, const std::set<std::string>& words) {
    for (const auto& token : word_tokens(column)) {
        if (words.count(token) != 0) {
            return true;
        }
    }
    return false;
}

} // namespace

std::string OfflineSqlModel::complete(const std::string& prompt) {
    const bool judge = prompt.rfind(prompts::kJudgeAnswerableV1.substr(0, 40), 0) == 0;
    const std::string question = question_of(prompt);
    const std::string table = prompt_field(prompt, "Table Name:");
    const auto columns = split_columns(prompt_field(prompt, "Columns:"));

    auto spans = quoted_spans(question);
    std::string bare = question;
    for (const auto& span : spans) {
        auto pos = bare.find(span);
        if (pos != std::string::npos) {
            bare.replace(pos, span.size(), " ");
        }
    }
    auto tokens = word_tokens(bare);
    std::set<std::string> words(tokens.begin(), tokens.end());

    std::vector<std::string> selected;
    for (const auto& c : columns) {
        if (shares_word(c, words)) {
            selected.push_back(c);
        }
    }
    if (judge) {
        return selected.empty() ? "no" : "yes";
    }
    if (columns.empty()) {
        return "NONE";
    }
    if (selected.empty()) {
        selected = columns;
    }
    std::string sql_text = "SELECT ";
    for (std::size_t i = 0; i < selected.size(); ++i) {
        sql_text += (i ? ", " : "") + sql::quote_identifier(selected[i]);
    }
    sql_text += " FROM " + sql::quote_identifier(table);
    for (std::size_t v = 0; v < spans.size(); ++v) {
        sql_text += v == 0 ? " WHERE (" : " AND (";
        for (std::size_t i = 0; i < columns.size(); ++i) {
            sql_text += (i ? " OR " : "") + sql::quote_identifier(columns[i]) + " ILIKE " + sql::quote_string(spans[v]);
        }
        sql_text += ")";
    }
    return sql_text;
}

} // namespace tabscout
