#include "tabscout/bench.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "tabscout/error.hpp"
#include "tabscout/sql_lexer.hpp"
#include "tabscout/text.hpp"

namespace tabscout {

using nlohmann::json;

namespace {

std::string canonical_json_cell(const json& v) {
    if (v.is_null()) {
        return canonical_cell(Cell{std::monostate{}});
    }
    if (v.is_number_integer()) {
        return canonical_cell(Cell{v.get<std::int64_t>()});
    }
    if (v.is_number()) {
        return canonical_cell(Cell{v.get<double>()});
    }
    if (v.is_string()) {
        return canonical_cell(Cell{v.get<std::string>()});
    }
    if (v.is_boolean()) {
        return canonical_cell(Cell{static_cast<std::int64_t>(v.get<bool>() ? 1 : 0)});
    }
    return v.dump();
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::string data = read_file(path);
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < data.size()) {
        auto nl = data.find('\n', start);
        auto line = trim(std::string_view(data).substr(start, nl == std::string::npos ? std::string::npos : nl - start));
        if (!line.empty()) {
            lines.emplace_back(line);
        }
        if (nl == std::string::npos) {
            break;
        }
        start = nl + 1;
    }
    return lines;
}

std::set<TableId> id_set(const json& arr) {
    std::set<TableId> out;
    for (const auto& v : arr) {
        out.insert(v.get<std::string>());
    }
    return out;
}

} // namespace

std::string to_jsonl_line(const BenchRecord& record) {
    json cells = json::object();
    for (const auto& [table, rows] : record.truth_cells) {
        cells[table] = rows;
    }
    json j{{"qid", record.qid},
           {"question", record.question},
           {"truth_tables", record.truth_tables},
           {"truth_cells", cells}};
    if (record.truth_group) {
        j["truth_group"] = *record.truth_group;
    }
    return j.dump();
}

BenchRecord bench_record_from_json(const std::string& line) {
    try {
        auto j = json::parse(line);
        BenchRecord record;
        record.qid = j.at("qid").is_string() ? j.at("qid").get<std::string>() : j.at("qid").dump();
        record.question = j.value("question", "");
        record.truth_tables = id_set(j.at("truth_tables"));
        if (j.contains("truth_cells") && j["truth_cells"].is_object()) {
            for (const auto& [table, rows] : j["truth_cells"].items()) {
                auto& out = record.truth_cells[table];
                for (const auto& row : rows) {
                    CanonicalRow canon;
                    for (const auto& cell : row) {
                        canon.push_back(canonical_json_cell(cell));
                    }
                    out.push_back(std::move(canon));
                }
            }
        }
        if (j.contains("truth_group") && j["truth_group"].is_array()) {
            record.truth_group = id_set(j["truth_group"]);
        }
        return record;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed benchmark record: ") + e.what());
    }
}

std::vector<BenchRecord> read_bench_records(const std::filesystem::path& path) {
    std::vector<BenchRecord> records;
    for (const auto& line : read_lines(path)) {
        records.push_back(bench_record_from_json(line));
    }
    return records;
}

void write_bench_records(const std::filesystem::path& path, const std::vector<BenchRecord>& records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot write '" + path.string() + "'");
    }
    for (const auto& record : records) {
        out << to_jsonl_line(record) << '\n';
    }
}

QuestionMetrics prf(const std::string& qid, const std::multiset<std::string>& retrieved,
                    const std::multiset<std::string>& truth) {
    std::vector<std::string> common;
    std::set_intersection(retrieved.begin(), retrieved.end(), truth.begin(), truth.end(), std::back_inserter(common));
    QuestionMetrics m;
    m.qid = qid;
    auto inter = static_cast<double>(common.size());
    m.precision = retrieved.empty() ? 0.0 : inter / static_cast<double>(retrieved.size());
    m.recall = truth.empty() ? 0.0 : inter / static_cast<double>(truth.size());
    m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    return m;
}

namespace {

void finish_macro(EvalReport& report) {
    report.n_questions = report.per_question.size();
    if (report.per_question.empty()) {
        return;
    }
    for (const auto& m : report.per_question) {
        report.macro_precision += m.precision;
        report.macro_recall += m.recall;
        report.macro_f1 += m.f1;
    }
    auto n = static_cast<double>(report.per_question.size());
    report.macro_precision /= n;
    report.macro_recall /= n;
    report.macro_f1 /= n;
}

} // namespace

EvalReport macro_prf(const std::map<std::string, std::set<TableId>>& retrieved,
                     const std::map<std::string, std::set<TableId>>& truth) {
    for (const auto& [qid, tables] : truth) {
        if (retrieved.count(qid) == 0) {
            throw MissingQuestion("no prediction for question '" + qid + "'");
        }
    }
    for (const auto& [qid, tables] : retrieved) {
        if (truth.count(qid) == 0) {
            throw MissingQuestion("prediction for unknown question '" + qid + "'");
        }
    }
    EvalReport report;
    for (const auto& [qid, gold] : truth) {
        const auto& got = retrieved.at(qid);
        report.per_question.push_back(prf(qid, {got.begin(), got.end()}, {gold.begin(), gold.end()}));
    }
    finish_macro(report);
    return report;
}

double hit_at_k_group(const std::map<std::string, std::vector<std::vector<TableId>>>& ranked,
                      const std::map<std::string, std::set<TableId>>& truth, std::size_t k) {
    if (k == 0) {
        throw std::invalid_argument("hit_at_k_group: K must be >= 1");
    }
    if (truth.empty()) {
        return 0.0;
    }
    std::size_t hits = 0;
    for (const auto& [qid, gold] : truth) {
        auto it = ranked.find(qid);
        if (it == ranked.end()) {
            continue;
        }
        const auto& groups = it->second;
        for (std::size_t i = 0; i < groups.size() && i < k; ++i) {
            std::set<TableId> group(groups[i].begin(), groups[i].end());
            if (std::includes(group.begin(), group.end(), gold.begin(), gold.end())) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

namespace {

std::multiset<std::string> cell_keys(const CellAnswers& answers) {
    std::multiset<std::string> keys;
    for (const auto& [table, row] : answers) {
        keys.insert(json(std::make_pair(table, row)).dump());
    }
    return keys;
}

} // namespace

EvalReport cell_prf(const std::map<std::string, CellAnswers>& answers, const std::map<std::string, CellAnswers>& truth) {
    EvalReport report;
    static const CellAnswers kNone;
    for (const auto& [qid, gold] : truth) {
        auto it = answers.find(qid);
        report.per_question.push_back(prf(qid, cell_keys(it == answers.end() ? kNone : it->second), cell_keys(gold)));
    }
    finish_macro(report);
    return report;
}

CellAnswers truth_cells_of(const BenchRecord& record) {
    CellAnswers out;
    for (const auto& [table, rows] : record.truth_cells) {
        for (const auto& row : rows) {
            out.emplace_back(table, row);
        }
    }
    return out;
}

AnswerFile read_answers(const std::filesystem::path& path) {
    AnswerFile out;
    for (const auto& line : read_lines(path)) {
        try {
            auto j = json::parse(line);
            const auto& id = j.at("question_id");
            auto qid = id.is_string() ? id.get<std::string>() : id.dump();
            auto& answers = out.cells[qid];
            auto& tables = out.tables[qid];
            if (!j.contains("table") || j["table"].is_null() || j.contains("error")) {
                continue;
            }
            auto table = j["table"].get<std::string>();
            tables.insert(table);
            for (const auto& row : j.value("rows", json::array())) {
                CanonicalRow canon;
                for (const auto& cell : row) {
                    canon.push_back(canonical_json_cell(cell));
                }
                answers.emplace_back(table, std::move(canon));
            }
        } catch (const json::exception& e) {
            throw ConfigError(std::string("malformed answer record: ") + e.what());
        }
    }
    return out;
}

CanonicalRow canonical_row(const Row& row) {
    CanonicalRow out;
    out.reserve(row.size());
    for (const auto& cell : row) {
        out.push_back(canonical_cell(cell));
    }
    return out;
}

std::vector<IndependentSource> read_independent_sources(const std::filesystem::path& path) {
    std::vector<IndependentSource> out;
    for (const auto& line : read_lines(path)) {
        try {
            auto j = json::parse(line);
            IndependentSource src;
            src.qid = j.at("qid").is_string() ? j.at("qid").get<std::string>() : j.at("qid").dump();
            src.question = j.value("question", "");
            const auto& c = j.at("sql");
            auto clause = [&](const char* key) {
                if (!c.contains(key) || c[key].is_null()) {
                    return std::string();
                }
                return c[key].is_string() ? c[key].get<std::string>() : c[key].dump();
            };
            src.clauses = {clause("select"), clause("where"), clause("group_by"),
                           clause("having"), clause("order_by"), clause("limit")};
            out.push_back(std::move(src));
        } catch (const json::exception& e) {
            throw ConfigError(std::string("malformed source record: ") + e.what());
        }
    }
    return out;
}

std::string rewrite_equality_to_ilike(std::string_view predicate) {
    auto all = sql::tokenize(predicate);
    std::string out;
    out.reserve(predicate.size() + 8);
    for (std::size_t i = 0; i < all.size(); ++i) {
        const auto& t = all[i];
        if (t.kind == sql::TokenKind::op && (t.raw == "=" || t.raw == "==")) {
            std::size_t j = i + 1;
            while (j < all.size() && (all[j].kind == sql::TokenKind::whitespace || all[j].kind == sql::TokenKind::comment)) {
                ++j;
            }
            if (j < all.size() && all[j].kind == sql::TokenKind::string) {
                bool space_before = !out.empty() && out.back() == ' ';
                out.append(space_before ? "ILIKE" : " ILIKE");
                if (j == i + 1) {
                    out.push_back(' ');
                }
                continue;
            }
        }
        out.append(t.raw);
    }
    return out;
}

std::string assemble_sql(const SqlClauses& clauses, std::string_view table_id) {
    auto sel = trim(clauses.select);
    std::string out = "SELECT " + std::string(sel.empty() ? "*" : sel) + " FROM " + sql::quote_identifier(table_id);
    auto add = [&](std::string_view keyword, std::string_view body) {
        auto b = trim(body);
        if (!b.empty()) {
            out += " ";
            out += keyword;
            out += " ";
            out += b;
        }
    };
    add("WHERE", rewrite_equality_to_ilike(clauses.where));
    add("GROUP BY", clauses.group_by);
    add("HAVING", rewrite_equality_to_ilike(clauses.having));
    add("ORDER BY", clauses.order_by);
    add("LIMIT", clauses.limit);
    return out;
}

IndependentBenchmark build_independent_benchmark(const std::vector<IndependentSource>& sources, const Corpus& corpus,
                                                 SqlEngine& engine) {
    IndependentBenchmark out;
    for (const auto& src : sources) {
        BenchRecord record;
        record.qid = src.qid;
        record.question = src.question;
        std::size_t failures = 0;
        std::string last_error;
        for (const auto& table : corpus.tables()) {
            auto sql_text = assemble_sql(src.clauses, table.id);
            try {
                auto result = engine.execute(sql_text, table);
                if (result.rows.empty()) {
                    continue;
                }
                record.truth_tables.insert(table.id);
                auto& rows = record.truth_cells[table.id];
                for (const auto& row : result.rows) {
                    rows.push_back(canonical_row(row));
                }
            } catch (const EngineError& e) {
                ++failures;
                last_error = e.what();
            }
        }
        if (!record.truth_tables.empty()) {
            out.records.push_back(std::move(record));
        } else if (failures == corpus.size()) {
            out.dropped.push_back({src.qid, "query failed on every table (last error: " + last_error + ")"});
        } else {
            out.dropped.push_back({src.qid, "no table returns a non-empty result"});
        }
    }
    return out;
}

std::vector<DatabaseSchema> read_database_schemas(const std::filesystem::path& path) {
    std::vector<DatabaseSchema> out;
    try {
        auto doc = json::parse(read_file(path));
        for (const auto& db : doc) {
            DatabaseSchema schema;
            schema.db_id = db.at("db_id").get<std::string>();
            schema.tables = db.at("tables").get<std::vector<std::string>>();
            for (const auto& fk : db.value("foreign_keys", json::array())) {
                if (!fk.is_array() || fk.size() != 4) {
                    throw ConfigError("foreign key must be [table, column, ref_table, ref_column]");
                }
                schema.foreign_keys.push_back(
                    {fk[0].get<std::string>(), fk[1].get<std::string>(), fk[2].get<std::string>(), fk[3].get<std::string>()});
            }
            out.push_back(std::move(schema));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed database schema file: ") + e.what());
    }
    return out;
}

std::vector<JoinSource> read_join_sources(const std::filesystem::path& path) {
    std::vector<JoinSource> out;
    for (const auto& line : read_lines(path)) {
        try {
            auto j = json::parse(line);
            out.push_back({j.at("qid").is_string() ? j.at("qid").get<std::string>() : j.at("qid").dump(),
                           j.at("db_id").get<std::string>(), j.value("question", ""), j.at("sql").get<std::string>()});
        } catch (const json::exception& e) {
            throw ConfigError(std::string("malformed join question: ") + e.what());
        }
    }
    return out;
}

namespace {

std::string normalized_sql(std::string_view sql_text) {
    std::string out;
    for (const auto& t : sql::significant(sql::tokenize(sql_text))) {
        if (!out.empty()) {
            out.push_back(' ');
        }
        out.append(t.kind == sql::TokenKind::word ? to_lower(t.raw) : std::string(t.raw));
    }
    return out;
}

} // namespace

JoinBenchmark build_join_benchmark(const std::vector<DatabaseSchema>& databases,
                                   const std::vector<JoinSource>& questions) {
    JoinBenchmark out;
    std::vector<TableId> nodes;
    std::map<std::string, const DatabaseSchema*> by_db;
    for (const auto& db : databases) {
        by_db[db.db_id] = &db;
        for (const auto& table : db.tables) {
            nodes.push_back(db.db_id + "/" + table);
        }
    }
    out.graph = JoinGraph(nodes);
    auto resolve = [](const DatabaseSchema& db, std::string_view name) -> std::optional<TableId> {
        for (const auto& table : db.tables) {
            if (iequals(table, name)) {
                return db.db_id + "/" + table;
            }
        }
        return std::nullopt;
    };
    for (const auto& db : databases) {
        for (const auto& fk : db.foreign_keys) {
            auto a = resolve(db, fk.table);
            auto b = resolve(db, fk.ref_table);
            if (!a || !b) {
                out.graph.add_warning("database '" + db.db_id + "': foreign key names an unknown table");
                continue;
            }
            out.graph.add_edge({*a, *b, std::make_pair(fk.column, fk.ref_column)});
        }
    }

    std::set<std::pair<std::string, std::string>> seen_sql;
    for (const auto& q : questions) {
        auto db_it = by_db.find(q.db_id);
        if (db_it == by_db.end()) {
            out.dropped.push_back({q.qid, "unknown database '" + q.db_id + "'"});
            continue;
        }
        auto toks = sql::significant(sql::tokenize(q.sql));
        bool has_join = std::any_of(toks.begin(), toks.end(), [](const sql::Token& t) { return t.is_word("JOIN"); });
        if (!has_join) {
            out.dropped.push_back({q.qid, "SQL has no JOIN"});
            continue;
        }
        if (!seen_sql.insert({q.db_id, normalized_sql(q.sql)}).second) {
            out.dropped.push_back({q.qid, "duplicate SQL"});
            continue;
        }
        std::set<TableId> involved;
        std::string unknown;
        for (const auto& name : referenced_tables(q.sql)) {
            auto id = resolve(*db_it->second, name);
            if (!id) {
                unknown = name;
                break;
            }
            involved.insert(*id);
        }
        if (!unknown.empty() || involved.empty()) {
            out.dropped.push_back({q.qid, "unparseable SQL: cannot resolve table '" + unknown + "'"});
            continue;
        }
        std::size_t min_degree = SIZE_MAX;
        for (const auto& id : involved) {
            min_degree = std::min(min_degree, out.graph.degree(id));
        }
        if (min_degree < 2) {
            out.dropped.push_back({q.qid, "an involved table has join-graph degree < 2"});
            continue;
        }
        BenchRecord record;
        record.qid = q.qid;
        record.question = q.question;
        record.truth_tables = involved;
        record.truth_group = involved;
        out.records.push_back(std::move(record));
    }
    return out;
}

} // namespace tabscout
