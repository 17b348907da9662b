#include "cli.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tabscout/bench.hpp"
#include "tabscout/corpus.hpp"
#include "tabscout/error.hpp"
#include "tabscout/header_index.hpp"
#include "tabscout/join_graph.hpp"
#include "tabscout/join_ranking.hpp"
#include "tabscout/parser.hpp"
#include "tabscout/qa.hpp"
#include "tabscout/retrieval.hpp"
#include "tabscout/sql_engine.hpp"
#include "tabscout/text.hpp"

namespace tabscout::cli {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Flags that mirror EngineConfig keys.
constexpr const char* kConfigKeys[] = {
    "corpus_root", "index_path",      "join_graph",      "k",           "eta",
    "tau",         "value_match_mode", "max_group_size", "enumeration_cap", "parser_batch",
    "parser_backend", "encoder_backend", "llm_backend",  "llm_base_url", "llm_model",
    "encoder_url", "encoder_dimension", "value_case_sensitive",
};

struct CommonFlags {
    std::string config_file;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
};

void add_common_flags(CLI::App& cmd, CommonFlags& flags) {
    cmd.add_option("--config", flags.config_file, "key = value config file");
    for (const char* key : kConfigKeys) {
        std::string flag = "--" + std::string(key);
        std::replace(flag.begin() + 2, flag.end(), '_', '-');
        if (flag == "--corpus-root") {
            flag += ",--corpus";
        } else if (flag == "--index-path") {
            flag += ",--index";
        }
        flags.options[key] = cmd.add_option(flag, flags.values[key]);
    }
}

EngineConfig resolve_config(const CommonFlags& flags, const EnvLookup& env) {
    EngineConfig config;
    config.index_path = "headers.idx";
    if (!flags.config_file.empty()) {
        config = load_config(flags.config_file, config);
    }
    for (const auto& [key, option] : flags.options) {
        if (option->count() > 0) {
            config.set(key, flags.values.at(key));
        }
    }
    apply_env_overrides(config, env);
    config.validate();
    return config;
}

Corpus open_corpus(const EngineConfig& config, std::ostream& err) {
    if (config.corpus_root.empty()) {
        throw ConfigError("no corpus directory given (--corpus-root)");
    }
    if (!std::filesystem::is_directory(config.corpus_root)) {
        throw ConfigError("corpus directory '" + config.corpus_root.string() + "' does not exist");
    }
    auto corpus = load_corpus(config.corpus_root);
    for (const auto& w : corpus.warnings()) {
        err << "warning: " << w << '\n';
    }
    return corpus;
}

struct Context {
    EngineConfig config;
    Corpus corpus;
    HeaderIndex index;
    std::unique_ptr<Encoder> encoder;
    std::unique_ptr<ChatModel> chat;
};

Context open_context(EngineConfig config, std::ostream& err) {
    Context ctx;
    ctx.corpus = open_corpus(config, err);
    if (!std::filesystem::exists(config.index_path)) {
        throw ConfigError("index file '" + config.index_path.string() + "' not found; run the index command first");
    }
    ctx.index = HeaderIndex::load(config.index_path);
    ctx.encoder = make_encoder(config);
    if (ctx.index.encoder_id() != ctx.encoder->id()) {
        throw ConfigError("index was built with encoder '" + ctx.index.encoder_id() + "' but '" + ctx.encoder->id() +
                          "' is configured");
    }
    ctx.chat = make_chat_model(config);
    ctx.config = std::move(config);
    return ctx;
}

std::unique_ptr<QuestionParser> make_parser(const Context& ctx) {
    if (ctx.config.parser_backend == Backend::remote) {
        return std::make_unique<LlmQuestionParser>(*ctx.chat);
    }
    std::vector<std::string> headers;
    for (const auto& [name, count] : ctx.corpus.header_table_counts()) {
        headers.push_back(name);
    }
    return std::make_unique<OfflineQuestionParser>(std::move(headers));
}

struct Question {
    std::string qid;
    std::string text;
};

std::string id_string(const json& v) {
    return v.is_string() ? v.get<std::string>() : v.dump();
}

std::vector<Question> read_questions(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw ConfigError("question file '" + path.string() + "' does not exist");
    }
    std::istringstream in(read_file(path));
    std::vector<Question> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto text = trim(line);
        if (text.empty()) {
            continue;
        }
        if (text.front() != '{') {
            out.push_back({std::to_string(line_no), std::string(text)});
            continue;
        }
        try {
            auto j = json::parse(text);
            std::string qid = j.contains("qid")           ? id_string(j["qid"])
                              : j.contains("question_id") ? id_string(j["question_id"])
                                                          : std::to_string(line_no);
            out.push_back({std::move(qid), j.at("question").get<std::string>()});
        } catch (const json::exception& e) {
            throw ConfigError("question file line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::vector<Question> gather_questions(const std::string& question, const std::string& file) {
    if (!question.empty() && !file.empty()) {
        throw ConfigError("give either --question or --questions, not both");
    }
    if (!question.empty()) {
        return {{"1", question}};
    }
    if (file.empty()) {
        throw ConfigError("no question given (--question or --questions)");
    }
    return read_questions(file);
}

std::vector<ParseOutcome> parse_all(Context& ctx, const std::vector<Question>& questions) {
    std::vector<std::string> texts;
    for (const auto& q : questions) {
        texts.push_back(q.text);
    }
    auto parser = make_parser(ctx);
    return parse_questions(*parser, texts, ctx.config.parser_batch);
}

json parsed_json(const ParsedQuestion& p) {
    return {{"column_mentions", p.column_mentions}, {"value_mentions", p.value_mentions}, {"sql_sketch", p.sql_sketch}};
}

json scored_table_json(const ScoredTable& t, const ParsedQuestion& p) {
    json hits = json::array();
    for (const auto& h : t.hits) {
        hits.push_back({{"mention", p.column_mentions.at(h.mention_index)},
                        {"mention_index", h.mention_index},
                        {"header", h.verbatim},
                        {"score", h.score}});
    }
    return {{"table", t.table_id}, {"score", t.s_total}, {"s_col", t.s_col}, {"s_val", t.s_val},
            {"hits", hits},        {"values", t.matched_values}};
}

json cell_json(const Cell& cell) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
                return nullptr;
            } else {
                return v;
            }
        },
        cell);
}

std::ofstream open_output(const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) {
        throw ConfigError("cannot write '" + path + "'");
    }
    return f;
}

// -- commands ---------------------------------------------------------------

int cmd_index(const EngineConfig& config, std::ostream& out, std::ostream& err) {
    auto start = Clock::now();
    auto corpus = open_corpus(config, err);
    auto encoder = make_encoder(config);
    auto index = HeaderIndex::build(corpus, *encoder);
    index.save(config.index_path);
    double secs = seconds_since(start);
    auto bytes = std::filesystem::file_size(config.index_path);
    out << json{{"tables", corpus.size()},
                {"distinct_headers", index.size()},
                {"index", config.index_path.string()},
                {"bytes", bytes}}
               .dump()
        << '\n';
    err << corpus.size() << " tables, " << index.size() << " distinct headers, index written to "
        << config.index_path.string() << " (" << bytes << " bytes) in " << std::fixed << std::setprecision(2) << secs
        << " s\n";
    return kExitOk;
}

struct RetrieveFlags {
    std::string question;
    std::string questions;
    std::string mode = "independent";
    std::string output;
    std::size_t top = 20;
};

int cmd_retrieve(const EngineConfig& config, const RetrieveFlags& flags, std::ostream& out, std::ostream& err) {
    bool join_mode = flags.mode == "join";
    if (join_mode && config.join_graph_path.empty()) {
        throw ConfigError("join mode needs a join graph file (--join-graph)");
    }
    auto questions = gather_questions(flags.question, flags.questions);
    auto ctx = open_context(config, err);
    JoinGraph graph;
    if (join_mode) {
        if (!std::filesystem::exists(ctx.config.join_graph_path)) {
            throw ConfigError("join graph file '" + ctx.config.join_graph_path.string() + "' does not exist");
        }
        graph = load_join_graph(ctx.config.join_graph_path, ctx.corpus);
        for (const auto& w : graph.warnings()) {
            err << "warning: " << w << '\n';
        }
    }
    std::ofstream file;
    if (!flags.output.empty()) {
        file = open_output(flags.output);
    }
    std::ostream& sink = flags.output.empty() ? out : file;

    RetrievalConfig rcfg = ctx.config.retrieval;
    if (join_mode) {
        // Schema pruning is disabled in the join setting.
        rcfg.k = std::max<std::size_t>(ctx.index.size(), 1);
        rcfg.eta = 0.0;
    }
    Retriever retriever(ctx.corpus, ctx.index, *ctx.encoder, rcfg);
    auto parses = parse_all(ctx, questions);
    std::size_t failures = 0;
    for (std::size_t i = 0; i < questions.size(); ++i) {
        json line{{"qid", questions[i].qid}, {"question", questions[i].text}};
        if (!parses[i].parsed) {
            line["error"] = parses[i].error;
            ++failures;
            sink << line.dump() << '\n';
            continue;
        }
        const auto& parsed = *parses[i].parsed;
        line["parsed"] = parsed_json(parsed);
        try {
            auto evidence = retriever.gather(parsed);
            for (const auto& w : evidence.warnings) {
                err << "warning: question " << questions[i].qid << ": " << w << '\n';
            }
            if (join_mode) {
                auto groups = rank_join_groups(evidence, ctx.corpus, graph, ctx.config.join);
                json arr = json::array();
                for (std::size_t g = 0; g < groups.size() && (flags.top == 0 || g < flags.top); ++g) {
                    json support = json::object();
                    for (const auto& [m, table] : groups[g].per_mention_support) {
                        support[parsed.column_mentions.at(m)] = table;
                    }
                    arr.push_back({{"tables", groups[g].tables}, {"score", groups[g].score}, {"support", support}});
                }
                line["groups"] = arr;
            } else {
                auto ranked = rank_tables(evidence, ctx.corpus);
                auto selected = select_by_threshold(ranked, rcfg.tau);
                json arr = json::array();
                for (std::size_t t = 0; t < ranked.size() && (flags.top == 0 || t < flags.top); ++t) {
                    arr.push_back(scored_table_json(ranked[t], parsed));
                }
                json sel = json::array();
                for (const auto& s : selected) {
                    sel.push_back(s.table_id);
                }
                line["ranked"] = arr;
                line["selected"] = sel;
            }
        } catch (const Error& e) {
            line["error"] = e.what();
            ++failures;
        }
        sink << line.dump() << '\n';
    }
    err << questions.size() << " questions, " << failures << " failed\n";
    return failures > 0 ? kExitPartial : kExitOk;
}

struct AskFlags {
    std::string question;
    std::string questions;
    std::string output;
    bool combined = false;
};

int cmd_ask(const EngineConfig& config, const AskFlags& flags, std::ostream& out, std::ostream& err) {
    auto questions = gather_questions(flags.question, flags.questions);
    auto ctx = open_context(config, err);
    std::unique_ptr<ChatModel> offline;
    ChatModel* llm = nullptr;
    if (ctx.config.llm_backend == Backend::remote) {
        llm = ctx.chat.get();
    } else {
        offline = std::make_unique<OfflineSqlModel>();
        llm = offline.get();
    }
    QaOptions options;
    options.combined_judge_and_generate = flags.combined || ctx.config.combined_judge_and_generate;
    SqlGenerator generator(*llm, options);
    SqliteEngine engine;
    Retriever retriever(ctx.corpus, ctx.index, *ctx.encoder, ctx.config.retrieval);

    std::ofstream file;
    if (!flags.output.empty()) {
        file = open_output(flags.output);
    }
    std::ostream& sink = flags.output.empty() ? out : file;

    auto parses = parse_all(ctx, questions);
    std::size_t failures = 0;
    std::size_t answered = 0;
    for (std::size_t i = 0; i < questions.size(); ++i) {
        const auto& qid = questions[i].qid;
        auto empty_entry = [&](const std::string& error) {
            json line{{"question_id", qid}, {"table", nullptr}, {"sql", nullptr}, {"rows", json::array()}};
            if (!error.empty()) {
                line["error"] = error;
            }
            sink << line.dump() << '\n';
        };
        if (!parses[i].parsed) {
            ++failures;
            empty_entry(parses[i].error);
            continue;
        }
        try {
            auto ranked = retriever.retrieve(*parses[i].parsed);
            auto selected = select_by_threshold(ranked, ctx.config.retrieval.tau);
            auto clusters = cluster_by_signature(selected);
            auto answers = answer_question(*parses[i].parsed, clusters, ctx.corpus, engine, generator);
            for (const auto& entry : answers.entries) {
                json rows = json::array();
                for (const auto& row : entry.rows) {
                    json r = json::array();
                    for (const auto& cell : row) {
                        r.push_back(cell_json(cell));
                    }
                    rows.push_back(std::move(r));
                }
                sink << json{{"question_id", qid}, {"table", entry.table}, {"sql", entry.sql},
                             {"columns", entry.columns}, {"rows", rows}}
                            .dump()
                     << '\n';
            }
            for (const auto& f : answers.failures) {
                sink << json{{"question_id", qid}, {"table", f.table}, {"sql", f.sql}, {"rows", json::array()},
                             {"error", f.error}}
                            .dump()
                     << '\n';
            }
            if (answers.entries.empty() && answers.failures.empty()) {
                empty_entry("");
            } else if (!answers.entries.empty()) {
                ++answered;
            }
        } catch (const Error& e) {
            ++failures;
            empty_entry(e.what());
        }
    }
    const auto& s = generator.stats();
    err << questions.size() << " questions, " << answered << " answered, " << failures << " failed\n"
        << "clusters " << s.clusters << ", judge calls " << s.judge_calls << ", sql calls " << s.sql_calls
        << " (cluster path " << s.cluster_sql_calls << ", per-table fallback " << s.fallback_attempts << ")"
        << ", invalid sql " << s.invalid_sql << ", llm failures " << s.llm_failures << ", executions "
        << s.executions << '\n';
    return failures > 0 ? kExitPartial : kExitOk;
}

struct EvalFlags {
    std::string predictions;
    std::string truth;
    std::string mode = "independent";
};

json report_json(const EvalReport& r) {
    json per = json::array();
    for (const auto& q : r.per_question) {
        per.push_back({{"qid", q.qid}, {"precision", q.precision}, {"recall", q.recall}, {"f1", q.f1}});
    }
    json j{{"questions", r.n_questions},
           {"macro_precision", r.macro_precision},
           {"macro_recall", r.macro_recall},
           {"macro_f1", r.macro_f1},
           {"per_question", per}};
    if (!r.hit_at_k.empty()) {
        json hits = json::object();
        for (const auto& [k, v] : r.hit_at_k) {
            hits[std::to_string(k)] = v;
        }
        j["hit_at_k"] = hits;
    }
    return j;
}

void print_table(std::ostream& err, const std::string& label, const EvalReport& r) {
    err << std::fixed << std::setprecision(4) << label << ": n=" << r.n_questions << "  P=" << r.macro_precision
        << "  R=" << r.macro_recall << "  F1=" << r.macro_f1 << '\n';
    for (const auto& [k, v] : r.hit_at_k) {
        err << "  Hit@" << k << " = " << v << '\n';
    }
}

int cmd_eval(const EvalFlags& flags, std::ostream& out, std::ostream& err) {
    for (const auto& p : {flags.predictions, flags.truth}) {
        if (!std::filesystem::exists(p)) {
            throw ConfigError("file '" + p + "' does not exist");
        }
    }
    bool join_mode = flags.mode == "join";
    auto records = read_bench_records(flags.truth);
    std::map<std::string, std::set<TableId>> truth;
    std::map<std::string, CellAnswers> truth_cells;
    bool has_cells = false;
    for (const auto& r : records) {
        truth[r.qid] = join_mode && r.truth_group ? *r.truth_group : r.truth_tables;
        truth_cells[r.qid] = truth_cells_of(r);
        has_cells = has_cells || !r.truth_cells.empty();
    }

    std::string first_line;
    {
        std::istringstream in(read_file(flags.predictions));
        while (std::getline(in, first_line) && trim(first_line).empty()) {
        }
    }
    bool answers_file = false;
    try {
        answers_file = !first_line.empty() && json::parse(first_line).contains("question_id");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("predictions file is not JSONL: ") + e.what());
    }

    json report;
    if (answers_file) {
        auto answers = read_answers(flags.predictions);
        auto table_report = macro_prf(answers.tables, truth);
        report = report_json(table_report);
        print_table(err, "tables", table_report);
        if (has_cells) {
            auto cells = cell_prf(answers.cells, truth_cells);
            report["cells"] = report_json(cells);
            print_table(err, "cells", cells);
        }
    } else {
        std::map<std::string, std::set<TableId>> selected;
        std::map<std::string, std::vector<std::vector<TableId>>> groups;
        std::istringstream in(read_file(flags.predictions));
        std::string line;
        while (std::getline(in, line)) {
            if (trim(line).empty()) {
                continue;
            }
            try {
                auto j = json::parse(line);
                auto qid = id_string(j.at("qid"));
                auto& set = selected[qid];
                auto& ranked = groups[qid];
                if (join_mode) {
                    if (!j.contains("groups") && !j.contains("error")) {
                        throw ConfigError("join-mode evaluation needs ranked groups; question " + qid + " has none");
                    }
                    for (const auto& g : j.value("groups", json::array())) {
                        ranked.push_back(g.at("tables").get<std::vector<TableId>>());
                    }
                    if (!ranked.empty()) {
                        set.insert(ranked.front().begin(), ranked.front().end());
                    }
                } else {
                    if (!j.contains("selected") && !j.contains("error")) {
                        throw ConfigError("prediction for question " + qid + " has no selected tables");
                    }
                    for (const auto& t : j.value("selected", json::array())) {
                        set.insert(t.get<std::string>());
                    }
                }
            } catch (const json::exception& e) {
                throw ConfigError(std::string("malformed prediction: ") + e.what());
            }
        }
        auto r = macro_prf(selected, truth);
        if (join_mode) {
            for (std::size_t k : {1, 5, 10, 20}) {
                r.hit_at_k[k] = hit_at_k_group(groups, truth, k);
            }
        }
        report = report_json(r);
        print_table(err, join_mode ? "top-1 groups" : "tables", r);
    }
    out << report.dump() << '\n';
    return kExitOk;
}

struct BenchFlags {
    std::string kind = "independent";
    std::string sources;
    std::string schemas;
    std::string output;
    std::string graph_output;
};

int cmd_bench_build(const EngineConfig& config, const BenchFlags& flags, std::ostream& out, std::ostream& err) {
    if (!std::filesystem::exists(flags.sources)) {
        throw ConfigError("source file '" + flags.sources + "' does not exist");
    }
    std::vector<BenchRecord> records;
    std::vector<DroppedQuestion> dropped;
    if (flags.kind == "join") {
        if (!std::filesystem::exists(flags.schemas)) {
            throw ConfigError("schema file '" + flags.schemas + "' does not exist");
        }
        auto bench = build_join_benchmark(read_database_schemas(flags.schemas), read_join_sources(flags.sources));
        if (!flags.graph_output.empty()) {
            open_output(flags.graph_output) << dump_join_graph(bench.graph) << '\n';
        }
        for (const auto& w : bench.graph.warnings()) {
            err << "warning: " << w << '\n';
        }
        records = std::move(bench.records);
        dropped = std::move(bench.dropped);
    } else {
        auto corpus = open_corpus(config, err);
        SqliteEngine engine;
        auto bench = build_independent_benchmark(read_independent_sources(flags.sources), corpus, engine);
        records = std::move(bench.records);
        dropped = std::move(bench.dropped);
    }
    if (flags.output.empty()) {
        for (const auto& r : records) {
            out << to_jsonl_line(r) << '\n';
        }
    } else {
        write_bench_records(flags.output, records);
    }
    for (const auto& d : dropped) {
        err << "dropped " << d.qid << ": " << d.reason << '\n';
    }
    err << records.size() << " records kept, " << dropped.size() << " dropped\n";
    return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const EnvLookup& env) {
    CLI::App app{"Entity-aware table retrieval and question answering over CSV collections"};
    app.require_subcommand(1);

    CommonFlags index_common, retrieve_common, ask_common, bench_common;
    auto* index_cmd = app.add_subcommand("index", "Build the header embedding index");
    add_common_flags(*index_cmd, index_common);

    RetrieveFlags rflags;
    auto* retrieve_cmd = app.add_subcommand("retrieve", "Rank tables or join groups for questions");
    add_common_flags(*retrieve_cmd, retrieve_common);
    retrieve_cmd->add_option("--question", rflags.question);
    retrieve_cmd->add_option("--questions", rflags.questions, "JSONL or one question per line");
    retrieve_cmd->add_option("--mode", rflags.mode)->check(CLI::IsMember({"independent", "join"}));
    retrieve_cmd->add_option("--output", rflags.output);
    retrieve_cmd->add_option("--top", rflags.top, "ranked entries to emit, 0 for all");

    AskFlags aflags;
    auto* ask_cmd = app.add_subcommand("ask", "Answer questions with SQL over retrieved tables");
    add_common_flags(*ask_cmd, ask_common);
    ask_cmd->add_option("--question", aflags.question);
    ask_cmd->add_option("--questions", aflags.questions);
    ask_cmd->add_option("--output", aflags.output);
    ask_cmd->add_flag("--combined", aflags.combined, "judge and generate SQL in one call");

    EvalFlags eflags;
    auto* eval_cmd = app.add_subcommand("eval", "Score predictions or answers against benchmark truth");
    eval_cmd->add_option("--predictions", eflags.predictions)->required();
    eval_cmd->add_option("--truth", eflags.truth)->required();
    eval_cmd->add_option("--mode", eflags.mode)->check(CLI::IsMember({"independent", "join"}));

    BenchFlags bflags;
    auto* bench_cmd = app.add_subcommand("bench-build", "Build benchmark records from SQL-annotated questions");
    add_common_flags(*bench_cmd, bench_common);
    bench_cmd->add_option("--kind", bflags.kind)->check(CLI::IsMember({"independent", "join"}));
    bench_cmd->add_option("--sources", bflags.sources)->required();
    bench_cmd->add_option("--schemas", bflags.schemas);
    bench_cmd->add_option("--output", bflags.output);
    bench_cmd->add_option("--graph-output", bflags.graph_output);

    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (index_cmd->parsed()) {
            return cmd_index(resolve_config(index_common, env), out, err);
        }
        if (retrieve_cmd->parsed()) {
            return cmd_retrieve(resolve_config(retrieve_common, env), rflags, out, err);
        }
        if (ask_cmd->parsed()) {
            return cmd_ask(resolve_config(ask_common, env), aflags, out, err);
        }
        if (eval_cmd->parsed()) {
            return cmd_eval(eflags, out, err);
        }
        return cmd_bench_build(resolve_config(bench_common, env), bflags, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitPartial;
    }
}

} // namespace tabscout::cli
