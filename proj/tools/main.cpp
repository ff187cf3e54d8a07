#include "ragent/agent.hpp"
#include "ragent/config.hpp"
#include "ragent/eval.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <atomic>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <set>
#include <thread>

namespace fs = std::filesystem;
using namespace ragent;

namespace {

std::set<std::string> extension_set(const std::vector<std::string>& exts) {
    std::set<std::string> out;
    for (auto e : exts) {
        if (!e.empty() && e.front() == '.') e.erase(0, 1);
        for (auto& c : e) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        out.insert(e);
    }
    return out;
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

std::string load_system_prompt(const RunConfig& cfg) {
    if (cfg.system_prompt_file.empty()) return default_system_prompt();
    std::ifstream in(cfg.system_prompt_file);
    if (!in) throw std::runtime_error("cannot read system prompt: " + cfg.system_prompt_file);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::unique_ptr<ModelClient> make_client(const RunConfig& cfg, const nlohmann::json* script_json,
                                         const std::string& session_id) {
    if (cfg.client == "scripted") {
        if (!script_json) throw std::runtime_error("scripted client requires --script");
        return std::make_unique<ScriptedClient>(
            ScriptedClient::for_session(*script_json, session_id));
    }
    if (cfg.client == "http") {
        if (cfg.http_endpoint.empty())
            throw std::runtime_error("http client requires http_endpoint in the config");
        return std::make_unique<HttpModelClient>(cfg.http_endpoint, cfg.http_model,
                                                 cfg.api_key_env);
    }
    throw std::runtime_error("unknown client: " + cfg.client);
}

void print_answer(const AgentAnswer& answer) {
    std::cout << answer.text << "\n\n";
    if (!answer.citations.empty()) {
        std::cout << "Citations:\n";
        for (const auto& c : answer.citations)
            std::cout << "  " << c.ref_id << " (score " << c.relevancy_score << ")\n";
    }
    std::cout << "Stats: iterations=" << answer.stats.iterations_used
              << " tools=" << answer.stats.tool_calls_total()
              << " tokens=" << answer.stats.total_tokens
              << " forced=" << (answer.stats.forced_completion ? "yes" : "no") << "\n";
    for (const auto& note : answer.stats.notes) std::cout << "  note: " << note << "\n";
}

std::vector<QueryOutcome> outcomes_from_report(const fs::path& report_path) {
    std::ifstream in(report_path);
    if (!in) throw std::runtime_error("cannot read report: " + report_path.string());
    nlohmann::json j = nlohmann::json::parse(in);
    std::vector<QueryOutcome> outcomes;
    for (const auto& q : j.at("per_query")) {
        QueryOutcome o;
        o.query_id = q.at("query_id").get<std::string>();
        o.recall_at_1 = q.at("recall_at_1").get<double>();
        o.recall_at_3 = q.at("recall_at_3").get<double>();
        o.total_tokens = q.at("total_tokens").get<std::size_t>();
        o.iterations = q.at("iterations").get<std::size_t>();
        o.tool_total = q.at("tools_total").get<std::size_t>();
        o.tool_counts = q.at("tool_counts").get<std::map<std::string, std::size_t>>();
        o.forced_completion = q.at("forced_completion").get<bool>();
        outcomes.push_back(std::move(o));
    }
    return outcomes;
}

void print_aggregates(const EvalReport& report) {
    std::cout << "label=" << report.label << " n=" << report.per_query.size()
              << " R@1=" << report.recall_at_1.mean << "±" << report.recall_at_1.stderr_of_mean
              << " R@3=" << report.recall_at_3.mean << "±" << report.recall_at_3.stderr_of_mean
              << " avg_tools=" << report.avg_tools.mean
              << " avg_tokens=" << report.total_tokens.mean;
    if (report.cost_ratio)
        std::cout << " cost_ratio=" << *report.cost_ratio << " (vs " << report.baseline_label
                  << ")";
    std::cout << "\n";
}

int cmd_index(const RunConfig& cfg, const std::string& out_manifest) {
    auto manifest =
        CorpusManifest::ingest_directory(cfg.corpus_dir, extension_set(cfg.extensions));
    for (const auto& w : manifest.warnings()) std::cerr << "warning: " << w << "\n";
    IndexedCorpus index(manifest);
    auto stats = manifest.stats();
    std::cout << "documents: " << stats.doc_count << "\n"
              << "total_tokens: " << stats.total_tokens << "\n"
              << "avg_doc_tokens: " << stats.avg_doc_tokens << "\n"
              << "avg_doc_length_terms: " << index.avg_doc_length() << "\n";
    if (!out_manifest.empty()) write_file(out_manifest, manifest.to_json().dump(2) + "\n");
    return 0;
}

int cmd_ask(const RunConfig& cfg, const std::string& query) {
    auto manifest =
        CorpusManifest::ingest_directory(cfg.corpus_dir, extension_set(cfg.extensions));
    IndexedCorpus index(manifest);

    nlohmann::json script_json;
    const nlohmann::json* script = nullptr;
    if (cfg.client == "scripted") {
        script_json = ScriptedClient::load_script_file(cfg.script_file);
        script = &script_json;
    }
    auto client = make_client(cfg, script, "ask");

    AgentSession session(cfg.agent, manifest, index, *client, load_system_prompt(cfg));
    AgentAnswer answer =
        cfg.single_shot ? session.ask_single_shot(query) : session.ask(query);
    print_answer(answer);

    write_file(fs::path(cfg.output_dir) / cfg.label / "ask_transcript.jsonl",
               session.conversation().to_jsonl());
    for (const auto& note : answer.stats.notes)
        if (note.rfind("aborted:", 0) == 0) return 1;
    return 0;
}

int cmd_eval(const RunConfig& cfg) {
    auto manifest =
        CorpusManifest::ingest_directory(cfg.corpus_dir, extension_set(cfg.extensions));
    IndexedCorpus index(manifest);
    auto records = load_query_set(cfg.query_file, &manifest);

    nlohmann::json script_json;
    const nlohmann::json* script = nullptr;
    if (cfg.client == "scripted") {
        script_json = ScriptedClient::load_script_file(cfg.script_file);
        script = &script_json;
    }
    const std::string system_prompt = load_system_prompt(cfg);

    std::vector<QueryOutcome> outcomes(records.size());
    std::vector<std::string> transcripts(records.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex failure_mutex;

    auto worker = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= records.size() || failed.load()) break;
            try {
                const auto& rec = records[i];
                auto client = make_client(cfg, script, rec.query_id);
                AgentSession session(cfg.agent, manifest, index, *client, system_prompt);
                AgentAnswer answer =
                    cfg.single_shot ? session.ask_single_shot(rec.query) : session.ask(rec.query);
                outcomes[i] = make_outcome(rec.query_id, answer, session.registry(),
                                           rec.gold_doc_ids);
                transcripts[i] = session.conversation().to_jsonl();
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                failure = records[i].query_id + std::string(": ") + e.what();
                failed.store(true);
            }
        }
    };

    const std::size_t jobs = std::max<std::size_t>(1, std::min(cfg.jobs, records.size()));
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failed.load()) throw std::runtime_error("eval failed on " + failure);

    const fs::path run_dir = fs::path(cfg.output_dir) / cfg.label;
    for (std::size_t i = 0; i < records.size(); ++i)
        write_file(run_dir / "transcripts" / (records[i].query_id + ".jsonl"), transcripts[i]);

    std::vector<QueryOutcome> baseline;
    const std::vector<QueryOutcome>* baseline_ptr = nullptr;
    if (!cfg.baseline_label.empty()) {
        baseline = outcomes_from_report(fs::path(cfg.output_dir) / cfg.baseline_label /
                                        "report.json");
        baseline_ptr = &baseline;
    }

    EvalReport report = aggregate(outcomes, cfg.label, baseline_ptr, cfg.baseline_label);
    write_file(run_dir / "report.csv", report_csv(report));
    write_file(run_dir / "report.json", report_json(report).dump(2) + "\n");
    write_file(run_dir / "judge.jsonl", judge_jsonl(records, report.per_query));
    print_aggregates(report);
    return 0;
}

int cmd_report(const RunConfig& cfg) {
    const fs::path run_dir = fs::path(cfg.output_dir) / cfg.label;
    auto outcomes = outcomes_from_report(run_dir / "report.json");

    std::vector<QueryOutcome> baseline;
    const std::vector<QueryOutcome>* baseline_ptr = nullptr;
    if (!cfg.baseline_label.empty()) {
        baseline = outcomes_from_report(fs::path(cfg.output_dir) / cfg.baseline_label /
                                        "report.json");
        baseline_ptr = &baseline;
    }

    EvalReport report = aggregate(outcomes, cfg.label, baseline_ptr, cfg.baseline_label);
    write_file(run_dir / "report.csv", report_csv(report));
    write_file(run_dir / "report.json", report_json(report).dump(2) + "\n");
    print_aggregates(report);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Agentic retrieval harness over a locally indexed corpus"};
    app.require_subcommand(1);

    std::string config_file, corpus, queries, client, script, out_dir, label, baseline_label;
    std::string query, out_manifest, system_prompt_file;
    std::vector<std::string> extensions;
    std::size_t max_calls = 0, token_threshold = 0, jobs = 0;
    bool single_shot = false, no_multi_query = false, no_summarize = false;
    bool semantic_find = false, no_semantic_find = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_file, "JSON config file");
        cmd->add_option("--corpus", corpus, "corpus directory");
        cmd->add_option("--client", client, "model client: http or scripted");
        cmd->add_option("--script", script, "scripted client script file");
        cmd->add_option("--max-calls", max_calls, "maximum loop iterations");
        cmd->add_option("--token-threshold", token_threshold, "context token budget");
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--label", label, "run label");
        cmd->add_option("--ext", extensions, "corpus file extensions");
        cmd->add_option("--system-prompt", system_prompt_file, "system prompt file");
        cmd->add_flag("--single-shot", single_shot, "single search then answer from snippets");
        cmd->add_flag("--no-multi-query", no_multi_query, "single-query search mode");
        cmd->add_flag("--no-summarize", no_summarize, "disable the summarize tool");
        cmd->add_flag("--semantic-find", semantic_find, "enable semantic find mode");
        cmd->add_flag("--no-semantic-find", no_semantic_find, "disable semantic find mode");
    };

    auto* index_cmd = app.add_subcommand("index", "ingest a corpus and print stats");
    index_cmd->add_option("--config", config_file, "JSON config file");
    index_cmd->add_option("--corpus", corpus, "corpus directory");
    index_cmd->add_option("--ext", extensions, "corpus file extensions");
    index_cmd->add_option("--out", out_manifest, "manifest JSON output path");

    auto* ask_cmd = app.add_subcommand("ask", "answer one question");
    add_common(ask_cmd);
    ask_cmd->add_option("query", query, "the question")->required();

    auto* eval_cmd = app.add_subcommand("eval", "run a query set and write reports");
    add_common(eval_cmd);
    eval_cmd->add_option("--queries", queries, "query set JSONL");
    eval_cmd->add_option("--jobs", jobs, "parallel sessions");
    eval_cmd->add_option("--baseline-label", baseline_label, "baseline run for cost ratio");

    auto* report_cmd = app.add_subcommand("report", "recompute reports for a finished run");
    report_cmd->add_option("--config", config_file, "JSON config file");
    report_cmd->add_option("--out", out_dir, "output directory");
    report_cmd->add_option("--label", label, "run label");
    report_cmd->add_option("--baseline-label", baseline_label, "baseline run for cost ratio");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg =
            config_file.empty() ? RunConfig{} : RunConfig::load_file(config_file);

        // Command-line flags win over config-file values.
        if (!corpus.empty()) cfg.corpus_dir = corpus;
        if (!queries.empty()) cfg.query_file = queries;
        if (!client.empty()) cfg.client = client;
        if (!script.empty()) cfg.script_file = script;
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (!label.empty()) cfg.label = label;
        if (!baseline_label.empty()) cfg.baseline_label = baseline_label;
        if (!extensions.empty()) cfg.extensions = extensions;
        if (!system_prompt_file.empty()) cfg.system_prompt_file = system_prompt_file;
        if (max_calls > 0) cfg.agent.max_calls = max_calls;
        if (token_threshold > 0) cfg.agent.token_threshold = token_threshold;
        if (jobs > 0) cfg.jobs = jobs;
        if (single_shot) cfg.single_shot = true;
        if (no_multi_query) cfg.agent.limits.multi_query_enabled = false;
        if (no_summarize) cfg.agent.limits.summarize_enabled = false;
        if (semantic_find) cfg.agent.limits.semantic_find_enabled = true;
        if (no_semantic_find) cfg.agent.limits.semantic_find_enabled = false;

        if (index_cmd->parsed()) return cmd_index(cfg, out_manifest);
        if (ask_cmd->parsed()) return cmd_ask(cfg, query);
        if (eval_cmd->parsed()) return cmd_eval(cfg);
        if (report_cmd->parsed()) return cmd_report(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
