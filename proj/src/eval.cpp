#include "ragent/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ragent {

std::vector<QueryRecord> load_query_set(const std::filesystem::path& path,
                                        const CorpusManifest* manifest) {
    std::ifstream in(path);
    if (!in) throw EvalError("cannot read query set: " + path.string());

    std::vector<QueryRecord> records;
    std::vector<std::string> offenders;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object())
            throw EvalError("malformed query record at line " + std::to_string(line_no));
        QueryRecord rec;
        try {
            rec.query_id = obj.at("query_id").get<std::string>();
            rec.query = obj.at("query").get<std::string>();
            for (const auto& g : obj.at("gold_doc_ids"))
                rec.gold_doc_ids.insert(g.get<std::string>());
            rec.gold_answer = obj.value("gold_answer", std::string());
        } catch (const nlohmann::json::exception& e) {
            throw EvalError("malformed query record at line " + std::to_string(line_no) + ": " +
                            e.what());
        }
        if (rec.gold_doc_ids.empty())
            throw EvalError("query " + rec.query_id + " has no gold docs");
        if (manifest)
            for (const auto& g : rec.gold_doc_ids)
                if (!manifest->find(g)) offenders.push_back(rec.query_id + ": " + g);
        records.push_back(std::move(rec));
    }
    if (!offenders.empty()) {
        std::string msg = "gold doc ids missing from corpus:";
        for (const auto& o : offenders) msg += " " + o;
        throw EvalError(msg);
    }
    if (records.empty()) throw EvalError("query set is empty: " + path.string());
    return records;
}

std::vector<std::string> rank_documents(const AgentAnswer& answer,
                                        const ReferenceRegistry& registry) {
    std::vector<std::string> ranking;
    for (const auto& citation : answer.citations) {
        const RefEntry* entry = registry.find(citation.ref_id);
        if (!entry) continue;
        if (std::find(ranking.begin(), ranking.end(), entry->doc_id) == ranking.end())
            ranking.push_back(entry->doc_id);
    }
    return ranking;
}

double recall_at_k(const std::vector<std::string>& ranking, const std::set<std::string>& gold,
                   std::size_t k, RecallMode mode) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (gold.empty()) throw std::invalid_argument("gold set must be non-empty");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < ranking.size() && i < k; ++i)
        if (gold.count(ranking[i])) ++hits;
    if (mode == RecallMode::hit_rate) return hits > 0 ? 1.0 : 0.0;
    return static_cast<double>(hits) / static_cast<double>(gold.size());
}

Stat mean_and_stderr(const std::vector<double>& values) {
    Stat s;
    const std::size_t n = values.size();
    if (n == 0) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(n);
    if (n < 2) return s; // stderr reported as 0 for a single sample
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stderr_of_mean = std::sqrt(ss / static_cast<double>(n - 1)) /
                       std::sqrt(static_cast<double>(n));
    return s;
}

QueryOutcome make_outcome(const std::string& query_id, const AgentAnswer& answer,
                          const ReferenceRegistry& registry, const std::set<std::string>& gold,
                          RecallMode mode) {
    QueryOutcome out;
    out.query_id = query_id;
    const auto ranking = rank_documents(answer, registry);
    out.recall_at_1 = recall_at_k(ranking, gold, 1, mode);
    out.recall_at_3 = recall_at_k(ranking, gold, 3, mode);
    out.total_tokens = answer.stats.total_tokens;
    out.tool_counts = answer.stats.tool_calls;
    out.tool_total = answer.stats.tool_calls_total();
    out.iterations = answer.stats.iterations_used;
    out.forced_completion = answer.stats.forced_completion;
    out.answer_text = answer.text;
    return out;
}

namespace {

double tool_count(const QueryOutcome& o, const char* name) {
    auto it = o.tool_counts.find(name);
    return it == o.tool_counts.end() ? 0.0 : static_cast<double>(it->second);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

} // namespace

EvalReport aggregate(std::vector<QueryOutcome> outcomes, std::string label,
                     const std::vector<QueryOutcome>* baseline, std::string baseline_label) {
    if (outcomes.empty()) throw EvalError("no query outcomes to aggregate");

    EvalReport report;
    report.label = std::move(label);

    std::vector<double> r1, r3, tools, searches, opens, finds, summs, tokens;
    for (const auto& o : outcomes) {
        r1.push_back(o.recall_at_1);
        r3.push_back(o.recall_at_3);
        tools.push_back(static_cast<double>(o.tool_total));
        searches.push_back(tool_count(o, "search"));
        opens.push_back(tool_count(o, "open"));
        finds.push_back(tool_count(o, "find"));
        summs.push_back(tool_count(o, "summarize"));
        tokens.push_back(static_cast<double>(o.total_tokens));
    }
    report.recall_at_1 = mean_and_stderr(r1);
    report.recall_at_3 = mean_and_stderr(r3);
    report.avg_tools = mean_and_stderr(tools);
    report.search_calls = mean_and_stderr(searches);
    report.open_calls = mean_and_stderr(opens);
    report.find_calls = mean_and_stderr(finds);
    report.summarize_calls = mean_and_stderr(summs);
    report.total_tokens = mean_and_stderr(tokens);

    if (baseline) {
        std::set<std::string> have;
        for (const auto& b : *baseline) have.insert(b.query_id);
        std::vector<std::string> missing;
        for (const auto& o : outcomes)
            if (!have.count(o.query_id)) missing.push_back(o.query_id);
        if (!missing.empty()) {
            std::string msg = "baseline run is missing query ids:";
            for (const auto& m : missing) msg += " " + m;
            throw EvalError(msg);
        }
        std::vector<double> base_tokens;
        for (const auto& b : *baseline) base_tokens.push_back(static_cast<double>(b.total_tokens));
        const double base_mean = mean_and_stderr(base_tokens).mean;
        if (base_mean > 0.0) report.cost_ratio = report.total_tokens.mean / base_mean;
        report.baseline_label = std::move(baseline_label);
    }

    report.per_query = std::move(outcomes);
    return report;
}

std::string report_csv(const EvalReport& report) {
    std::ostringstream out;
    out << "query_id,recall_at_1,recall_at_3,total_tokens,iterations,tools_total,"
           "search,open,find,summarize,forced_completion\n";
    for (const auto& o : report.per_query) {
        out << o.query_id << "," << fmt(o.recall_at_1) << "," << fmt(o.recall_at_3) << ","
            << o.total_tokens << "," << o.iterations << "," << o.tool_total << ","
            << static_cast<std::size_t>(tool_count(o, "search")) << ","
            << static_cast<std::size_t>(tool_count(o, "open")) << ","
            << static_cast<std::size_t>(tool_count(o, "find")) << ","
            << static_cast<std::size_t>(tool_count(o, "summarize")) << ","
            << (o.forced_completion ? 1 : 0) << "\n";
    }
    out << "mean," << fmt(report.recall_at_1.mean) << "," << fmt(report.recall_at_3.mean) << ","
        << fmt(report.total_tokens.mean) << ",," << fmt(report.avg_tools.mean) << ","
        << fmt(report.search_calls.mean) << "," << fmt(report.open_calls.mean) << ","
        << fmt(report.find_calls.mean) << "," << fmt(report.summarize_calls.mean) << ",\n";
    out << "stderr," << fmt(report.recall_at_1.stderr_of_mean) << ","
        << fmt(report.recall_at_3.stderr_of_mean) << "," << fmt(report.total_tokens.stderr_of_mean)
        << ",," << fmt(report.avg_tools.stderr_of_mean) << ","
        << fmt(report.search_calls.stderr_of_mean) << "," << fmt(report.open_calls.stderr_of_mean)
        << "," << fmt(report.find_calls.stderr_of_mean) << ","
        << fmt(report.summarize_calls.stderr_of_mean) << ",\n";
    if (report.cost_ratio)
        out << "cost_ratio," << fmt(*report.cost_ratio) << ",,,,,,,,,\n";
    return out.str();
}

nlohmann::json report_json(const EvalReport& report) {
    auto stat = [](const Stat& s) {
        return nlohmann::json{{"mean", s.mean}, {"stderr", s.stderr_of_mean}};
    };
    nlohmann::json per_query = nlohmann::json::array();
    for (const auto& o : report.per_query) {
        per_query.push_back({{"query_id", o.query_id},
                             {"recall_at_1", o.recall_at_1},
                             {"recall_at_3", o.recall_at_3},
                             {"total_tokens", o.total_tokens},
                             {"iterations", o.iterations},
                             {"tools_total", o.tool_total},
                             {"tool_counts", o.tool_counts},
                             {"forced_completion", o.forced_completion}});
    }
    nlohmann::json agg = {{"n", report.per_query.size()},
                          {"recall_at_1", stat(report.recall_at_1)},
                          {"recall_at_3", stat(report.recall_at_3)},
                          {"avg_tools", stat(report.avg_tools)},
                          {"search", stat(report.search_calls)},
                          {"open", stat(report.open_calls)},
                          {"find", stat(report.find_calls)},
                          {"summarize", stat(report.summarize_calls)},
                          {"total_tokens", stat(report.total_tokens)}};
    if (report.cost_ratio) {
        agg["cost_ratio"] = *report.cost_ratio;
        agg["baseline_label"] = report.baseline_label;
    }
    return {{"label", report.label}, {"aggregates", agg}, {"per_query", per_query}};
}

std::string judge_jsonl(const std::vector<QueryRecord>& records,
                        const std::vector<QueryOutcome>& outcomes) {
    std::ostringstream out;
    for (const auto& rec : records) {
        auto it = std::find_if(outcomes.begin(), outcomes.end(),
                               [&](const QueryOutcome& o) { return o.query_id == rec.query_id; });
        if (it == outcomes.end()) continue;
        nlohmann::json line = {{"query_id", rec.query_id},
                               {"query", rec.query},
                               {"answer", it->answer_text},
                               {"gold_answer", rec.gold_answer}};
        out << line.dump() << "\n";
    }
    return out.str();
}

} // namespace ragent
