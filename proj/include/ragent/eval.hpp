#pragma once

#include "ragent/agent.hpp"
#include "ragent/corpus.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ragent {

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct QueryRecord {
    std::string query_id;
    std::string query;
    std::set<std::string> gold_doc_ids;
    std::string gold_answer; // optional; used only for the judge export
};

/// JSONL: one {query_id, query, gold_doc_ids, [gold_answer]} object per
/// line. When a manifest is given, gold ids must exist in the corpus.
std::vector<QueryRecord> load_query_set(const std::filesystem::path& path,
                                        const CorpusManifest* manifest = nullptr);

/// Citation-induced document ranking: refs map to doc_ids through the
/// registry; duplicates collapse keeping the best rank.
std::vector<std::string> rank_documents(const AgentAnswer& answer,
                                        const ReferenceRegistry& registry);

enum class RecallMode {
    set_recall, // |top-k ∩ gold| / |gold|
    hit_rate    // 1 when any gold doc is in the top-k
};

double recall_at_k(const std::vector<std::string>& ranking, const std::set<std::string>& gold,
                   std::size_t k, RecallMode mode = RecallMode::set_recall);

struct QueryOutcome {
    std::string query_id;
    double recall_at_1 = 0.0;
    double recall_at_3 = 0.0;
    std::size_t total_tokens = 0;
    std::map<std::string, std::size_t> tool_counts;
    std::size_t tool_total = 0;
    std::size_t iterations = 0;
    bool forced_completion = false;
    std::string answer_text;
};

struct Stat {
    double mean = 0.0;
    double stderr_of_mean = 0.0;
};

struct EvalReport {
    std::vector<QueryOutcome> per_query;
    Stat recall_at_1, recall_at_3;
    Stat avg_tools, search_calls, open_calls, find_calls, summarize_calls;
    Stat total_tokens;
    std::optional<double> cost_ratio; // mean tokens / mean baseline tokens
    std::string label;
    std::string baseline_label;
};

Stat mean_and_stderr(const std::vector<double>& values);

/// Aggregates per-query outcomes; when baseline outcomes are given they
/// must cover the same query ids (error lists the missing ones).
EvalReport aggregate(std::vector<QueryOutcome> outcomes, std::string label = "run",
                     const std::vector<QueryOutcome>* baseline = nullptr,
                     std::string baseline_label = {});

QueryOutcome make_outcome(const std::string& query_id, const AgentAnswer& answer,
                          const ReferenceRegistry& registry, const std::set<std::string>& gold,
                          RecallMode mode = RecallMode::set_recall);

/// One row per query plus mean/stderr footer rows.
std::string report_csv(const EvalReport& report);
nlohmann::json report_json(const EvalReport& report);

/// Judge-ready JSONL of (query_id, query, answer, gold_answer) for external
/// factuality scoring.
std::string judge_jsonl(const std::vector<QueryRecord>& records,
                        const std::vector<QueryOutcome>& outcomes);

} // namespace ragent
