#include "ragent/agent.hpp"

#include <algorithm>
#include <regex>
#include <thread>

namespace ragent {

const char* const kForcedCompletionText =
    "Answer now using only information already gathered; do not call tools.";

const std::string& default_system_prompt() {
    static const std::string text =
#include "system_prompt.inc"
        ;
    return text;
}

void AgentConfig::validate() const {
    if (max_calls < 1 || token_threshold < 1 || limits.multi_query_cap < 1 ||
        limits.per_query_results < 1 || limits.open_window_lines < 1 ||
        limits.find_passages_per_pattern < 1 || limits.find_token_cap < 1)
        throw std::invalid_argument("all agent config counts must be >= 1");
    if (!(warn_fraction > 0.0 && warn_fraction <= 1.0))
        throw std::invalid_argument("warn_fraction must be in (0, 1]");
}

std::size_t RunStats::tool_calls_total() const {
    std::size_t total = 0;
    for (const auto& [name, n] : tool_calls) total += n;
    return total;
}

std::size_t RunStats::count(const std::string& tool) const {
    auto it = tool_calls.find(tool);
    return it == tool_calls.end() ? 0 : it->second;
}

AgentAnswer format_answer(const std::string& text, const ReferenceRegistry& registry,
                          RunStats stats) {
    static const std::regex kCitation(
        R"(\[ref:\s*(turn[0-9]+search[0-9]+)\s*(?:\|\s*([0-9]+(?:\.[0-9]+)?))?\s*\])");

    std::map<std::string, double> best_scores;
    auto begin = std::sregex_iterator(text.begin(), text.end(), kCitation);
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
        const std::string ref_id = (*it)[1].str();
        const RefEntry* entry = registry.find(ref_id);
        if (!entry) {
            stats.notes.push_back("dropped citation of unknown ref: " + ref_id);
            continue;
        }
        double score = 1.0;
        if ((*it)[2].matched) score = std::clamp(std::stod((*it)[2].str()), 0.0, 1.0);
        auto found = best_scores.find(ref_id);
        if (found == best_scores.end() || score > found->second) best_scores[ref_id] = score;
    }

    AgentAnswer answer;
    answer.text = text;
    for (const auto& [ref_id, score] : best_scores) answer.citations.push_back({ref_id, score});
    std::sort(answer.citations.begin(), answer.citations.end(),
              [&](const Citation& a, const Citation& b) {
                  if (a.relevancy_score != b.relevancy_score)
                      return a.relevancy_score > b.relevancy_score;
                  return registry.find(a.ref_id)->order < registry.find(b.ref_id)->order;
              });
    answer.stats = std::move(stats);
    return answer;
}

AgentSession::AgentSession(const AgentConfig& config, const CorpusManifest& manifest,
                           const SearchBackend& backend, ModelClient& client,
                           std::string system_prompt)
    : config_(config), client_(&client),
      harness_(manifest, backend, config.limits),
      conversation_(ContextBudget{config.token_threshold, config.warn_fraction,
                                  BudgetState::ok}) {
    config_.validate();
    conversation_.append(
        Message::text(Role::system, std::move(system_prompt), conversation_.counter()));
}

ModelResponse AgentSession::complete_with_retries(const ToolChoiceDirective& directive) {
    const auto schemas = harness_.schemas();
    for (std::size_t attempt = 0;; ++attempt) {
        try {
            return client_->complete(conversation_.messages(), schemas, directive);
        } catch (const TransportError&) {
            if (attempt >= config_.transport_retries) throw;
            std::this_thread::sleep_for(config_.retry_backoff);
        }
    }
}

ToolResult AgentSession::execute_tool(const ModelToolCall& call) {
    const auto& args = call.arguments;
    auto error = [&](const std::string& msg) {
        ToolResult r;
        r.tool_name = call.name;
        r.rendered_text = "Error: " + msg;
        r.token_count = conversation_.counter()(r.rendered_text);
        r.is_error = true;
        return r;
    };

    if (call.name == "search") {
        if (!args.contains("queries")) return error("missing required parameter: queries");
        std::vector<std::string> queries;
        if (args["queries"].is_string()) {
            queries.push_back(args["queries"].get<std::string>());
        } else if (args["queries"].is_array()) {
            for (const auto& q : args["queries"]) {
                if (!q.is_string()) return error("queries must be strings");
                queries.push_back(q.get<std::string>());
            }
        } else {
            return error("queries must be an array of strings");
        }
        return harness_.search(queries);
    }

    if (call.name == "find") {
        if (!args.contains("reference_id") || !args["reference_id"].is_string())
            return error("missing required parameter: reference id");
        if (!args.contains("patterns") || !args["patterns"].is_array())
            return error("missing required parameter: patterns");
        std::vector<std::string> patterns;
        for (const auto& p : args["patterns"]) {
            if (!p.is_string()) return error("patterns must be strings");
            patterns.push_back(p.get<std::string>());
        }
        bool semantic = args.value("semantic", false) && config_.limits.semantic_find_enabled;
        return harness_.find(args["reference_id"].get<std::string>(), patterns, semantic);
    }

    if (call.name == "open") {
        if (!args.contains("reference_id") || !args["reference_id"].is_string())
            return error("missing required parameter: reference id");
        std::optional<std::size_t> line_number;
        if (args.contains("line_number") && !args["line_number"].is_null()) {
            if (!args["line_number"].is_number_integer() ||
                args["line_number"].get<long long>() < 0)
                return error("invalid parameter: line_number");
            line_number = args["line_number"].get<std::size_t>();
        }
        return harness_.open(args["reference_id"].get<std::string>(), line_number);
    }

    if (call.name == "summarize") {
        if (!config_.limits.summarize_enabled) return error("unknown tool: summarize");
        if (!args.contains("summary") || !args["summary"].is_string())
            return error("missing required parameter: summary");
        std::vector<std::string> preserve;
        if (args.contains("preserve_refs")) {
            if (!args["preserve_refs"].is_array())
                return error("preserve_refs must be an array of reference ids");
            for (const auto& r : args["preserve_refs"]) {
                if (!r.is_string()) return error("preserve_refs must be strings");
                preserve.push_back(r.get<std::string>());
            }
        }
        return harness_.summarize(args["summary"].get<std::string>(), preserve);
    }

    return error("unknown tool: " + call.name);
}

AgentAnswer AgentSession::ask(const std::string& user_query) {
    if (user_query.empty()) throw std::invalid_argument("query must be non-empty");
    conversation_.begin_episode();
    harness_.registry().begin_turn(++turn_);
    conversation_.append(Message::text(Role::user, user_query, conversation_.counter()));

    RunStats stats;
    std::string final_text;
    bool have_text = false;
    bool force_final = false;

    auto diagnostic = [&](const std::string& what) {
        stats.total_tokens = conversation_.total_tokens();
        stats.notes.push_back("aborted: " + what);
        AgentAnswer answer;
        answer.text = "Model client failure after retries: " + what;
        answer.stats = std::move(stats);
        return answer;
    };

    for (std::size_t i = 1; i <= config_.max_calls && !have_text && !force_final; ++i) {
        ToolChoiceDirective directive = ToolChoiceDirective::auto_choice();
        switch (conversation_.check_budget()) {
            case BudgetCheck::force:
                if (!config_.limits.summarize_enabled) {
                    force_final = true;
                    continue;
                }
                directive = ToolChoiceDirective::require("summarize");
                break;
            case BudgetCheck::warn:
                conversation_.inject_warning();
                break;
            case BudgetCheck::ok:
                break;
        }

        ModelResponse response;
        try {
            response = complete_with_retries(directive);
        } catch (const TransportError& e) {
            return diagnostic(e.what());
        }
        stats.iterations_used = i;

        if (!response.has_tool_calls()) {
            final_text = response.text;
            have_text = true;
            break;
        }

        std::vector<ToolCallRecord> records;
        for (const auto& call : response.tool_calls)
            records.push_back({call.name, call.arguments, call.id});
        conversation_.append(
            Message::assistant(response.text, std::move(records), conversation_.counter()));

        for (const auto& call : response.tool_calls) {
            ToolResult result = execute_tool(call);
            ++stats.tool_calls[call.name];
            const bool summarized = call.name == "summarize" && !result.is_error;
            const std::set<std::string> preserve = result.ref_ids_mentioned;
            conversation_.append(Message::tool(std::move(result), call.id));
            if (summarized) {
                PruneReport report = conversation_.prune_after_summarize(preserve);
                stats.notes.push_back(
                    "pruned " + std::to_string(report.messages_pruned) + " tool message(s): " +
                    std::to_string(report.tokens_before) + " -> " +
                    std::to_string(report.tokens_after) + " tokens");
                if (conversation_.total_tokens() >= config_.token_threshold) force_final = true;
            }
        }
    }

    if (!have_text) {
        conversation_.append(
            Message::text(Role::system, kForcedCompletionText, conversation_.counter()));
        ModelResponse response;
        try {
            response = complete_with_retries(ToolChoiceDirective::forbid());
        } catch (const TransportError& e) {
            return diagnostic(e.what());
        }
        final_text = response.text;
        stats.forced_completion = true;
        if (stats.iterations_used == 0) stats.iterations_used = 1;
    }

    conversation_.append(Message::text(Role::assistant, final_text, conversation_.counter()));
    stats.total_tokens = conversation_.total_tokens();
    return format_answer(final_text, harness_.registry(), std::move(stats));
}

AgentAnswer AgentSession::ask_single_shot(const std::string& user_query) {
    if (user_query.empty()) throw std::invalid_argument("query must be non-empty");
    conversation_.begin_episode();
    harness_.registry().begin_turn(++turn_);
    conversation_.append(Message::text(Role::user, user_query, conversation_.counter()));

    RunStats stats;
    stats.iterations_used = 1;

    ModelToolCall call{"search", {{"queries", {user_query}}}, "call_singleshot"};
    conversation_.append(Message::assistant(
        "", {{call.name, call.arguments, call.id}}, conversation_.counter()));
    ToolResult result = harness_.search({user_query});
    ++stats.tool_calls["search"];
    const std::set<std::string> hit_refs = result.ref_ids_mentioned;
    conversation_.append(Message::tool(std::move(result), call.id));

    ModelResponse response;
    try {
        response = complete_with_retries(ToolChoiceDirective::forbid());
    } catch (const TransportError& e) {
        stats.total_tokens = conversation_.total_tokens();
        stats.notes.push_back(std::string("aborted: ") + e.what());
        AgentAnswer answer;
        answer.text = std::string("Model client failure after retries: ") + e.what();
        answer.stats = std::move(stats);
        return answer;
    }

    conversation_.append(Message::text(Role::assistant, response.text, conversation_.counter()));
    stats.total_tokens = conversation_.total_tokens();
    AgentAnswer answer = format_answer(response.text, harness_.registry(), std::move(stats));
    if (answer.citations.empty() && !hit_refs.empty()) {
        // Rank by backend score: allocation order within a search result
        // follows the merged ranking.
        std::vector<std::string> ordered(hit_refs.begin(), hit_refs.end());
        std::sort(ordered.begin(), ordered.end(), [&](const std::string& a, const std::string& b) {
            return registry().find(a)->order < registry().find(b)->order;
        });
        for (const auto& ref : ordered) answer.citations.push_back({ref, 1.0});
        answer.stats.notes.push_back("citations derived from backend ranking");
    }
    return answer;
}

RunResult run_query(const AgentConfig& config, const CorpusManifest& manifest,
                    const SearchBackend& backend, ModelClient& client,
                    const std::string& user_query, const std::string& system_prompt) {
    AgentSession session(config, manifest, backend, client, system_prompt);
    AgentAnswer answer = session.ask(user_query);
    return {std::move(answer), session.conversation(), session.registry()};
}

RunResult run_single_shot(const AgentConfig& config, const CorpusManifest& manifest,
                          const SearchBackend& backend, ModelClient& client,
                          const std::string& user_query, const std::string& system_prompt) {
    AgentSession session(config, manifest, backend, client, system_prompt);
    AgentAnswer answer = session.ask_single_shot(user_query);
    return {std::move(answer), session.conversation(), session.registry()};
}

} // namespace ragent
