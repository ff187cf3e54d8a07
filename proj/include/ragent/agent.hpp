#pragma once

#include "ragent/conversation.hpp"
#include "ragent/corpus.hpp"
#include "ragent/model_client.hpp"
#include "ragent/search.hpp"
#include "ragent/tools.hpp"

#include <chrono>
#include <map>
#include <string>
#include <vector>

namespace ragent {

struct AgentConfig {
    std::size_t max_calls = 15;
    std::size_t token_threshold = 128000;
    double warn_fraction = 0.9;
    std::size_t transport_retries = 2;
    std::chrono::milliseconds retry_backoff{250};
    ToolLimits limits;

    /// Throws std::invalid_argument when a count is zero or warn_fraction is
    /// outside (0, 1].
    void validate() const;
};

struct Citation {
    std::string ref_id;
    double relevancy_score = 1.0;
};

struct RunStats {
    std::size_t iterations_used = 0;
    std::map<std::string, std::size_t> tool_calls; // by tool name, errors included
    std::size_t total_tokens = 0;
    bool forced_completion = false;
    std::vector<std::string> notes;

    std::size_t tool_calls_total() const;
    std::size_t count(const std::string& tool) const;
};

struct AgentAnswer {
    std::string text;
    std::vector<Citation> citations; // score descending, ties by allocation order
    RunStats stats;
};

/// The fixed instruction sent with the forced-completion request.
extern const char* const kForcedCompletionText;

/// Built-in system prompt (tool guidance plus the citation microformat).
const std::string& default_system_prompt();

/// Parses [ref: turn{m}search{n} | score] markup from the answer text.
/// Unknown refs are dropped with a stats note; duplicates keep the maximum
/// score; a missing score defaults to 1.0.
AgentAnswer format_answer(const std::string& text, const ReferenceRegistry& registry,
                          RunStats stats);

/// One query session: owns the conversation and the tool harness. A session
/// is single-threaded; follow-up asks reuse the registry with an
/// incremented turn index.
class AgentSession {
public:
    AgentSession(const AgentConfig& config, const CorpusManifest& manifest,
                 const SearchBackend& backend, ModelClient& client,
                 std::string system_prompt = default_system_prompt());

    /// Runs the bounded loop for one user query.
    AgentAnswer ask(const std::string& user_query);

    /// Baseline: exactly one search with the query verbatim, then one
    /// completion with tools forbidden. When the model supplies no
    /// citations the search hits are cited in backend order.
    AgentAnswer ask_single_shot(const std::string& user_query);

    const Conversation& conversation() const { return conversation_; }
    const ReferenceRegistry& registry() const { return harness_.registry(); }
    const ToolHarness& harness() const { return harness_; }

    /// Argument validation plus dispatch; every failure is an in-band error
    /// ToolResult, never an exception.
    ToolResult execute_tool(const ModelToolCall& call);

private:
    ModelResponse complete_with_retries(const ToolChoiceDirective& directive);

    AgentConfig config_;
    ModelClient* client_;
    ToolHarness harness_;
    Conversation conversation_;
    int turn_ = 0;
};

struct RunResult {
    AgentAnswer answer;
    Conversation transcript;
    ReferenceRegistry registry;
};

/// Single-turn convenience wrappers around AgentSession.
RunResult run_query(const AgentConfig& config, const CorpusManifest& manifest,
                    const SearchBackend& backend, ModelClient& client,
                    const std::string& user_query,
                    const std::string& system_prompt = default_system_prompt());

RunResult run_single_shot(const AgentConfig& config, const CorpusManifest& manifest,
                          const SearchBackend& backend, ModelClient& client,
                          const std::string& user_query,
                          const std::string& system_prompt = default_system_prompt());

} // namespace ragent
