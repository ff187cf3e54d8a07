#pragma once

#include "ragent/tokens.hpp"
#include "ragent/tools.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ragent {

enum class Role { system, user, assistant, tool };

std::string role_name(Role role);

struct ToolCallRecord {
    std::string name;
    nlohmann::json arguments;
    std::string call_id;
};

struct Message {
    Role role = Role::user;
    std::string content;
    std::vector<ToolCallRecord> tool_calls;
    std::optional<ToolResult> tool_result; // set on tool-role messages
    std::string tool_call_id;              // links a tool message to its call
    std::size_t token_count = 0;
    bool pruned = false;

    static Message text(Role role, std::string content, const TokenCounter& counter);
    static Message assistant(std::string content, std::vector<ToolCallRecord> calls,
                             const TokenCounter& counter);
    static Message tool(ToolResult result, std::string call_id);
};

enum class BudgetState { ok, warned, forcing };
enum class BudgetCheck { ok, warn, force };

struct ContextBudget {
    std::size_t threshold = 128000;
    double warn_fraction = 0.9;
    BudgetState state = BudgetState::ok;
};

struct PruneReport {
    std::size_t tokens_before = 0;
    std::size_t tokens_after = 0;
    std::size_t messages_pruned = 0;
};

/// Ordered message log with per-message token accounting. Confined to one
/// session; safe to copy for transcript export at any point.
class Conversation {
public:
    explicit Conversation(ContextBudget budget = {},
                          TokenCounter counter = default_token_counter());

    void append(Message msg);
    const std::vector<Message>& messages() const { return messages_; }
    std::size_t total_tokens() const { return total_; }
    /// Recomputes the total from scratch; must always equal total_tokens().
    std::size_t recompute_total() const;

    const ContextBudget& budget() const { return budget_; }
    const TokenCounter& counter() const { return counter_; }

    /// Resets the once-per-episode warning latch. Call at the start of each
    /// user turn.
    void begin_episode();

    /// force iff total >= threshold; warn once per episode when total is in
    /// [warn_fraction * threshold, threshold).
    BudgetCheck check_budget();

    /// Appends the fixed budget-warning system notice (at most once per
    /// episode; check_budget handles the latch).
    void inject_warning();

    /// Replaces the content of every prunable tool message that mentions no
    /// preserved ref with a placeholder retaining the pruned ref ids.
    /// Replacement, never deletion: message order and count are unchanged.
    PruneReport prune_after_summarize(const std::set<std::string>& preserve_refs);

    /// One JSON object per message, newline-delimited.
    std::string to_jsonl() const;

private:
    std::vector<Message> messages_;
    std::size_t total_ = 0;
    ContextBudget budget_;
    TokenCounter counter_;
    bool warned_this_episode_ = false;
};

/// Fixed warning text appended when the budget nears its threshold.
extern const char* const kBudgetWarningText;

} // namespace ragent
