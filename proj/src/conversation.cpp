#include "ragent/conversation.hpp"

#include <sstream>

namespace ragent {

const char* const kBudgetWarningText =
    "Context budget notice: the conversation is near its token budget. Call the "
    "summarize tool now to record your reasoning and list the reference ids worth "
    "keeping; unreferenced tool results will be pruned to free space.";

std::string role_name(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
        case Role::tool: return "tool";
    }
    return "unknown";
}

Message Message::text(Role role, std::string content, const TokenCounter& counter) {
    Message m;
    m.role = role;
    m.token_count = counter(content);
    m.content = std::move(content);
    return m;
}

Message Message::assistant(std::string content, std::vector<ToolCallRecord> calls,
                           const TokenCounter& counter) {
    Message m;
    m.role = Role::assistant;
    m.token_count = counter(content);
    for (const auto& call : calls) m.token_count += counter(call.arguments.dump());
    m.content = std::move(content);
    m.tool_calls = std::move(calls);
    return m;
}

Message Message::tool(ToolResult result, std::string call_id) {
    Message m;
    m.role = Role::tool;
    m.content = result.rendered_text;
    m.token_count = result.token_count;
    m.tool_result = std::move(result);
    m.tool_call_id = std::move(call_id);
    return m;
}

Conversation::Conversation(ContextBudget budget, TokenCounter counter)
    : budget_(budget), counter_(std::move(counter)) {}

void Conversation::append(Message msg) {
    total_ += msg.token_count;
    messages_.push_back(std::move(msg));
}

std::size_t Conversation::recompute_total() const {
    std::size_t total = 0;
    for (const auto& m : messages_) total += m.token_count;
    return total;
}

void Conversation::begin_episode() {
    warned_this_episode_ = false;
    if (budget_.state != BudgetState::forcing) budget_.state = BudgetState::ok;
}

BudgetCheck Conversation::check_budget() {
    if (total_ >= budget_.threshold) {
        budget_.state = BudgetState::forcing;
        return BudgetCheck::force;
    }
    const auto warn_at = static_cast<std::size_t>(budget_.warn_fraction *
                                                  static_cast<double>(budget_.threshold));
    if (total_ >= warn_at && !warned_this_episode_) {
        warned_this_episode_ = true;
        budget_.state = BudgetState::warned;
        return BudgetCheck::warn;
    }
    return BudgetCheck::ok;
}

void Conversation::inject_warning() {
    append(Message::text(Role::system, kBudgetWarningText, counter_));
}

PruneReport Conversation::prune_after_summarize(const std::set<std::string>& preserve_refs) {
    PruneReport report;
    report.tokens_before = total_;
    for (auto& msg : messages_) {
        if (msg.role != Role::tool || !msg.tool_result || !msg.tool_result->prunable) continue;
        if (msg.pruned) continue;
        bool keep = false;
        for (const auto& ref : msg.tool_result->ref_ids_mentioned)
            if (preserve_refs.count(ref)) { keep = true; break; }
        if (keep) continue;

        std::string ids;
        for (const auto& ref : msg.tool_result->ref_ids_mentioned) {
            if (!ids.empty()) ids += ", ";
            ids += ref;
        }
        if (ids.empty()) ids = "none";
        std::string placeholder = "[content removed after summarization; refs: " + ids + "]";

        total_ -= msg.token_count;
        msg.content = std::move(placeholder);
        msg.token_count = counter_(msg.content);
        msg.tool_result->rendered_text = msg.content;
        msg.tool_result->token_count = msg.token_count;
        msg.pruned = true;
        total_ += msg.token_count;
        ++report.messages_pruned;
    }
    report.tokens_after = total_;
    if (total_ < budget_.threshold && budget_.state == BudgetState::forcing)
        budget_.state = BudgetState::warned;
    return report;
}

std::string Conversation::to_jsonl() const {
    std::ostringstream out;
    for (const auto& msg : messages_) {
        nlohmann::json line = {{"role", role_name(msg.role)},
                               {"content", msg.content},
                               {"token_count", msg.token_count},
                               {"pruned", msg.pruned}};
        if (!msg.tool_calls.empty()) {
            nlohmann::json calls = nlohmann::json::array();
            for (const auto& call : msg.tool_calls)
                calls.push_back({{"name", call.name},
                                 {"arguments", call.arguments},
                                 {"call_id", call.call_id}});
            line["tool_calls"] = std::move(calls);
        }
        if (msg.tool_result) {
            line["tool_result"] = {
                {"tool_name", msg.tool_result->tool_name},
                {"ref_ids", msg.tool_result->ref_ids_mentioned},
                {"prunable", msg.tool_result->prunable},
                {"is_error", msg.tool_result->is_error}};
            line["tool_call_id"] = msg.tool_call_id;
        }
        out << line.dump() << "\n";
    }
    return out.str();
}

} // namespace ragent
