#pragma once

#include "ragent/conversation.hpp"
#include "ragent/tools.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace ragent {

struct ModelToolCall {
    std::string name;
    nlohmann::json arguments;
    std::string id;
};

/// Exactly one of the two variants: tool calls, or final text.
struct ModelResponse {
    std::vector<ModelToolCall> tool_calls;
    std::string text;

    bool has_tool_calls() const { return !tool_calls.empty(); }
};

enum class ToolChoice { automatic, forbid_tools, require_tool };

struct ToolChoiceDirective {
    ToolChoice mode = ToolChoice::automatic;
    std::string required_tool;

    static ToolChoiceDirective auto_choice() { return {}; }
    static ToolChoiceDirective forbid() { return {ToolChoice::forbid_tools, {}}; }
    static ToolChoiceDirective require(std::string name) {
        return {ToolChoice::require_tool, std::move(name)};
    }
};

/// Transport-level failure (connection, HTTP status). Retried by the loop.
class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A scripted client ran out of canned responses: a test-fixture defect, not
/// a model behavior. Never retried.
class ScriptExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A scripted response guard did not match the last tool result.
class ScriptGuardFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Abstract chat-with-tools interface.
class ModelClient {
public:
    virtual ~ModelClient() = default;
    virtual ModelResponse complete(const std::vector<Message>& messages,
                                   const std::vector<ToolSchema>& tool_schemas,
                                   const ToolChoiceDirective& directive) = 0;
};

struct ScriptedResponse {
    ModelResponse response;
    // When non-empty, the most recent tool message must contain this
    // substring or the script is considered off the rails.
    std::string expect_last_result_contains;
};

/// Deterministic test double that replays canned responses in order.
class ScriptedClient : public ModelClient {
public:
    explicit ScriptedClient(std::vector<ScriptedResponse> script);

    /// Parses an array of response objects:
    ///   {"text": "..."} or
    ///   {"tool_calls": [{"name": "...", "arguments": {...}}]}
    /// each optionally carrying "expect_last_result_contains".
    static ScriptedClient from_json(const nlohmann::json& responses);

    /// Script files are either a bare response array (used for every
    /// session) or {"sessions": {id: [...]}, "default": [...]}.
    static ScriptedClient for_session(const nlohmann::json& file_json,
                                      const std::string& session_id);
    static nlohmann::json load_script_file(const std::filesystem::path& path);

    ModelResponse complete(const std::vector<Message>& messages,
                           const std::vector<ToolSchema>& tool_schemas,
                           const ToolChoiceDirective& directive) override;

    std::size_t responses_consumed() const { return next_; }

private:
    std::vector<ScriptedResponse> script_;
    std::size_t next_ = 0;
    std::size_t call_counter_ = 0; // for generated tool-call ids
};

/// Chat-completions style HTTP adapter. The endpoint is a base URL such as
/// "http://localhost:8000/v1"; the API key is read from an environment
/// variable, never from flags or config values.
class HttpModelClient : public ModelClient {
public:
    HttpModelClient(std::string endpoint, std::string model,
                    std::string api_key_env = "RAGENT_API_KEY");

    ModelResponse complete(const std::vector<Message>& messages,
                           const std::vector<ToolSchema>& tool_schemas,
                           const ToolChoiceDirective& directive) override;

    // Request/response mapping, exposed for tests.
    static nlohmann::json build_request(const std::string& model,
                                        const std::vector<Message>& messages,
                                        const std::vector<ToolSchema>& tool_schemas,
                                        const ToolChoiceDirective& directive);
    static ModelResponse parse_response(const nlohmann::json& body);

private:
    std::string endpoint_;
    std::string model_;
    std::string api_key_env_;
};

} // namespace ragent
