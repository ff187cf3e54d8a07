#include "ragent/model_client.hpp"

#include <httplib.h>

#include <cstdlib>
#include <fstream>

namespace ragent {

ScriptedClient::ScriptedClient(std::vector<ScriptedResponse> script)
    : script_(std::move(script)) {}

ScriptedClient ScriptedClient::from_json(const nlohmann::json& responses) {
    if (!responses.is_array())
        throw std::invalid_argument("script must be an array of responses");
    std::vector<ScriptedResponse> script;
    for (const auto& entry : responses) {
        ScriptedResponse r;
        if (entry.contains("tool_calls")) {
            for (const auto& call : entry.at("tool_calls")) {
                ModelToolCall tc;
                tc.name = call.at("name").get<std::string>();
                tc.arguments = call.value("arguments", nlohmann::json::object());
                tc.id = call.value("id", std::string());
                r.response.tool_calls.push_back(std::move(tc));
            }
        }
        r.response.text = entry.value("text", std::string());
        r.expect_last_result_contains = entry.value("expect_last_result_contains", std::string());
        script.push_back(std::move(r));
    }
    return ScriptedClient(std::move(script));
}

ScriptedClient ScriptedClient::for_session(const nlohmann::json& file_json,
                                           const std::string& session_id) {
    if (file_json.is_array()) return from_json(file_json);
    if (file_json.contains("sessions")) {
        const auto& sessions = file_json.at("sessions");
        if (sessions.contains(session_id)) return from_json(sessions.at(session_id));
    }
    if (file_json.contains("default")) return from_json(file_json.at("default"));
    throw std::invalid_argument("script file has no entry for session '" + session_id +
                                "' and no default");
}

nlohmann::json ScriptedClient::load_script_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read script file: " + path.string());
    return nlohmann::json::parse(in);
}

ModelResponse ScriptedClient::complete(const std::vector<Message>& messages,
                                       const std::vector<ToolSchema>&,
                                       const ToolChoiceDirective&) {
    if (next_ >= script_.size())
        throw ScriptExhausted("scripted client exhausted after " + std::to_string(next_) +
                              " responses");
    const ScriptedResponse& entry = script_[next_++];
    if (!entry.expect_last_result_contains.empty()) {
        std::string last_result;
        for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
            if (it->role == Role::tool) {
                last_result = it->content;
                break;
            }
        }
        if (last_result.find(entry.expect_last_result_contains) == std::string::npos)
            throw ScriptGuardFailed("guard not satisfied: expected last tool result to contain \"" +
                                    entry.expect_last_result_contains + "\"");
    }
    ModelResponse resp = entry.response;
    for (auto& call : resp.tool_calls)
        if (call.id.empty()) call.id = "call_" + std::to_string(++call_counter_);
    return resp;
}

HttpModelClient::HttpModelClient(std::string endpoint, std::string model, std::string api_key_env)
    : endpoint_(std::move(endpoint)), model_(std::move(model)),
      api_key_env_(std::move(api_key_env)) {}

nlohmann::json HttpModelClient::build_request(const std::string& model,
                                              const std::vector<Message>& messages,
                                              const std::vector<ToolSchema>& tool_schemas,
                                              const ToolChoiceDirective& directive) {
    nlohmann::json msgs = nlohmann::json::array();
    for (const auto& msg : messages) {
        nlohmann::json m = {{"role", role_name(msg.role)}, {"content", msg.content}};
        if (!msg.tool_calls.empty()) {
            nlohmann::json calls = nlohmann::json::array();
            for (const auto& call : msg.tool_calls)
                calls.push_back({{"id", call.call_id},
                                 {"type", "function"},
                                 {"function",
                                  {{"name", call.name}, {"arguments", call.arguments.dump()}}}});
            m["tool_calls"] = std::move(calls);
        }
        if (msg.role == Role::tool) m["tool_call_id"] = msg.tool_call_id;
        msgs.push_back(std::move(m));
    }

    nlohmann::json body = {{"model", model}, {"messages", std::move(msgs)}};
    if (!tool_schemas.empty() && directive.mode != ToolChoice::forbid_tools) {
        nlohmann::json tools = nlohmann::json::array();
        for (const auto& schema : tool_schemas) tools.push_back(schema.to_json());
        body["tools"] = std::move(tools);
    }
    switch (directive.mode) {
        case ToolChoice::automatic:
            body["tool_choice"] = "auto";
            break;
        case ToolChoice::forbid_tools:
            body["tool_choice"] = "none";
            break;
        case ToolChoice::require_tool:
            body["tool_choice"] = {{"type", "function"},
                                   {"function", {{"name", directive.required_tool}}}};
            break;
    }
    return body;
}

ModelResponse HttpModelClient::parse_response(const nlohmann::json& body) {
    ModelResponse resp;
    if (!body.contains("choices") || !body["choices"].is_array() || body["choices"].empty())
        throw TransportError("response has no choices: " + body.dump());
    const auto& message = body.at("choices").at(0).at("message");
    if (message.contains("tool_calls") && message.at("tool_calls").is_array()) {
        for (const auto& call : message.at("tool_calls")) {
            ModelToolCall tc;
            tc.id = call.value("id", std::string());
            tc.name = call.at("function").at("name").get<std::string>();
            const auto& args = call.at("function").at("arguments");
            tc.arguments = args.is_string()
                               ? nlohmann::json::parse(args.get<std::string>(), nullptr, false)
                               : args;
            if (tc.arguments.is_discarded()) tc.arguments = nlohmann::json::object();
            resp.tool_calls.push_back(std::move(tc));
        }
    }
    if (message.contains("content") && message.at("content").is_string())
        resp.text = message.at("content").get<std::string>();
    return resp;
}

ModelResponse HttpModelClient::complete(const std::vector<Message>& messages,
                                        const std::vector<ToolSchema>& tool_schemas,
                                        const ToolChoiceDirective& directive) {
    // Split "scheme://host:port/base" into client target and path prefix.
    std::string base = endpoint_;
    std::string path_prefix;
    auto scheme_end = base.find("://");
    auto path_start = base.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (path_start != std::string::npos) {
        path_prefix = base.substr(path_start);
        base = base.substr(0, path_start);
    }
    if (!path_prefix.empty() && path_prefix.back() == '/') path_prefix.pop_back();

    httplib::Client client(base);
    client.set_read_timeout(120, 0);

    httplib::Headers headers;
    if (const char* key = std::getenv(api_key_env_.c_str()); key && *key)
        headers.emplace("Authorization", std::string("Bearer ") + key);

    nlohmann::json request = build_request(model_, messages, tool_schemas, directive);
    auto result =
        client.Post(path_prefix + "/chat/completions", headers, request.dump(), "application/json");
    if (!result)
        throw TransportError("request failed: " + httplib::to_string(result.error()));
    if (result->status < 200 || result->status >= 300)
        throw TransportError("HTTP " + std::to_string(result->status) + ": " + result->body);

    nlohmann::json body = nlohmann::json::parse(result->body, nullptr, false);
    if (body.is_discarded()) throw TransportError("malformed response body");
    return parse_response(body);
}

} // namespace ragent
