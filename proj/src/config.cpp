#include "ragent/config.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace ragent {

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");

    RunConfig cfg;
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "max_calls") cfg.agent.max_calls = value.get<std::size_t>();
            else if (key == "token_threshold") cfg.agent.token_threshold = value.get<std::size_t>();
            else if (key == "warn_fraction") cfg.agent.warn_fraction = value.get<double>();
            else if (key == "transport_retries") cfg.agent.transport_retries = value.get<std::size_t>();
            else if (key == "multi_query_enabled") cfg.agent.limits.multi_query_enabled = value.get<bool>();
            else if (key == "multi_query_cap") cfg.agent.limits.multi_query_cap = value.get<std::size_t>();
            else if (key == "per_query_results") cfg.agent.limits.per_query_results = value.get<std::size_t>();
            else if (key == "open_window_lines") cfg.agent.limits.open_window_lines = value.get<std::size_t>();
            else if (key == "find_passages_per_pattern") cfg.agent.limits.find_passages_per_pattern = value.get<std::size_t>();
            else if (key == "find_token_cap") cfg.agent.limits.find_token_cap = value.get<std::size_t>();
            else if (key == "semantic_find_enabled") cfg.agent.limits.semantic_find_enabled = value.get<bool>();
            else if (key == "summarize_enabled") cfg.agent.limits.summarize_enabled = value.get<bool>();
            else if (key == "backend") cfg.backend = value.get<std::string>();
            else if (key == "client") cfg.client = value.get<std::string>();
            else if (key == "corpus_dir") cfg.corpus_dir = value.get<std::string>();
            else if (key == "query_file") cfg.query_file = value.get<std::string>();
            else if (key == "script_file") cfg.script_file = value.get<std::string>();
            else if (key == "output_dir") cfg.output_dir = value.get<std::string>();
            else if (key == "label") cfg.label = value.get<std::string>();
            else if (key == "baseline_label") cfg.baseline_label = value.get<std::string>();
            else if (key == "extensions") cfg.extensions = value.get<std::vector<std::string>>();
            else if (key == "single_shot") cfg.single_shot = value.get<bool>();
            else if (key == "jobs") cfg.jobs = value.get<std::size_t>();
            else if (key == "http_endpoint") cfg.http_endpoint = value.get<std::string>();
            else if (key == "http_model") cfg.http_model = value.get<std::string>();
            else if (key == "api_key_env") cfg.api_key_env = value.get<std::string>();
            else if (key == "system_prompt_file") cfg.system_prompt_file = value.get<std::string>();
            else throw ConfigError("unknown config key: " + key);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("bad value for config key '" + key + "': " + e.what());
        }
    }
    return cfg;
}

RunConfig RunConfig::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path.string());
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config file is not valid JSON: " + path.string());
    return from_json(j);
}

} // namespace ragent
