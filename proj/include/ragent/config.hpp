#pragma once

#include "ragent/agent.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace ragent {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File-backed configuration for the CLI. Defaults match AgentConfig;
/// precedence is command-line flag > config file > built-in default.
struct RunConfig {
    AgentConfig agent;

    std::string backend = "bm25";
    std::string client = "scripted"; // scripted | http
    std::string corpus_dir;
    std::string query_file;
    std::string script_file;
    std::string output_dir = "out";
    std::string label = "run";
    std::string baseline_label;
    std::vector<std::string> extensions = {"md", "txt"};
    bool single_shot = false;
    std::size_t jobs = 1;
    std::string http_endpoint;
    std::string http_model;
    std::string api_key_env = "RAGENT_API_KEY"; // variable name only, never the key
    std::string system_prompt_file;

    /// Rejects unknown keys with a ConfigError naming the offender.
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load_file(const std::filesystem::path& path);
};

} // namespace ragent
