#pragma once

#include "ragent/corpus.hpp"
#include "ragent/search.hpp"
#include "ragent/tokens.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ragent {

/// Caps and feature flags shared by the tool layer and the agent loop.
struct ToolLimits {
    bool multi_query_enabled = true;
    std::size_t multi_query_cap = 5;
    std::size_t per_query_results = 10;
    std::size_t open_window_lines = 1800;
    std::size_t find_passages_per_pattern = 2;
    std::size_t find_token_cap = 11000;
    bool semantic_find_enabled = false;
    bool summarize_enabled = true;
};

struct RefEntry {
    std::string doc_id;
    int turn = 0;
    std::string originating_query;
    std::size_t order = 0; // the n in turn{m}search{n}
};

/// Session-scoped map from reference IDs to documents. IDs follow the
/// pattern turn{m}search{n} where m is the user turn at allocation time and
/// n comes from a counter that never resets within a session.
class ReferenceRegistry {
public:
    void begin_turn(int turn) { current_turn_ = turn; }
    int current_turn() const { return current_turn_; }

    std::string allocate(const std::string& doc_id, const std::string& originating_query);

    /// nullptr when ref_id was never allocated.
    const RefEntry* find(const std::string& ref_id) const;
    std::size_t size() const { return entries_.size(); }
    std::size_t counter() const { return counter_; }
    const std::map<std::string, RefEntry>& entries() const { return entries_; }

private:
    std::map<std::string, RefEntry> entries_;
    std::size_t counter_ = 0; // first allocation yields n = 1
    int current_turn_ = 1;
};

struct ToolResult {
    std::string tool_name;
    std::set<std::string> ref_ids_mentioned;
    std::string rendered_text;
    std::size_t token_count = 0;
    bool prunable = false; // search/find/open results; never summarize or errors
    bool is_error = false;
};

struct ToolSchema {
    std::string name;
    std::string description;
    nlohmann::json parameters; // JSON-schema style

    nlohmann::json to_json() const;
};

/// The four tools with their caps, reference-ID allocation, and response
/// formatting. One harness per session; sessions over the same immutable
/// index may run concurrently.
class ToolHarness {
public:
    ToolHarness(const CorpusManifest& manifest, const SearchBackend& backend, ToolLimits limits,
                TokenCounter counter = default_token_counter());

    ToolResult search(const std::vector<std::string>& queries);
    ToolResult find(const std::string& ref_id, const std::vector<std::string>& patterns,
                    bool semantic);
    ToolResult open(const std::string& ref_id, std::optional<std::size_t> line_number);
    ToolResult summarize(const std::string& summary, const std::vector<std::string>& preserve_refs);

    /// Schemas for the currently enabled feature set.
    std::vector<ToolSchema> schemas() const;

    ReferenceRegistry& registry() { return registry_; }
    const ReferenceRegistry& registry() const { return registry_; }
    const ToolLimits& limits() const { return limits_; }

private:
    ToolResult error_result(const std::string& tool_name, const std::string& message) const;
    ToolResult make_result(std::string tool_name, std::set<std::string> refs, std::string text,
                           bool prunable) const;

    const CorpusManifest* manifest_;
    const SearchBackend* backend_;
    ToolLimits limits_;
    TokenCounter counter_;
    ReferenceRegistry registry_;
};

} // namespace ragent
