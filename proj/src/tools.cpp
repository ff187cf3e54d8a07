#include "ragent/tools.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace ragent {

std::string ReferenceRegistry::allocate(const std::string& doc_id,
                                        const std::string& originating_query) {
    ++counter_;
    std::string ref_id = "turn" + std::to_string(current_turn_) + "search" + std::to_string(counter_);
    entries_[ref_id] = RefEntry{doc_id, current_turn_, originating_query, counter_};
    return ref_id;
}

const RefEntry* ReferenceRegistry::find(const std::string& ref_id) const {
    auto it = entries_.find(ref_id);
    return it == entries_.end() ? nullptr : &it->second;
}

nlohmann::json ToolSchema::to_json() const {
    return {{"type", "function"},
            {"function",
             {{"name", name}, {"description", description}, {"parameters", parameters}}}};
}

namespace {

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += sep;
        out += parts[i];
    }
    return out;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// Dedup key for find passages: lowercased, whitespace-collapsed body.
std::string normalized_content(const std::string& text) {
    std::string out;
    bool in_space = true;
    for (char ch : text) {
        if (std::isspace(static_cast<unsigned char>(ch))) {
            if (!in_space) out += ' ';
            in_space = true;
        } else {
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
            in_space = false;
        }
    }
    return out;
}

constexpr std::size_t kFindContextRadius = 3; // lines of context on each side

struct Passage {
    std::size_t first_line = 0;
    std::size_t last_line = 0;
    std::string body; // line-number labelled text
};

Passage build_passage(const Document& doc, std::size_t match_line) {
    Passage p;
    p.first_line = match_line > kFindContextRadius ? match_line - kFindContextRadius : 0;
    p.last_line = std::min(match_line + kFindContextRadius, doc.total_lines - 1);
    std::ostringstream body;
    for (std::size_t i = p.first_line; i <= p.last_line; ++i)
        body << i << ": " << doc.lines[i] << "\n";
    p.body = body.str();
    return p;
}

} // namespace

ToolHarness::ToolHarness(const CorpusManifest& manifest, const SearchBackend& backend,
                         ToolLimits limits, TokenCounter counter)
    : manifest_(&manifest), backend_(&backend), limits_(limits), counter_(std::move(counter)) {}

ToolResult ToolHarness::error_result(const std::string& tool_name, const std::string& message) const {
    ToolResult r;
    r.tool_name = tool_name;
    r.rendered_text = "Error: " + message;
    r.token_count = counter_(r.rendered_text);
    r.prunable = false;
    r.is_error = true;
    return r;
}

ToolResult ToolHarness::make_result(std::string tool_name, std::set<std::string> refs,
                                    std::string text, bool prunable) const {
    ToolResult r;
    r.tool_name = std::move(tool_name);
    r.ref_ids_mentioned = std::move(refs);
    r.token_count = counter_(text);
    r.rendered_text = std::move(text);
    r.prunable = prunable;
    return r;
}

ToolResult ToolHarness::search(const std::vector<std::string>& queries) {
    std::vector<std::string> cleaned;
    for (const auto& q : queries) cleaned.push_back(trim(q));
    if (cleaned.empty()) return error_result("search", "search requires at least one query");
    for (const auto& q : cleaned)
        if (q.empty()) return error_result("search", "empty query");

    const std::size_t cap = limits_.multi_query_enabled ? limits_.multi_query_cap : 1;
    if (cleaned.size() > cap) {
        if (!limits_.multi_query_enabled)
            return error_result("search",
                                "multi-query search is disabled; provide exactly one query");
        return error_result("search",
                            "too many queries (max " + std::to_string(cap) + ")");
    }

    std::vector<SearchHit> hits;
    for (const auto& q : cleaned) {
        for (auto& hit : backend_->query(q, limits_.per_query_results)) {
            auto dup = std::find_if(hits.begin(), hits.end(), [&](const SearchHit& h) {
                return h.doc_id == hit.doc_id;
            });
            if (dup == hits.end())
                hits.push_back(std::move(hit));
            else if (hit.score > dup->score)
                *dup = std::move(hit);
        }
    }
    std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    });

    const std::string origin = join(cleaned, "; ");
    std::set<std::string> refs;
    std::ostringstream out;
    for (const auto& hit : hits) {
        std::string ref_id = registry_.allocate(hit.doc_id, origin);
        refs.insert(ref_id);
        out << "[" << ref_id << "] " << hit.title << "\n"
            << "  file: " << hit.filename << " (" << hit.file_type << ")\n"
            << "  snippet: " << hit.snippet << "\n\n";
    }
    out << hits.size() << " result" << (hits.size() == 1 ? "" : "s");
    return make_result("search", std::move(refs), out.str(), /*prunable=*/true);
}

ToolResult ToolHarness::find(const std::string& ref_id, const std::vector<std::string>& patterns,
                             bool semantic) {
    const RefEntry* entry = registry_.find(ref_id);
    if (!entry) return error_result("find", "unknown reference id: " + ref_id);
    if (patterns.empty()) return error_result("find", "find requires at least one pattern");
    const Document& doc = manifest_->get(entry->doc_id);

    std::string prefix;
    bool use_semantic = semantic;
    if (semantic && !backend_->supports_semantic_find()) {
        prefix = "[semantic find unavailable on this backend; using lexical matching]\n";
        use_semantic = false;
    }

    std::vector<std::string> blocks;       // one per passage or miss notice
    std::set<std::string> seen;            // normalized passage contents
    std::vector<std::string> missed;
    for (const auto& pattern : patterns) {
        std::vector<std::size_t> match_lines;
        if (use_semantic) {
            match_lines = backend_->semantic_find_lines(doc, pattern);
        } else {
            const std::string needle = lowercase(pattern);
            for (std::size_t i = 0; i < doc.lines.size(); ++i)
                if (lowercase(doc.lines[i]).find(needle) != std::string::npos)
                    match_lines.push_back(i);
        }
        if (match_lines.empty()) {
            missed.push_back(pattern);
            continue;
        }
        std::size_t taken = 0;
        for (std::size_t line : match_lines) {
            if (taken >= limits_.find_passages_per_pattern) break;
            Passage p = build_passage(doc, line);
            if (!seen.insert(normalized_content(p.body)).second) continue;
            std::ostringstream block;
            block << "Pattern \"" << pattern << "\" [lines " << p.first_line << "-" << p.last_line
                  << "]:\n"
                  << p.body;
            blocks.push_back(block.str());
            ++taken;
        }
    }

    if (blocks.empty()) {
        std::string text = prefix + "no matches for: " + join(patterns, ", ");
        return make_result("find", {ref_id}, std::move(text), /*prunable=*/true);
    }

    static const std::string kTruncNotice = "[output truncated at find token limit]";
    const std::size_t reserve = counter_(kTruncNotice) + 1;

    std::ostringstream header;
    header << prefix << "Matches in " << ref_id << " (" << doc.filename << "):\n\n";
    std::string text = header.str();
    bool truncated = false;
    for (const auto& block : blocks) {
        if (counter_(text + block) + reserve > limits_.find_token_cap) {
            truncated = true;
            break;
        }
        text += block;
        text += "\n";
    }
    for (const auto& miss : missed) text += "no matches for: " + miss + "\n";
    if (truncated) text += kTruncNotice;
    // The miss notices are short, but re-check the cap end to end.
    while (counter_(text) > limits_.find_token_cap && text.size() > 4)
        text.resize(text.size() - 4);

    return make_result("find", {ref_id}, std::move(text), /*prunable=*/true);
}

ToolResult ToolHarness::open(const std::string& ref_id, std::optional<std::size_t> line_number) {
    const RefEntry* entry = registry_.find(ref_id);
    if (!entry) return error_result("open", "unknown reference id: " + ref_id);
    const Document& doc = manifest_->get(entry->doc_id);

    const std::size_t start = line_number.value_or(0);
    if (start >= doc.total_lines)
        return error_result("open", "line number " + std::to_string(start) +
                                        " beyond document end (" +
                                        std::to_string(doc.total_lines) + " lines)");

    const std::size_t end = std::min(start + limits_.open_window_lines, doc.total_lines);
    std::ostringstream out;
    out << "Viewing lines [" << start << "-" << end - 1 << "] of " << doc.total_lines
        << " lines\n";
    for (std::size_t i = start; i < end; ++i) out << i << ": " << doc.lines[i] << "\n";
    return make_result("open", {ref_id}, out.str(), /*prunable=*/true);
}

ToolResult ToolHarness::summarize(const std::string& summary,
                                  const std::vector<std::string>& preserve_refs) {
    std::set<std::string> preserved;
    std::vector<std::string> dropped;
    for (const auto& ref : preserve_refs) {
        if (registry_.find(ref))
            preserved.insert(ref);
        else
            dropped.push_back(ref);
    }

    std::ostringstream out;
    out << "Summary:\n" << summary << "\n\nPreserved references: ";
    if (preserved.empty()) {
        out << "(none)";
    } else {
        out << join(std::vector<std::string>(preserved.begin(), preserved.end()), ", ");
    }
    if (!dropped.empty()) out << "\nUnknown reference ids dropped: " << join(dropped, ", ");

    return make_result("summarize", std::move(preserved), out.str(), /*prunable=*/false);
}

std::vector<ToolSchema> ToolHarness::schemas() const {
    std::vector<ToolSchema> out;

    ToolSchema search;
    search.name = "search";
    if (limits_.multi_query_enabled) {
        search.description =
            "Discover relevant documents from the entire corpus. First choice for any "
            "query you cannot answer from context; use it to verify details rather than "
            "assuming. Accepts up to " +
            std::to_string(limits_.multi_query_cap) +
            " query reformulations in one call; results are combined and deduplicated, up to " +
            std::to_string(limits_.per_query_results) +
            " per query, each with a reference id, snippet, title, filename, and file type.";
        search.parameters = {
            {"type", "object"},
            {"properties",
             {{"queries",
               {{"type", "array"},
                {"items", {{"type", "string"}}},
                {"maxItems", limits_.multi_query_cap},
                {"description", "Search queries; reformulations of the information need."}}}}},
            {"required", {"queries"}}};
    } else {
        search.description =
            "Discover relevant documents from the entire corpus. First choice for any "
            "query you cannot answer from context. Accepts exactly one query per call and "
            "returns up to " +
            std::to_string(limits_.per_query_results) +
            " results, each with a reference id, snippet, title, filename, and file type.";
        search.parameters = {
            {"type", "object"},
            {"properties",
             {{"queries",
               {{"type", "array"},
                {"items", {{"type", "string"}}},
                {"maxItems", 1},
                {"description", "A single search query."}}}}},
            {"required", {"queries"}}};
    }
    out.push_back(std::move(search));

    ToolSchema find;
    find.name = "find";
    find.description =
        "Locate specific information inside a single document from earlier search results. "
        "Use it when snippets are not enough and you know what to look for. Matching is "
        "case-insensitive substring matching; returns up to " +
        std::to_string(limits_.find_passages_per_pattern) +
        " passages per pattern with surrounding context, bounded in total size.";
    nlohmann::json find_props = {
        {"reference_id",
         {{"type", "string"}, {"description", "Reference id from a previous search result."}}},
        {"patterns",
         {{"type", "array"},
          {"items", {{"type", "string"}}},
          {"description", "Keyword patterns to locate in the document."}}}};
    if (limits_.semantic_find_enabled)
        find_props["semantic"] = {
            {"type", "boolean"},
            {"description", "Use the backend's semantic passage scorer instead of lexical matching."}};
    find.parameters = {{"type", "object"},
                       {"properties", find_props},
                       {"required", {"reference_id", "patterns"}}};
    out.push_back(std::move(find));

    ToolSchema open;
    open.name = "open";
    open.description =
        "Retrieve windowed full content from a single document. Use it when snippets are "
        "insufficient and you know where to read. Returns up to " +
        std::to_string(limits_.open_window_lines) +
        " line-numbered lines starting at line_number (default 0); call again with a "
        "later line number to read further.";
    open.parameters = {
        {"type", "object"},
        {"properties",
         {{"reference_id",
           {{"type", "string"}, {"description", "Reference id from a previous search result."}}},
          {"line_number",
           {{"type", "integer"},
            {"minimum", 0},
            {"description", "Zero-based line to start the window at."}}}}},
        {"required", {"reference_id"}}};
    out.push_back(std::move(open));

    if (limits_.summarize_enabled) {
        ToolSchema summarize;
        summarize.name = "summarize";
        summarize.description =
            "Record your current reasoning and designate which reference ids to keep. Tool "
            "results not associated with preserved references are pruned from the "
            "conversation to free budget. Call this when you receive a context budget "
            "warning.";
        summarize.parameters = {
            {"type", "object"},
            {"properties",
             {{"summary",
               {{"type", "string"}, {"description", "Your findings and reasoning so far."}}},
              {"preserve_refs",
               {{"type", "array"},
                {"items", {{"type", "string"}}},
                {"description", "Reference ids whose tool results must be kept."}}}}},
            {"required", {"summary"}}};
        out.push_back(std::move(summarize));
    }

    return out;
}

} // namespace ragent
