#pragma once

#include "ragent/tokens.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace ragent {

class IngestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A line-addressed text document. Lines are newline-stripped; a trailing
/// newline in the source file does not produce an empty final line.
struct Document {
    std::string doc_id;    // path relative to the corpus root
    std::string title;     // first non-empty line (heading markers stripped), else filename
    std::string filename;
    std::string file_type; // lowercase extension without the dot
    std::vector<std::string> lines;
    std::size_t total_lines = 0;
    std::size_t token_count = 0;

    std::string joined_text() const;
};

struct CorpusStats {
    std::size_t doc_count = 0;
    std::size_t total_tokens = 0;
    double avg_doc_tokens = 0.0;
};

/// Immutable after construction; safe for concurrent reads.
class CorpusManifest {
public:
    CorpusManifest() = default;
    explicit CorpusManifest(std::vector<Document> documents,
                            std::vector<std::string> warnings = {});

    /// Walks `root` and ingests every readable text file whose extension is
    /// in `extensions` (lowercase, no dot). Files are visited in sorted
    /// relative-path order so repeated ingestion is deterministic.
    /// Throws IngestError when no file matches.
    static CorpusManifest ingest_directory(const std::filesystem::path& root,
                                           const std::set<std::string>& extensions,
                                           const TokenCounter& counter = default_token_counter());

    const std::vector<Document>& documents() const { return documents_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    /// nullptr when doc_id is unknown.
    const Document* find(const std::string& doc_id) const;
    /// Throwing variant of find().
    const Document& get(const std::string& doc_id) const;

    CorpusStats stats() const;
    nlohmann::json to_json() const;

private:
    std::vector<Document> documents_;
    std::vector<std::string> warnings_;
};

/// Splits on '\n' after normalizing "\r\n"; a single trailing newline is
/// normalized away so join/split round-trips.
std::vector<std::string> split_lines(std::string_view text);

/// First non-empty line with markdown heading markers stripped, truncated to
/// 120 characters; falls back to `fallback`.
std::string extract_title(const std::vector<std::string>& lines, const std::string& fallback);

} // namespace ragent
