#pragma once

#include "ragent/corpus.hpp"

#include <map>
#include <string>
#include <vector>

namespace ragent {

struct SearchHit {
    std::string doc_id;
    double score = 0.0;
    std::string snippet;
    std::string title;
    std::string filename;
    std::string file_type;
};

/// Backend contract the search tool delegates to. An alternate backend (for
/// example a remote search service) can be plugged in here without touching
/// the tool layer.
class SearchBackend {
public:
    virtual ~SearchBackend() = default;

    /// Ranked hits, at most k, scores non-increasing.
    virtual std::vector<SearchHit> query(const std::string& text, std::size_t k) const = 0;

    virtual bool supports_semantic_find() const { return false; }

    /// Optional semantic passage scorer: line numbers of the best-matching
    /// lines for `pattern` in `doc`, best first. Only meaningful when
    /// supports_semantic_find() is true.
    virtual std::vector<std::size_t> semantic_find_lines(const Document& doc,
                                                         const std::string& pattern) const {
        (void)doc;
        (void)pattern;
        return {};
    }
};

/// Lowercase alphanumeric word extraction used for both indexing and queries.
std::vector<std::string> index_terms(std::string_view text);

/// Highest-term-density window of at most `budget` characters over the
/// whitespace-normalized document text, aligned to word boundaries. Falls
/// back to the document head when no query term occurs.
std::string extract_snippet(const Document& doc, const std::vector<std::string>& query_terms,
                            std::size_t budget);

/// Reference BM25 index. Immutable after construction; the manifest must
/// outlive the index.
class IndexedCorpus : public SearchBackend {
public:
    struct Params {
        double k1 = 1.2;
        double b = 0.75;
        std::size_t snippet_budget = 300;
    };

    explicit IndexedCorpus(const CorpusManifest& manifest) : IndexedCorpus(manifest, Params()) {}
    IndexedCorpus(const CorpusManifest& manifest, Params params);

    std::vector<SearchHit> query(const std::string& text, std::size_t k) const override;

    /// Union of per-query results with doc_id duplicates collapsed keeping
    /// the maximum score; sorted by score descending, ties by ascending
    /// doc_id.
    std::vector<SearchHit> multi_query(const std::vector<std::string>& queries,
                                       std::size_t per_query_k) const;

    std::size_t doc_count() const { return doc_count_; }
    double avg_doc_length() const { return avg_doc_length_; }
    const Params& params() const { return params_; }

private:
    struct Posting {
        std::string doc_id;
        std::size_t term_frequency = 0;
    };

    const CorpusManifest* manifest_;
    Params params_;
    std::map<std::string, std::vector<Posting>> postings_;
    std::map<std::string, std::size_t> doc_lengths_; // in index terms
    double avg_doc_length_ = 0.0;
    std::size_t doc_count_ = 0;
};

} // namespace ragent
