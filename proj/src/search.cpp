#include "ragent/search.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <stdexcept>

namespace ragent {

std::vector<std::string> index_terms(std::string_view text) {
    std::vector<std::string> terms;
    std::string current;
    for (char ch : text) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            current += static_cast<char>(std::tolower(c));
        } else if (!current.empty()) {
            terms.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) terms.push_back(std::move(current));
    return terms;
}

namespace {

struct Word {
    std::size_t begin = 0; // offsets into the normalized text
    std::size_t end = 0;
    std::size_t matches = 0; // query terms this word contributes
};

std::string normalize_whitespace(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool in_space = true; // also trims leading whitespace
    for (char ch : text) {
        if (std::isspace(static_cast<unsigned char>(ch))) {
            if (!in_space) out += ' ';
            in_space = true;
        } else {
            out += ch;
            in_space = false;
        }
    }
    if (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

} // namespace

std::string extract_snippet(const Document& doc, const std::vector<std::string>& query_terms,
                            std::size_t budget) {
    const std::string text = normalize_whitespace(doc.joined_text());
    if (text.size() <= budget) return text;

    std::set<std::string> terms(query_terms.begin(), query_terms.end());

    std::vector<Word> words;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find(' ', pos);
        if (end == std::string::npos) end = text.size();
        Word w{pos, end, 0};
        for (const auto& t : index_terms(std::string_view(text).substr(pos, end - pos)))
            if (terms.count(t)) ++w.matches;
        words.push_back(w);
        pos = end + 1;
    }

    // Best window of whole words spanning at most `budget` characters.
    std::size_t best_begin = 0, best_end_word = 0, best_matches = 0;
    std::size_t lo = 0, running = 0;
    for (std::size_t hi = 0; hi < words.size(); ++hi) {
        running += words[hi].matches;
        while (lo < hi && words[hi].end - words[lo].begin > budget) {
            running -= words[lo].matches;
            ++lo;
        }
        if (words[hi].end - words[lo].begin > budget) continue; // single oversized word
        std::size_t span_matches = running;
        if (span_matches > best_matches) {
            best_matches = span_matches;
            best_begin = lo;
            best_end_word = hi;
        }
    }

    if (best_matches == 0) {
        // Fallback: head of the document, aligned to a word boundary.
        std::size_t cut = budget;
        while (cut > 0 && text[cut] != ' ') --cut;
        if (cut == 0) cut = budget;
        return text.substr(0, cut);
    }

    // Grow the winning window with following words while the budget allows.
    std::size_t end_word = best_end_word;
    while (end_word + 1 < words.size() &&
           words[end_word + 1].end - words[best_begin].begin <= budget)
        ++end_word;
    return text.substr(words[best_begin].begin, words[end_word].end - words[best_begin].begin);
}

IndexedCorpus::IndexedCorpus(const CorpusManifest& manifest, Params params)
    : manifest_(&manifest), params_(params) {
    const auto& docs = manifest.documents();
    if (docs.empty()) throw std::invalid_argument("cannot index an empty manifest");

    std::size_t total_length = 0;
    for (const auto& doc : docs) {
        std::map<std::string, std::size_t> tf;
        for (const auto& term : index_terms(doc.joined_text())) ++tf[term];
        std::size_t length = 0;
        for (const auto& [term, count] : tf) {
            postings_[term].push_back({doc.doc_id, count});
            length += count;
        }
        doc_lengths_[doc.doc_id] = length;
        total_length += length;
    }
    doc_count_ = docs.size();
    avg_doc_length_ = static_cast<double>(total_length) / static_cast<double>(doc_count_);
}

std::vector<SearchHit> IndexedCorpus::query(const std::string& text, std::size_t k) const {
    std::vector<std::string> raw_terms = index_terms(text);
    std::set<std::string> terms(raw_terms.begin(), raw_terms.end());

    const double n = static_cast<double>(doc_count_);
    std::map<std::string, double> scores;
    for (const auto& term : terms) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const auto& plist = it->second;
        const double df = static_cast<double>(plist.size());
        const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        for (const auto& posting : plist) {
            const double tf = static_cast<double>(posting.term_frequency);
            const double dl = static_cast<double>(doc_lengths_.at(posting.doc_id));
            const double norm = 1.0 - params_.b + params_.b * dl / avg_doc_length_;
            scores[posting.doc_id] += idf * tf * (params_.k1 + 1.0) / (tf + params_.k1 * norm);
        }
    }

    std::vector<SearchHit> hits;
    for (const auto& [doc_id, score] : scores) {
        if (score <= 0.0) continue;
        SearchHit hit;
        hit.doc_id = doc_id;
        hit.score = score;
        hits.push_back(std::move(hit));
    }
    std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    });
    if (hits.size() > k) hits.resize(k);

    for (auto& hit : hits) {
        const Document& doc = manifest_->get(hit.doc_id);
        hit.title = doc.title;
        hit.filename = doc.filename;
        hit.file_type = doc.file_type;
        hit.snippet = extract_snippet(doc, raw_terms, params_.snippet_budget);
    }
    return hits;
}

std::vector<SearchHit> IndexedCorpus::multi_query(const std::vector<std::string>& queries,
                                                  std::size_t per_query_k) const {
    if (queries.empty()) throw std::invalid_argument("multi_query requires at least one query");

    std::map<std::string, SearchHit> merged;
    for (const auto& q : queries) {
        for (auto& hit : query(q, per_query_k)) {
            auto it = merged.find(hit.doc_id);
            if (it == merged.end())
                merged.emplace(hit.doc_id, std::move(hit));
            else if (hit.score > it->second.score)
                it->second = std::move(hit);
        }
    }

    std::vector<SearchHit> out;
    out.reserve(merged.size());
    for (auto& [doc_id, hit] : merged) out.push_back(std::move(hit));
    std::sort(out.begin(), out.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    });
    return out;
}

} // namespace ragent
