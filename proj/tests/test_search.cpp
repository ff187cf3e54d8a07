#include "ragent/search.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

using namespace ragent;
using ragent::testutil::make_doc_text;

namespace {

// Independent brute-force BM25 oracle: iterates every document with the
// textbook formula, no inverted index. Kept separate from the
// implementation on purpose.
struct OracleHit {
    std::string doc_id;
    double score;
};

std::vector<OracleHit> oracle_bm25(const CorpusManifest& manifest, const std::string& query,
                                   double k1 = 1.2, double b = 0.75) {
    const auto& docs = manifest.documents();
    std::map<std::string, std::vector<std::string>> doc_terms;
    double total_len = 0.0;
    for (const auto& d : docs) {
        doc_terms[d.doc_id] = index_terms(d.joined_text());
        total_len += static_cast<double>(doc_terms[d.doc_id].size());
    }
    const double n = static_cast<double>(docs.size());
    const double avg_len = total_len / n;

    std::set<std::string> qterms;
    for (const auto& t : index_terms(query)) qterms.insert(t);

    std::vector<OracleHit> hits;
    for (const auto& d : docs) {
        const auto& terms = doc_terms[d.doc_id];
        double score = 0.0;
        for (const auto& q : qterms) {
            std::size_t tf = 0;
            for (const auto& t : terms)
                if (t == q) ++tf;
            if (tf == 0) continue;
            std::size_t df = 0;
            for (const auto& other : docs) {
                for (const auto& t : doc_terms[other.doc_id])
                    if (t == q) {
                        ++df;
                        break;
                    }
            }
            const double idf =
                std::log(1.0 + (n - static_cast<double>(df) + 0.5) / (static_cast<double>(df) + 0.5));
            const double dl = static_cast<double>(terms.size());
            score += idf * static_cast<double>(tf) * (k1 + 1.0) /
                     (static_cast<double>(tf) + k1 * (1.0 - b + b * dl / avg_len));
        }
        if (score > 0.0) hits.push_back({d.doc_id, score});
    }
    std::sort(hits.begin(), hits.end(), [](const OracleHit& a, const OracleHit& c) {
        if (a.score != c.score) return a.score > c.score;
        return a.doc_id < c.doc_id;
    });
    return hits;
}

CorpusManifest random_corpus(std::mt19937& rng) {
    static const std::vector<std::string> vocab = {
        "cat",  "dog",   "fish",  "bird", "tree",  "rock", "river", "cloud",
        "wind", "stone", "light", "dark", "fast",  "slow", "red",   "blue",
        "iron", "gold",  "salt",  "sand", "paper", "wire", "glass", "wood"};
    std::uniform_int_distribution<std::size_t> ndocs(2, 20);
    std::uniform_int_distribution<std::size_t> nwords(3, 60);
    std::uniform_int_distribution<std::size_t> word(0, vocab.size() - 1);

    std::vector<Document> docs;
    const std::size_t count = ndocs(rng);
    for (std::size_t i = 0; i < count; ++i) {
        std::string text;
        const std::size_t len = nwords(rng);
        for (std::size_t w = 0; w < len; ++w) {
            if (w) text += ' ';
            text += vocab[word(rng)];
        }
        docs.push_back(make_doc_text("doc" + std::to_string(i), text));
    }
    return CorpusManifest(std::move(docs));
}

} // namespace

TEST_CASE("index_terms lowercases and splits on non-alphanumerics") {
    CHECK(index_terms("Hello, World! 42") == std::vector<std::string>{"hello", "world", "42"});
    CHECK(index_terms("foo-bar_baz") == std::vector<std::string>{"foo", "bar", "baz"});
    CHECK(index_terms("") == std::vector<std::string>{});
}

TEST_CASE("build_index basics") {
    CorpusManifest manifest({make_doc_text("a", "cat sat"), make_doc_text("b", "cat ran")});
    IndexedCorpus index(manifest);
    CHECK(index.doc_count() == 2);
    CHECK(index.avg_doc_length() == 2.0);

    auto hits = index.query("cat", 10);
    CHECK(hits.size() == 2);
    auto sat = index.query("sat", 10);
    REQUIRE(sat.size() == 1);
    CHECK(sat[0].doc_id == "a");

    CorpusManifest empty;
    CHECK_THROWS_AS(IndexedCorpus{empty}, std::invalid_argument);
}

TEST_CASE("query with no term overlap returns empty") {
    CorpusManifest manifest({make_doc_text("a", "cat sat")});
    IndexedCorpus index(manifest);
    CHECK(index.query("zebra quantum", 5).empty());
}

TEST_CASE("query respects k and fills hit metadata") {
    std::vector<Document> docs;
    for (int i = 0; i < 30; ++i)
        docs.push_back(make_doc_text("d" + std::to_string(i), "shared term plus filler"));
    CorpusManifest manifest(std::move(docs));
    IndexedCorpus index(manifest);
    auto hits = index.query("shared", 10);
    CHECK(hits.size() == 10);
    for (const auto& h : hits) {
        CHECK(!h.title.empty());
        CHECK(!h.snippet.empty());
        CHECK(h.file_type == "txt");
    }
}

TEST_CASE("BM25 matches the brute-force oracle on random corpora") {
    std::mt19937 rng(20250823);
    for (int trial = 0; trial < 50; ++trial) {
        auto manifest = random_corpus(rng);
        IndexedCorpus index(manifest);
        for (const std::string& query : {"cat river gold", "wind", "paper glass salt sand"}) {
            auto expected = oracle_bm25(manifest, query);
            auto actual = index.query(query, manifest.documents().size());
            REQUIRE(actual.size() == expected.size());
            for (std::size_t i = 0; i < actual.size(); ++i) {
                CHECK(actual[i].doc_id == expected[i].doc_id);
                CHECK(std::abs(actual[i].score - expected[i].score) <= 1e-9);
            }
        }
    }
}

TEST_CASE("adding a term-disjoint document only shifts scores through corpus stats") {
    CorpusManifest small({make_doc_text("a", "cat sat on the mat"),
                          make_doc_text("b", "dog ran in the park")});
    CorpusManifest bigger({make_doc_text("a", "cat sat on the mat"),
                           make_doc_text("b", "dog ran in the park"),
                           make_doc_text("c", "zebra quantum flux")});
    IndexedCorpus i1(small), i2(bigger);
    // Oracle recomputation agrees on both corpora: the new doc matters only
    // through doc_count / avg_doc_length.
    for (const auto* m : {&small, &bigger}) {
        auto index = (m == &small) ? &i1 : &i2;
        auto expected = oracle_bm25(*m, "cat mat");
        auto actual = index->query("cat mat", 10);
        REQUIRE(actual.size() == expected.size());
        for (std::size_t i = 0; i < actual.size(); ++i)
            CHECK(std::abs(actual[i].score - expected[i].score) <= 1e-9);
    }
    // Same hit set either way.
    CHECK(i1.query("cat mat", 10).size() == i2.query("cat mat", 10).size());
}

TEST_CASE("multi_query dedups keeping the max score") {
    CorpusManifest manifest({make_doc_text("a", "alpha alpha alpha beta"),
                             make_doc_text("b", "alpha gamma"),
                             make_doc_text("c", "beta beta delta")});
    IndexedCorpus index(manifest);

    SUBCASE("duplicate query equals single query") {
        auto once = index.multi_query({"alpha"}, 10);
        auto twice = index.multi_query({"alpha", "alpha"}, 10);
        REQUIRE(once.size() == twice.size());
        for (std::size_t i = 0; i < once.size(); ++i) {
            CHECK(once[i].doc_id == twice[i].doc_id);
            CHECK(once[i].score == twice[i].score);
        }
    }

    SUBCASE("disjoint result sets union") {
        auto merged = index.multi_query({"gamma", "delta"}, 10);
        CHECK(merged.size() == 2);
    }

    SUBCASE("max-merge on overlap, hand-computed") {
        // Doc "a" is hit by both queries; its merged score must be the max
        // of the two per-query scores.
        auto q1 = index.query("alpha", 10);
        auto q2 = index.query("beta", 10);
        double a1 = 0, a2 = 0;
        for (const auto& h : q1)
            if (h.doc_id == "a") a1 = h.score;
        for (const auto& h : q2)
            if (h.doc_id == "a") a2 = h.score;
        REQUIRE(a1 > 0);
        REQUIRE(a2 > 0);
        auto merged = index.multi_query({"alpha", "beta"}, 10);
        double merged_a = 0;
        std::size_t seen_a = 0;
        for (const auto& h : merged)
            if (h.doc_id == "a") {
                merged_a = h.score;
                ++seen_a;
            }
        CHECK(seen_a == 1);
        CHECK(merged_a == std::max(a1, a2));
    }

    SUBCASE("size bound") {
        auto merged = index.multi_query({"alpha", "beta", "gamma"}, 10);
        CHECK(merged.size() <= 3 * 10);
        CHECK_THROWS_AS(index.multi_query({}, 10), std::invalid_argument);
    }
}

TEST_CASE("snippets") {
    std::string head(400, 'h');
    auto doc = make_doc_text("a", head + "\nfiller words here\nthe special marker sits here\n");

    SUBCASE("contains the matched term") {
        auto s = extract_snippet(doc, {"marker"}, 60);
        CHECK(s.find("marker") != std::string::npos);
        CHECK(s.size() <= 60);
    }
    SUBCASE("fallback to head when no term occurs") {
        auto s = extract_snippet(doc, {"absent"}, 300);
        CHECK(s.size() <= 300);
        CHECK(s.substr(0, 5) == "hhhhh");
    }
    SUBCASE("budget bound holds") {
        for (std::size_t budget : {30, 100, 300}) {
            auto s = extract_snippet(doc, {"special", "marker"}, budget);
            CHECK(s.size() <= budget);
        }
    }
    SUBCASE("snippet is a contiguous substring of normalized text") {
        auto s = extract_snippet(doc, {"marker"}, 80);
        // Normalized doc text: lines joined by single spaces.
        std::string normalized = head + " filler words here the special marker sits here";
        CHECK(normalized.find(s) != std::string::npos);
    }
}

TEST_CASE("query determinism") {
    std::mt19937 rng(7);
    auto manifest = random_corpus(rng);
    IndexedCorpus i1(manifest), i2(manifest);
    auto h1 = i1.query("cat dog tree", 10);
    auto h2 = i2.query("cat dog tree", 10);
    REQUIRE(h1.size() == h2.size());
    for (std::size_t i = 0; i < h1.size(); ++i) {
        CHECK(h1[i].doc_id == h2[i].doc_id);
        CHECK(h1[i].score == h2[i].score);
        CHECK(h1[i].snippet == h2[i].snippet);
    }
}
