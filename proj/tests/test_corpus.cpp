#include "ragent/corpus.hpp"
#include "test_util.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <random>

namespace fs = std::filesystem;
using namespace ragent;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("ragent_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    void write(const std::string& rel, const std::string& content) const {
        fs::path p = path / rel;
        fs::create_directories(p.parent_path());
        std::ofstream out(p, std::ios::binary);
        out << content;
    }
};

} // namespace

TEST_CASE("count_tokens heuristic") {
    CHECK(count_tokens("") == 0);
    CHECK(count_tokens(std::string(4000, 'x')) == 1000);
    CHECK(count_tokens("abc") == 1);
    CHECK(count_tokens("abcd") == 1);
    CHECK(count_tokens("abcde") == 2);

    // Monotone under self-concatenation.
    std::string t = "some text of odd length!";
    CHECK(count_tokens(t + t) >= count_tokens(t));
}

TEST_CASE("split_lines round-trips and normalizes") {
    CHECK(split_lines("a\nb\nc") == std::vector<std::string>{"a", "b", "c"});
    CHECK(split_lines("a\nb\n") == std::vector<std::string>{"a", "b"}); // trailing newline
    CHECK(split_lines("a\r\nb\r\n") == std::vector<std::string>{"a", "b"});
    CHECK(split_lines("") == std::vector<std::string>{});
    CHECK(split_lines("a\n\nb") == std::vector<std::string>{"a", "", "b"});

    // join/split round-trip
    auto doc = testutil::make_doc("x", {"one", "", "three"});
    CHECK(split_lines(doc.joined_text()) == doc.lines);
}

TEST_CASE("extract_title strips heading markers and truncates") {
    CHECK(extract_title({"# My Title", "body"}, "f") == "My Title");
    CHECK(extract_title({"", "   ", "plain first line"}, "f") == "plain first line");
    CHECK(extract_title({}, "fallback.md") == "fallback.md");
    std::string longline(200, 'a');
    CHECK(extract_title({longline}, "f").size() == 120);
}

TEST_CASE("ingest_directory basics") {
    TempDir dir;
    dir.write("a.md", "# Title A\nline2\nline3\n");
    dir.write("b.txt", "only line");
    dir.write("c.pdf", "ignored");

    auto manifest = CorpusManifest::ingest_directory(dir.path, {"md", "txt"});
    REQUIRE(manifest.documents().size() == 2);
    CHECK(manifest.documents()[0].doc_id == "a.md");
    CHECK(manifest.documents()[1].doc_id == "b.txt");
    CHECK(manifest.get("a.md").total_lines == 3);
    CHECK(manifest.get("a.md").title == "Title A");
    CHECK(manifest.get("a.md").file_type == "md");
    CHECK(manifest.get("b.txt").total_lines == 1);
    CHECK(manifest.find("missing") == nullptr);
    CHECK_THROWS_AS(manifest.get("missing"), std::out_of_range);

    // Lookup is referentially stable.
    CHECK(manifest.get("a.md").joined_text() == manifest.get("a.md").joined_text());
}

TEST_CASE("ingest_directory errors and warnings") {
    TempDir dir;
    CHECK_THROWS_AS(CorpusManifest::ingest_directory(dir.path, {"md"}), IngestError);

    dir.write("bin.md", std::string("abc\0def", 7));
    dir.write("ok.md", "fine");
    auto manifest = CorpusManifest::ingest_directory(dir.path, {"md"});
    CHECK(manifest.documents().size() == 1);
    REQUIRE(manifest.warnings().size() == 1);
    CHECK(manifest.warnings()[0].find("bin.md") != std::string::npos);

    CHECK_THROWS_AS(CorpusManifest::ingest_directory(dir.path / "nope", {"md"}), IngestError);
}

TEST_CASE("large document line count") {
    TempDir dir;
    std::string content;
    for (int i = 0; i < 3000; ++i) content += "line " + std::to_string(i) + "\n";
    dir.write("big.txt", content);
    auto manifest = CorpusManifest::ingest_directory(dir.path, {"txt"});
    CHECK(manifest.get("big.txt").total_lines == 3000);
}

TEST_CASE("manifest stats recompute exactly") {
    auto manifest = CorpusManifest(
        {testutil::make_doc_text("a", "aaaa bbbb"), testutil::make_doc_text("b", "cc")});
    auto stats = manifest.stats();
    std::size_t total = 0;
    for (const auto& d : manifest.documents()) total += d.token_count;
    CHECK(stats.doc_count == 2);
    CHECK(stats.total_tokens == total);
    CHECK(stats.avg_doc_tokens == double(total) / 2.0);

    auto j = manifest.to_json();
    CHECK(j["corpus_stats"]["doc_count"] == 2);
    CHECK(j["documents"].size() == 2);
}

TEST_CASE("ingestion is deterministic") {
    TempDir dir;
    dir.write("z.md", "zzz\n");
    dir.write("sub/a.md", "aaa\n");
    auto m1 = CorpusManifest::ingest_directory(dir.path, {"md"});
    auto m2 = CorpusManifest::ingest_directory(dir.path, {"md"});
    CHECK(m1.to_json().dump() == m2.to_json().dump());
    CHECK(m1.documents()[0].doc_id == "sub/a.md"); // sorted relative paths
}
