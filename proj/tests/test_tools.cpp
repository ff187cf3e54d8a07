#include "ragent/tools.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <regex>

using namespace ragent;
using ragent::testutil::make_doc;
using ragent::testutil::make_doc_text;

namespace {

CorpusManifest small_corpus() {
    std::vector<std::string> report;
    for (int i = 0; i < 200; ++i) {
        if (i == 42 || i == 44 || i == 90 || i == 120 || i == 150)
            report.push_back("Revenue grew in period " + std::to_string(i));
        else
            report.push_back("filler content line " + std::to_string(i));
    }
    return CorpusManifest({make_doc_text("alpha.md", "# Alpha notes\ncats and dogs here\n"),
                           make_doc_text("beta.md", "# Beta notes\ncats only here\n"),
                           make_doc("report.txt", report)});
}

} // namespace

TEST_CASE("reference registry allocation law") {
    ReferenceRegistry reg;
    reg.begin_turn(1);
    CHECK(reg.allocate("a", "q") == "turn1search1");
    CHECK(reg.allocate("b", "q") == "turn1search2");
    reg.begin_turn(2);
    CHECK(reg.allocate("a", "q2") == "turn2search3"); // counter never resets

    const RefEntry* e = reg.find("turn2search3");
    REQUIRE(e != nullptr);
    CHECK(e->doc_id == "a");
    CHECK(e->turn == 2);
    CHECK(e->order == 3);
    CHECK(reg.find("turn9search9") == nullptr);
}

TEST_CASE("tool_search allocates refs and renders hits") {
    auto manifest = small_corpus();
    IndexedCorpus index(manifest);
    ToolHarness harness(manifest, index, ToolLimits{});

    auto result = harness.search({"cats"});
    CHECK(!result.is_error);
    CHECK(result.prunable);
    CHECK(result.token_count == count_tokens(result.rendered_text));
    CHECK(result.ref_ids_mentioned.size() == 2);
    CHECK(result.rendered_text.find("[turn1search1]") != std::string::npos);
    CHECK(result.rendered_text.find("[turn1search2]") != std::string::npos);
    CHECK(result.rendered_text.find("2 results") != std::string::npos);
    CHECK(result.rendered_text.find("file: alpha.md (txt)") != std::string::npos);
    CHECK(result.rendered_text.find("snippet: ") != std::string::npos);
}

TEST_CASE("tool_search cap enforcement") {
    auto manifest = small_corpus();
    IndexedCorpus index(manifest);
    ToolHarness harness(manifest, index, ToolLimits{});

    auto err = harness.search({"a", "b", "c", "d", "e", "f"});
    CHECK(err.is_error);
    CHECK(err.rendered_text.find("too many queries (max 5)") != std::string::npos);
    CHECK(harness.registry().size() == 0); // registry untouched on error

    CHECK(harness.search({}).is_error);
    CHECK(harness.search({"  "}).is_error);

    ToolLimits single;
    single.multi_query_enabled = false;
    ToolHarness h2(manifest, index, single);
    auto err2 = h2.search({"a", "b"});
    CHECK(err2.is_error);
    CHECK(err2.rendered_text.find("multi-query search is disabled") != std::string::npos);
    CHECK(!h2.search({"cats"}).is_error);
}

TEST_CASE("search across turns continues the global counter") {
    auto manifest = small_corpus();
    IndexedCorpus index(manifest);
    ToolHarness harness(manifest, index, ToolLimits{});

    auto r1 = harness.search({"cats"});
    CHECK(r1.ref_ids_mentioned.count("turn1search1") == 1);
    harness.registry().begin_turn(2);
    auto r2 = harness.search({"cats"});
    CHECK(r2.ref_ids_mentioned.count("turn2search3") == 1);
    CHECK(r2.ref_ids_mentioned.count("turn2search4") == 1);
}

TEST_CASE("tool_find basics") {
    auto manifest = small_corpus();
    IndexedCorpus index(manifest);
    ToolHarness harness(manifest, index, ToolLimits{});
    auto search = harness.search({"revenue"});
    REQUIRE(search.ref_ids_mentioned.size() == 1);
    const std::string ref = *search.ref_ids_mentioned.begin();

    SUBCASE("passage cap per pattern") {
        auto result = harness.find(ref, {"Revenue"}, false);
        CHECK(!result.is_error);
        // 5 matching lines but at most 2 passages.
        std::size_t passages = 0;
        std::string::size_type pos = 0;
        while ((pos = result.rendered_text.find("[lines ", pos)) != std::string::npos) {
            ++passages;
            ++pos;
        }
        CHECK(passages == 2);
        CHECK(result.rendered_text.find("42: Revenue grew in period 42") != std::string::npos);
    }

    SUBCASE("case-insensitive and content-deduplicated") {
        auto result = harness.find(ref, {"REVENUE GREW IN PERIOD 90", "revenue grew in period 90"},
                                   false);
        std::size_t passages = 0;
        std::string::size_type pos = 0;
        while ((pos = result.rendered_text.find("[lines ", pos)) != std::string::npos) {
            ++passages;
            ++pos;
        }
        CHECK(passages == 1);
    }

    SUBCASE("no matches is a non-error result") {
        auto result = harness.find(ref, {"unicorn"}, false);
        CHECK(!result.is_error);
        CHECK(result.prunable);
        CHECK(result.rendered_text.find("no matches for: unicorn") != std::string::npos);
    }

    SUBCASE("unknown ref is an error and leaves the registry alone") {
        auto before = harness.registry().counter();
        auto result = harness.find("turn7search7", {"x"}, false);
        CHECK(result.is_error);
        CHECK(result.rendered_text.find("unknown reference id") != std::string::npos);
        CHECK(harness.registry().counter() == before);
    }

    SUBCASE("semantic falls back to lexical with a notice") {
        auto result = harness.find(ref, {"Revenue"}, true);
        CHECK(!result.is_error);
        CHECK(result.rendered_text.find("semantic find unavailable") != std::string::npos);
        CHECK(result.rendered_text.find("Revenue grew") != std::string::npos);
    }
}

TEST_CASE("tool_find respects the token cap on adversarial input") {
    // Every line matches the pattern in a 50k-line document.
    std::vector<std::string> lines;
    lines.reserve(50000);
    for (int i = 0; i < 50000; ++i)
        lines.push_back("needle padding text for line number " + std::to_string(i) +
                        " with extra words to bulk up the passage size considerably");
    CorpusManifest manifest({make_doc("huge.txt", std::move(lines))});
    IndexedCorpus index(manifest);

    ToolLimits limits;
    limits.find_passages_per_pattern = 100000; // force the token cap to bind
    ToolHarness harness(manifest, index, limits);
    auto search = harness.search({"needle"});
    const std::string ref = *search.ref_ids_mentioned.begin();

    auto result = harness.find(ref, {"needle"}, false);
    CHECK(!result.is_error);
    CHECK(result.token_count <= limits.find_token_cap);
    CHECK(result.token_count == count_tokens(result.rendered_text));
    CHECK(result.rendered_text.find("[output truncated at find token limit]") !=
          std::string::npos);
}

TEST_CASE("tool_open window and header") {
    std::vector<std::string> lines;
    for (int i = 0; i < 3000; ++i) lines.push_back("content " + std::to_string(i));
    CorpusManifest manifest({make_doc("big.txt", std::move(lines))});
    IndexedCorpus index(manifest);
    ToolHarness harness(manifest, index, ToolLimits{});
    auto search = harness.search({"content"});
    const std::string ref = *search.ref_ids_mentioned.begin();

    SUBCASE("default window from line 0") {
        auto result = harness.open(ref, std::nullopt);
        CHECK(result.rendered_text.rfind("Viewing lines [0-1799] of 3000 lines\n", 0) == 0);
        CHECK(result.rendered_text.find("\n1799: content 1799\n") != std::string::npos);
        CHECK(result.rendered_text.find("1800: content 1800") == std::string::npos);
    }
    SUBCASE("window from an offset") {
        auto result = harness.open(ref, 1800);
        CHECK(result.rendered_text.rfind("Viewing lines [1800-2999] of 3000 lines\n", 0) == 0);
        CHECK(result.rendered_text.find("2999: content 2999") != std::string::npos);
    }
    SUBCASE("beyond-end errors instead of clamping") {
        auto result = harness.open(ref, 3000);
        CHECK(result.is_error);
        CHECK(result.rendered_text.find("line number 3000 beyond document end (3000 lines)") !=
              std::string::npos);
    }
    SUBCASE("unknown ref") {
        CHECK(harness.open("turn5search5", std::nullopt).is_error);
    }
}

TEST_CASE("tool_open clamps short documents") {
    std::vector<std::string> lines;
    for (int i = 0; i < 100; ++i) lines.push_back("l" + std::to_string(i));
    CorpusManifest manifest({make_doc("short.txt", std::move(lines))});
    IndexedCorpus index(manifest);
    ToolHarness harness(manifest, index, ToolLimits{});
    auto search = harness.search({"l1"});
    const std::string ref = *search.ref_ids_mentioned.begin();
    auto result = harness.open(ref, std::nullopt);
    CHECK(result.rendered_text.rfind("Viewing lines [0-99] of 100 lines\n", 0) == 0);
    std::size_t newline_count = 0;
    for (char c : result.rendered_text)
        if (c == '\n') ++newline_count;
    CHECK(newline_count == 101); // header + 100 lines
}

TEST_CASE("tool_summarize validates preserve refs") {
    auto manifest = small_corpus();
    IndexedCorpus index(manifest);
    ToolHarness harness(manifest, index, ToolLimits{});
    harness.search({"cats"}); // turn1search1, turn1search2

    SUBCASE("valid refs preserved") {
        auto result = harness.summarize("found evidence in turn1search2", {"turn1search2"});
        CHECK(!result.is_error);
        CHECK(!result.prunable);
        CHECK(result.ref_ids_mentioned == std::set<std::string>{"turn1search2"});
        CHECK(result.rendered_text.find("found evidence") != std::string::npos);
    }
    SUBCASE("unknown ids dropped with a notice") {
        auto result = harness.summarize("s", {"turn1search1", "turn9search9"});
        CHECK(result.ref_ids_mentioned == std::set<std::string>{"turn1search1"});
        CHECK(result.rendered_text.find("Unknown reference ids dropped: turn9search9") !=
              std::string::npos);
    }
    SUBCASE("empty preserve list is valid") {
        auto result = harness.summarize("s", {});
        CHECK(!result.is_error);
        CHECK(result.ref_ids_mentioned.empty());
        CHECK(result.rendered_text.find("Preserved references: (none)") != std::string::npos);
    }
}

TEST_CASE("every issued ref id parses and n increases strictly") {
    auto manifest = small_corpus();
    IndexedCorpus index(manifest);
    ToolHarness harness(manifest, index, ToolLimits{});

    std::vector<std::string> issued;
    for (int turn = 1; turn <= 3; ++turn) {
        harness.registry().begin_turn(turn);
        for (const auto& ref : harness.search({"cats"}).ref_ids_mentioned) issued.push_back(ref);
        for (const auto& ref : harness.search({"revenue"}).ref_ids_mentioned)
            issued.push_back(ref);
    }

    static const std::regex pattern(R"(turn([0-9]+)search([0-9]+))");
    std::vector<std::size_t> ns;
    for (const auto& ref : issued) {
        std::smatch m;
        REQUIRE(std::regex_match(ref, m, pattern));
        CHECK(std::stoul(m[1].str()) >= 1);
        ns.push_back(std::stoul(m[2].str()));
        CHECK(harness.registry().find(ref) != nullptr);
    }
    std::sort(ns.begin(), ns.end());
    for (std::size_t i = 1; i < ns.size(); ++i) CHECK(ns[i] > ns[i - 1]);
}

TEST_CASE("schema exposure follows feature flags") {
    auto manifest = small_corpus();
    IndexedCorpus index(manifest);

    ToolHarness all(manifest, index, ToolLimits{});
    auto schemas = all.schemas();
    REQUIRE(schemas.size() == 4);
    CHECK(schemas[0].name == "search");
    CHECK(schemas[3].name == "summarize");
    CHECK(schemas[0].parameters["properties"]["queries"]["maxItems"] == 5);

    ToolLimits no_sum;
    no_sum.summarize_enabled = false;
    auto s2 = ToolHarness(manifest, index, no_sum).schemas();
    CHECK(s2.size() == 3);
    for (const auto& s : s2) CHECK(s.name != "summarize");

    ToolLimits single;
    single.multi_query_enabled = false;
    auto s3 = ToolHarness(manifest, index, single).schemas();
    CHECK(s3[0].parameters["properties"]["queries"]["maxItems"] == 1);

    ToolLimits sem;
    sem.semantic_find_enabled = true;
    auto s4 = ToolHarness(manifest, index, sem).schemas();
    CHECK(s4[1].parameters["properties"].contains("semantic"));
    auto s5 = ToolHarness(manifest, index, ToolLimits{}).schemas();
    CHECK(!s5[1].parameters["properties"].contains("semantic"));
}
