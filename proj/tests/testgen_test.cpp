#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <mbt/ot/testgen.hpp>

using namespace mbt::ot;
namespace mck = mbt::mck;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("mbt-testgen-" + std::to_string(0) + "-" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

Suite small_suite() {
    return generate(SyncParams{2, 2, false});
}

} // namespace

TEST_CASE("suites shard to jsonl and load back verbatim") {
    Suite suite = small_suite(); // 10*10 cases
    TempDir dir;
    fs::path manifest = emit_jsonl(suite, dir.path, 30);
    CHECK(fs::exists(manifest));
    CHECK(fs::exists(dir.path / "cases-000.jsonl"));
    CHECK(fs::exists(dir.path / "cases-003.jsonl")); // 100 cases / 30 per file
    CHECK(!fs::exists(dir.path / "cases-004.jsonl"));

    Suite back = load_jsonl(dir.path);
    CHECK(back.params == suite.params);
    REQUIRE(back.cases.size() == suite.cases.size());
    for (std::size_t i = 0; i < back.cases.size(); ++i)
        CHECK(back.cases[i] == suite.cases[i]);
}

TEST_CASE("tampered shards fail the manifest digest") {
    Suite suite = small_suite();
    TempDir dir;
    emit_jsonl(suite, dir.path, 1000);

    // Drop the first line from the only shard.
    fs::path shard = dir.path / "cases-000.jsonl";
    std::ifstream in(shard);
    std::string line, rest;
    std::getline(in, line);
    for (std::string l; std::getline(in, l);)
        rest += l + "\n";
    in.close();
    std::ofstream(shard) << rest;

    CHECK_THROWS_AS((void)load_jsonl(dir.path), std::runtime_error);
}

TEST_CASE("case ids are stable fingerprints of case content") {
    Suite a = small_suite();
    Suite b = small_suite();
    REQUIRE(a.cases.size() == b.cases.size());
    for (std::size_t i = 0; i < a.cases.size(); ++i)
        CHECK(a.cases[i].id == b.cases[i].id);
    CHECK(a.cases[0].name().rfind("Transform_Node__", 0) == 0);
}

TEST_CASE("source emission expands the case template") {
    Suite suite = small_suite();
    suite.cases.resize(1);
    std::string src = emit_source(suite, default_case_template());
    CHECK(src.find("TEST(" + suite.cases[0].name() + ")") != std::string::npos);
    CHECK(src.find("setup(\"[1,2]\")") != std::string::npos);
    CHECK(src.find("perform(1, ") != std::string::npos);
    CHECK(src.find("check_ops(2, ") != std::string::npos);
    CHECK(src.find("check_server(") != std::string::npos);

    CHECK_THROWS_AS((void)emit_source(suite, "{{nope}}"), std::invalid_argument);
    CHECK_THROWS_AS((void)emit_source(suite, "{{name"), std::invalid_argument);
    CHECK(expand_template("a {{x}} b", {{"x", "1"}}) == "a 1 b");
}

TEST_CASE("generation refuses non-graph exploration results") {
    SyncParams p{2, 2, false};
    mck::Violation v;
    v.invariant_name = "peers-consistent";
    CHECK_THROWS_AS((void)generate(p, mck::ExploreResult{v}), std::runtime_error);
    CHECK_THROWS_AS(
        (void)generate(p, mck::ExploreResult{mck::LimitExceeded{"max_states", 7}}),
        std::runtime_error);
}

TEST_CASE("replay flags a suite whose expectations were corrupted") {
    Suite suite = small_suite();
    suite.cases[5].final_arrays[0].elems.push_back(42);
    ReplayResult rr = replay(suite);
    CHECK(rr.checked == suite.cases.size());
    REQUIRE(rr.failures.size() == 1);
    CHECK(rr.failures[0].find(suite.cases[5].name()) != std::string::npos);
}

TEST_CASE("rule coverage counts fired branches and lists unfired ones") {
    CoverageReport cov = rule_coverage(small_suite());
    CHECK(!cov.hits.empty());
    CHECK(cov.hits.count("ErasexErase.same-index-discard"));
    // No swaps in this universe, so every swap branch is unfired.
    bool swap_unfired = false;
    for (const RuleCase& rc : cov.unfired)
        swap_unfired |= (rc.a == OpKind::Swap || rc.b == OpKind::Swap);
    CHECK(swap_unfired);
    for (const auto& [key, count] : cov.hits)
        CHECK(count > 0);
}

TEST_CASE("terminal path counting is a DAG DP") {
    // Diamond: two paths to one terminal.
    mck::ModelDefinition m;
    m.initial_states = {mck::State{"s"}};
    m.next = [](const mck::State& s) {
        std::vector<std::pair<mck::ActionLabel, mck::State>> out;
        if (s.canonical == "s")
            out = {{"l", mck::State{"a"}}, {"r", mck::State{"b"}}};
        else if (s.canonical == "a" || s.canonical == "b")
            out = {{"j", mck::State{"t"}}};
        return out;
    };
    auto g = std::get<mck::StateGraph>(mck::explore(m));
    CHECK(count_terminal_paths(g) == 2);

    mck::ExploreOptions opt;
    opt.record_edges = false;
    auto g2 = std::get<mck::StateGraph>(mck::explore(m, opt));
    CHECK_THROWS_AS((void)count_terminal_paths(g2), std::invalid_argument);
}
