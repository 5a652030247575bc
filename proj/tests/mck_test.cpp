#include <doctest.h>

#include <algorithm>
#include <string>

#include <mbt/mck/budget.hpp>
#include <mbt/mck/dot.hpp>
#include <mbt/mck/explore.hpp>
#include <mbt/mck/fingerprint.hpp>

using namespace mbt::mck;

namespace {

// A counter that increments up to `max` and can be reset to 0. Exercises
// dedup (reset re-reaches 0), terminal detection and depth accounting.
ModelDefinition counter_model(int max, bool with_reset = false) {
    ModelDefinition m;
    m.initial_states = {State{"0"}};
    m.next = [max, with_reset](const State& s) {
        int v = std::stoi(s.canonical);
        std::vector<std::pair<ActionLabel, State>> out;
        if (v < max)
            out.push_back({"inc", State{std::to_string(v + 1)}});
        if (with_reset && v > 0)
            out.push_back({"reset", State{"0"}});
        return out;
    };
    return m;
}

} // namespace

TEST_CASE("explore visits every counter state once") {
    auto res = explore(counter_model(5));
    auto& g = std::get<StateGraph>(res);
    CHECK(g.stats.distinct_states == 6);
    CHECK(g.stats.transitions == 5);
    CHECK(g.stats.depth == 5);
    CHECK(g.initial_count == 1);
    CHECK(g.states.front().canonical == "0");
    CHECK(g.terminal_states() == std::vector<std::uint32_t>{5});
    CHECK(g.states[5].canonical == "5");

    // Discovery order is breadth-first and deterministic.
    for (std::size_t i = 0; i < g.states.size(); ++i) {
        CHECK(g.states[i].canonical == std::to_string(i));
        CHECK(g.depth[i] == i);
    }
}

TEST_CASE("explore dedups re-reached states") {
    auto res = explore(counter_model(3, /*with_reset=*/true));
    auto& g = std::get<StateGraph>(res);
    CHECK(g.stats.distinct_states == 4);
    CHECK(g.stats.transitions == 6); // 3 inc + 3 reset
    CHECK(g.terminal_states().empty());
}

TEST_CASE("invariant violations come with a shortest path") {
    auto m = counter_model(10);
    m.invariants.push_back({"below-four", [](const State& s) {
        return std::stoi(s.canonical) < 4;
    }});
    auto res = explore(m);
    auto& v = std::get<Violation>(res);
    CHECK(v.invariant_name == "below-four");
    CHECK(v.state.canonical == "4");
    REQUIRE(v.path.size() == 5);
    CHECK(v.path[0].first == "");
    CHECK(v.path[0].second.canonical == "0");
    for (std::size_t i = 1; i < v.path.size(); ++i) {
        CHECK(v.path[i].first == "inc");
        CHECK(v.path[i].second.canonical == std::to_string(i));
    }
}

TEST_CASE("constraint prunes successors without recording edges") {
    auto m = counter_model(10);
    m.constraint = [](const State& s) { return std::stoi(s.canonical) <= 2; };
    auto g = std::get<StateGraph>(explore(m));
    CHECK(g.stats.distinct_states == 3);
    CHECK(g.stats.transitions == 2);
    CHECK(g.terminal_states() == std::vector<std::uint32_t>{2});
}

TEST_CASE("exploration limits are reported") {
    ExploreOptions opt;
    opt.limits.max_states = 3;
    auto res = explore(counter_model(100), opt);
    auto& le = std::get<LimitExceeded>(res);
    CHECK(le.which == "max_states");
    CHECK(le.limit == 3);

    opt.limits = ExploreLimits{};
    opt.limits.max_depth = 4;
    auto res2 = explore(counter_model(100), opt);
    CHECK(std::get<LimitExceeded>(res2).which == "max_depth");
}

TEST_CASE("explore rejects empty models") {
    ModelDefinition m;
    m.next = [](const State&) {
        return std::vector<std::pair<ActionLabel, State>>{};
    };
    CHECK_THROWS_AS((void)explore(m), std::invalid_argument);
}

TEST_CASE("record_edges=false keeps counts but drops the edge list") {
    ExploreOptions opt;
    opt.record_edges = false;
    auto g = std::get<StateGraph>(explore(counter_model(5, true), opt));
    CHECK(g.edges.empty());
    CHECK(g.stats.transitions == 10);
    CHECK(g.stats.distinct_states == 6);
}

TEST_CASE("dot export round-trips through the parser") {
    auto g = std::get<StateGraph>(explore(counter_model(4, true)));
    std::string dot = export_dot(g);
    CHECK(dot.rfind("digraph states {", 0) == 0);
    CHECK(export_dot(g) == dot); // byte-stable

    StateGraph back = parse_dot(dot);
    CHECK(back.same_graph(g));
    CHECK(back.stats == g.stats);
    CHECK(back.initial_count == g.initial_count);
}

TEST_CASE("dot labels escape quotes, backslashes and newlines") {
    StateGraph g;
    ModelDefinition m;
    m.initial_states = {State{"a\"b\\c\nd"}};
    m.next = [](const State&) {
        return std::vector<std::pair<ActionLabel, State>>{};
    };
    g = std::get<StateGraph>(explore(m));
    StateGraph back = parse_dot(export_dot(g));
    REQUIRE(back.states.size() == 1);
    CHECK(back.states[0].canonical == "a\"b\\c\nd");
}

TEST_CASE("dot parse errors carry line and column") {
    CHECK_THROWS_AS((void)parse_dot("graph states {\n}\n"), DotParseError);
    try {
        (void)parse_dot("digraph states {\n  s1 [label=\"x\"];\n  oops\n}\n");
        FAIL("expected DotParseError");
    } catch (const DotParseError& e) {
        CHECK(e.line == 3);
        CHECK(e.column > 0);
    }
    // Edge to a node that was never declared.
    CHECK_THROWS_AS(
        (void)parse_dot("digraph states {\n  s1 [label=\"x\", init=1];\n"
                        "  s1 -> s2 [label=\"go\"];\n}\n"),
        UnknownNodeError);
}

TEST_CASE("fingerprints are stable and spread") {
    static_assert(fingerprint64("abc") != fingerprint64("abd"));
    CHECK(fingerprint64("") != fingerprint64("0"));
    CHECK(fingerprint64("counter=1") == fingerprint64(std::string("counter=1")));
}

TEST_CASE("run_budgeted returns the result or a diagnostic") {
    auto done = [](std::size_t i) -> std::optional<int> {
        return i == 3 ? std::optional<int>{42} : std::nullopt;
    };
    auto r = run_budgeted(done, 10, "x");
    CHECK(std::get<int>(r) == 42);

    auto never = [](std::size_t) -> std::optional<int> { return std::nullopt; };
    auto nt = std::get<NonTermination>(run_budgeted(never, 7, "Mov(0,1), Swp(0,1)"));
    CHECK(nt.budget == 7);
    CHECK(nt.inputs == "Mov(0,1), Swp(0,1)");
}
