#include <doctest.h>

#include <mbt/repl/sim.hpp>
#include <mbt/repl/trace_check.hpp>

using namespace mbt::repl;

TEST_CASE("the simulator is deterministic per seed") {
    SimConfig cfg;
    cfg.seed = 7;
    cfg.steps = 150;
    SimResult a = simulate(cfg);
    SimResult b = simulate(cfg);
    CHECK(a.events == b.events);
    CHECK(a.final_state == b.final_state);
    CHECK(a.summary == b.summary);

    cfg.seed = 8;
    CHECK(!(simulate(cfg).events == a.events));
}

TEST_CASE("logical timestamps count 1..N") {
    SimConfig cfg;
    cfg.seed = 3;
    cfg.steps = 50;
    SimResult r = simulate(cfg);
    REQUIRE(!r.events.empty());
    for (std::size_t i = 0; i < r.events.size(); ++i)
        CHECK(r.events[i].ts_ms == static_cast<std::int64_t>(i + 1));
}

TEST_CASE("the wall logger spins within a millisecond and aborts on regress") {
    std::vector<std::int64_t> ticks = {5, 5, 5, 6, 7, 7, 8};
    std::size_t at = 0;
    EventLogger logger([&] { return ticks[at < ticks.size() ? at++ : ticks.size() - 1]; });
    CHECK(logger.stamp() == 5);
    CHECK(logger.stamp() == 6); // consumed the duplicate 5s
    CHECK(logger.stamp() == 7);
    CHECK(logger.stamp() == 8);

    std::vector<std::int64_t> back = {5, 3};
    std::size_t i = 0;
    EventLogger bad([&] { return back[i < back.size() ? i++ : back.size() - 1]; });
    CHECK(bad.stamp() == 5);
    CHECK_THROWS_WITH_AS((void)bad.stamp(), "Clock went backwards",
                         std::runtime_error);
}

TEST_CASE("traces round-trip through jsonl with stable keys") {
    SimConfig cfg;
    cfg.seed = 11;
    cfg.steps = 40;
    SimResult r = simulate(cfg);
    std::string text = trace_to_jsonl(r.events);
    CHECK(text.rfind("{\"ts_ms\":", 0) == 0);
    CHECK(text.find("\"commitPoint\":{\"term\":") != std::string::npos);
    CHECK(trace_from_jsonl(text) == r.events);

    TraceEvent partial = r.events[0];
    partial.oplog_start = 3;
    std::string line = trace_to_jsonl({partial});
    CHECK(line.find("\"oplog_start\":3") != std::string::npos);
    CHECK(trace_from_jsonl(line)[0].oplog_start == 3);
}

TEST_CASE("clean traces conform to the model") {
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
        SimConfig cfg;
        cfg.seed = seed;
        cfg.steps = 120;
        SimResult r = simulate(cfg);
        CHECK(r.injected_steps.empty());
        CheckReport report = check_trace(cfg.params, r.events);
        CAPTURE(seed);
        CAPTURE(report.failure);
        CHECK(report.verdict == Verdict::Pass);
        CHECK(report.steps_checked == r.events.size());
        CHECK(report.stutter_steps == 0);
    }
}

TEST_CASE("each injection eventually fires and is caught by the checker") {
    for (const char* kind :
         {"minority-commit", "two-leaders", "commit-beyond-applied"}) {
        CAPTURE(kind);
        bool fired = false;
        for (std::uint64_t seed = 1; seed <= 40 && !fired; ++seed) {
            SimConfig cfg;
            cfg.seed = seed;
            cfg.steps = 120;
            cfg.inject = kind;
            SimResult r = simulate(cfg);
            if (r.injected_steps.empty())
                continue;
            fired = true;
            CheckReport report = check_trace(cfg.params, r.events);
            CHECK(report.verdict == Verdict::Fail);
            REQUIRE(report.failed_step.has_value());
            CHECK(*report.failed_step <= r.injected_steps.front());
        }
        CHECK(fired);
    }
}

TEST_CASE("partitions mask cross-group communication") {
    SimConfig cfg;
    cfg.seed = 13;
    cfg.steps = 100;
    cfg.partitions = {{0, 60, {"n1"}}};
    SimResult r = simulate(cfg);

    // While the window is open no event may cross the cut.
    for (const TraceEvent& e : r.events) {
        if (e.ts_ms > 60)
            break;
        // Sourceful actions never appear across the cut; the trace only
        // records the acting node, so re-check via conformance below.
    }
    CheckReport report = check_trace(cfg.params, r.events);
    CHECK(report.verdict == Verdict::Pass); // partitions restrict, never break

    SimResult again = simulate(cfg);
    CHECK(again.events == r.events);
}

TEST_CASE("the drain phase reports commit point convergence") {
    SimConfig cfg;
    cfg.seed = 5;
    cfg.steps = 200;
    SimResult r = simulate(cfg);
    CHECK(r.summary.find("converged=") != std::string::npos);
    if (r.converged) {
        CommitPoint first = r.final_state.nodes.front().commit;
        for (const NodeState& n : r.final_state.nodes)
            CHECK(n.commit == first);
    }
}
