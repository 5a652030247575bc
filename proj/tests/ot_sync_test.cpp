#include <doctest.h>

#include <mbt/mck/explore.hpp>
#include <mbt/ot/sync_model.hpp>
#include <mbt/ot/testgen.hpp>

using namespace mbt::ot;
namespace mck = mbt::mck;

TEST_CASE("sync states encode and decode losslessly") {
    SyncParams p{2, 3, false};
    SyncState s = initial_sync_state(p);
    CHECK(decode(encode(s)) == s);

    SyncState end = run_scenario(p, {SetOp{2, 4}, EraseOp{1}});
    CHECK(decode(encode(end)) == end);
    CHECK(encode(decode(encode(end))) == encode(end));
}

TEST_CASE("op universe sizes") {
    CHECK(op_universe(SyncParams{3, 3, false}, 1).size() == 17);
    CHECK(op_universe(SyncParams{3, 3, true}, 1).size() == 20);
    CHECK(op_universe(SyncParams{3, 1, false}, 1).size() == 5);

    // Values carry the author: array_len + client id.
    for (const ArrayOp& op : op_universe(SyncParams{3, 3, false}, 2))
        if (const auto* set = std::get_if<SetOp>(&op))
            CHECK(set->value == 5);
}

TEST_CASE("two clients explore to one terminal state per op pair") {
    SyncParams p{2, 3, false};
    auto res = mck::explore(sync_model(p));
    auto g = std::get<mck::StateGraph>(res);
    CHECK(g.terminal_states().size() == 17 * 17);
    CHECK(count_terminal_paths(g) == 17 * 17);
}

TEST_CASE("every peer converges in every two-client scenario") {
    SyncParams p{2, 3, false};
    Suite suite = generate(p);
    CHECK(suite.cases.size() == 289);
    for (const TestCase& c : suite.cases) {
        for (const ArrayState& a : c.final_arrays)
            CHECK(a == c.server_array);
    }
    ReplayResult rr = replay(suite);
    CHECK(rr.checked == 289);
    CHECK(rr.ok());
}

TEST_CASE("concurrent set and erase resolve exactly as expected") {
    SyncParams p{2, 3, false};
    SyncState end = run_scenario(p, {SetOp{2, 4}, EraseOp{1}});
    TestCase c = case_from_state(end);

    CHECK(c.initial == ArrayState{{1, 2, 3}});
    ArrayState converged{{1, 4}};
    CHECK(c.server_array == converged);
    REQUIRE(c.final_arrays.size() == 2);
    CHECK(c.final_arrays[0] == converged);
    CHECK(c.final_arrays[1] == converged);

    // The set's author applies the erase untouched; the erase's author
    // applies the set shifted one slot left.
    REQUIRE(c.applied[0].size() == 1);
    CHECK(c.applied[0][0].op == ArrayOp{EraseOp{1}});
    CHECK(!c.applied[0][0].discarded);
    REQUIRE(c.applied[1].size() == 1);
    CHECK(c.applied[1][0].op == ArrayOp{SetOp{1, 4}});
    CHECK(!c.applied[1][0].discarded);
}

TEST_CASE("scenario runner agrees with the explored model") {
    SyncParams p{2, 2, false};
    auto g = std::get<mck::StateGraph>(mck::explore(sync_model(p)));
    for (std::uint32_t i : g.terminal_states()) {
        SyncState s = decode(g.states[i].canonical);
        std::vector<ArrayOp> ops;
        for (const ClientState& cs : s.clients)
            ops.push_back(cs.own->op);
        CHECK(run_scenario(p, ops) == s);
    }
}

TEST_CASE("consistency check notices a diverged synced client") {
    SyncParams p{2, 3, false};
    SyncState s = run_scenario(p, {SetOp{0, 4}, SetOp{0, 5}});
    CHECK(peers_consistent(s));
    s.clients[0].array.elems[0] = 99; // synced client that disagrees
    CHECK(!peers_consistent(s));
}

TEST_CASE("swap-enabled scenarios converge and hit swap rules") {
    SyncParams p{2, 3, true};
    Suite suite = generate(p);
    CHECK(suite.cases.size() == 20 * 20);
    CHECK(replay(suite).ok());

    CoverageReport cov = rule_coverage(suite);
    CHECK(cov.hits.count("SwapxSwap.identical-discard"));
    CHECK(cov.hits.count("SwapxSwap.overlap-lww"));
    CHECK(cov.hits.count("SwapxErase.swapped-element-erased"));
    CHECK(cov.hits.count("SwapxClear.swap-discarded"));
}
