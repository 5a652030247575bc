#include <doctest.h>

#include <algorithm>

#include <mbt/mck/explore.hpp>
#include <mbt/repl/model.hpp>

using namespace mbt::repl;
namespace mck = mbt::mck;

namespace {

// Convenience: run the named action (unique by label) from s.
ReplState step(const ReplParams& p, const ReplState& s, const std::string& label) {
    for (auto& [l, t] : successors(p, s))
        if (l == label)
            return t;
    FAIL("action not enabled: ", label);
    return s;
}

bool enabled(const ReplParams& p, const ReplState& s, const std::string& label) {
    for (auto& [l, t] : successors(p, s))
        if (l == label)
            return true;
    return false;
}

} // namespace

TEST_CASE("replica states encode and decode losslessly") {
    ReplState s = initial_repl_state(ReplParams{});
    CHECK(decode(encode(s)) == s);
    CHECK(encode(s) ==
          "n1={r=F;t=0;c=0.0;l=[]};n2={r=F;t=0;c=0.0;l=[]};n3={r=F;t=0;c=0.0;l=[]}");

    s.nodes[0] = NodeState{Role::Leader, 2, CommitPoint{1, 1}, {1, 2}};
    s.bad_rollback = true;
    CHECK(decode(encode(s)) == s);
    CHECK(encode(s).find("badrb=1") != std::string::npos);
}

TEST_CASE("only elections are possible in the fresh cluster") {
    ReplParams p{};
    ReplState s = initial_repl_state(p);
    auto next = successors(p, s);
    REQUIRE(next.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(next[i].first == "BecomePrimaryByMagic(n" + std::to_string(i + 1) + ")");
        const ReplState& t = next[i].second;
        CHECK(t.nodes[i].role == Role::Leader);
        CHECK(t.nodes[i].term == 1);
    }
}

TEST_CASE("write, replicate, commit") {
    ReplParams p{};
    ReplState s = initial_repl_state(p);
    s = step(p, s, "BecomePrimaryByMagic(n1)");
    s = step(p, s, "ClientWrite(n1)");
    CHECK(s.nodes[0].oplog == std::vector<int>{1});

    // Not yet on a majority: the leader cannot commit.
    CHECK(!enabled(p, s, "AdvanceCommitPoint(n1)"));

    s = step(p, s, "AppendOplog(n2,src=n1)");
    CHECK(s.nodes[1].oplog == std::vector<int>{1});
    s = step(p, s, "AdvanceCommitPoint(n1)");
    CHECK(s.nodes[0].commit == CommitPoint{1, 1});
    CHECK(committed_entries(s) == std::set<std::pair<std::size_t, int>>{{1, 1}});

    // Gossip the commit point with the term check.
    s = step(p, s, "UpdateTermThroughHeartbeat(n2,src=n1)");
    s = step(p, s, "LearnCommitPointWithTermCheck(n2,src=n1)");
    CHECK(s.nodes[1].commit == CommitPoint{1, 1});
}

TEST_CASE("learned commit points clamp to the local log") {
    ReplParams p{};
    ReplState s = initial_repl_state(p);
    s = step(p, s, "BecomePrimaryByMagic(n1)");
    s = step(p, s, "ClientWrite(n1)");
    s = step(p, s, "ClientWrite(n1)");
    s = step(p, s, "AppendOplog(n2,src=n1)");
    s = step(p, s, "AppendOplog(n2,src=n1)");
    s = step(p, s, "AdvanceCommitPoint(n1)"); // commit (1,2)

    // n3 has replicated only the first entry; the sync-source rule clamps.
    s = step(p, s, "AppendOplog(n3,src=n1)");
    REQUIRE(enabled(p, s, "LearnCommitPointFromSyncSourceNeverBeyondLastApplied("
                          "n3,src=n1)"));
    ReplState t = step(p, s,
                       "LearnCommitPointFromSyncSourceNeverBeyondLastApplied(n3,src=n1)");
    CHECK(t.nodes[2].commit == CommitPoint{1, 1}); // not (1,2)
    CHECK(commit_in_own_log(t.nodes[2]));

    // The term-check rule would adopt (1,2) even beyond n3's log.
    ReplState u = step(p, step(p, s, "UpdateTermThroughHeartbeat(n3,src=n1)"),
                       "LearnCommitPointWithTermCheck(n3,src=n1)");
    CHECK(u.nodes[2].commit == CommitPoint{1, 2});
    CHECK(!commit_in_own_log(u.nodes[2]));
}

TEST_CASE("divergent followers roll back to the new leader") {
    ReplParams p{};
    ReplState s = initial_repl_state(p);
    // n3 wrote alone in term 1; n1 took over in term 2 and wrote.
    s.nodes[2] = NodeState{Role::Follower, 1, {}, {1}};
    s.nodes[0] = NodeState{Role::Leader, 2, {}, {2}};
    s.nodes[1] = NodeState{Role::Follower, 2, {}, {2}};

    REQUIRE(enabled(p, s, "RollbackOplog(n3,src=n1)"));
    ReplState t = step(p, s, "RollbackOplog(n3,src=n1)");
    CHECK(t.nodes[2].oplog.empty());
    CHECK(!t.bad_rollback);

    // A node cannot roll back towards a source with a lower last term.
    CHECK(!enabled(p, s, "RollbackOplog(n1,src=n3)"));
}

TEST_CASE("rolling back a committed entry trips the flag") {
    ReplParams p{};
    ReplState s = initial_repl_state(p);
    // Illegal (unreachable) configuration: n3's entry is covered by n3's own
    // commit point, yet a conflicting higher-term log exists.
    s.nodes[2] = NodeState{Role::Follower, 1, CommitPoint{1, 1}, {1}};
    s.nodes[0] = NodeState{Role::Leader, 2, {}, {2}};
    s.nodes[1] = NodeState{Role::Follower, 2, {}, {2}};

    ReplState t = step(p, s, "RollbackOplog(n3,src=n1)");
    CHECK(t.bad_rollback);

    auto model = repl_model(p);
    mck::State bad{encode(t)};
    bool ok = true;
    for (auto& inv : model.invariants)
        if (inv.name == "no-committed-rollback")
            ok = inv.holds(bad);
    CHECK(!ok);
}

TEST_CASE("elections require an up-to-date log") {
    ReplParams p{};
    ReplState s = initial_repl_state(p);
    s.nodes[0] = NodeState{Role::Follower, 1, {}, {1}};
    s.nodes[1] = NodeState{Role::Follower, 1, {}, {1}};
    s.nodes[2] = NodeState{Role::Follower, 1, {}, {}};

    CHECK(enabled(p, s, "BecomePrimaryByMagic(n1)"));
    CHECK(enabled(p, s, "BecomePrimaryByMagic(n2)"));
    // n3's log beats nobody but itself: one vote is not a majority of three.
    CHECK(!enabled(p, s, "BecomePrimaryByMagic(n3)"));

    ReplState t = step(p, s, "BecomePrimaryByMagic(n1)");
    CHECK(t.nodes[0].term == 2); // 1 + max term
}

TEST_CASE("a stale leader steps down when it hears a higher term") {
    ReplParams p{};
    ReplState s = initial_repl_state(p);
    s.nodes[0] = NodeState{Role::Leader, 1, {}, {}};
    s.nodes[1] = NodeState{Role::Follower, 2, {}, {}};

    ReplState t = step(p, s, "UpdateTermThroughHeartbeat(n1,src=n2)");
    CHECK(t.nodes[0].role == Role::Follower);
    CHECK(t.nodes[0].term == 2);

    ReplState u = step(p, s, "Stepdown(n1)");
    CHECK(u.nodes[0].role == Role::Follower);
    CHECK(u.nodes[0].term == 1);
}

TEST_CASE("label helpers") {
    CHECK(label_action("AppendOplog(n2,src=n1)") == "AppendOplog");
    CHECK(label_action("Stepdown(n1)") == "Stepdown");
}

TEST_CASE("a reduced cluster explores without violations, deterministically") {
    ReplParams p{3, 2, 2};
    mck::ExploreOptions opt;
    opt.record_edges = false;
    auto a = mck::explore(repl_model(p), opt);
    auto b = mck::explore(repl_model(p), opt);
    auto& ga = std::get<mck::StateGraph>(a);
    auto& gb = std::get<mck::StateGraph>(b);
    CHECK(ga.stats == gb.stats);
    CHECK(ga.stats.distinct_states > 1000);
}
