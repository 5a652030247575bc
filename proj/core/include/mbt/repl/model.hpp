#pragma once

#include <compare>
#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <mbt/mck/model.hpp>

namespace mbt::repl {

enum class Role { Follower, Leader };

struct CommitPoint {
    int term = 0;
    std::size_t index = 0; // 1-based position in the oplog; 0 = nothing

    friend bool operator==(const CommitPoint&, const CommitPoint&) = default;
    friend auto operator<=>(const CommitPoint&, const CommitPoint&) = default;
};

/// One replica. The oplog stores only entry terms: with pull-based
/// replication an entry is identified by (position, term).
struct NodeState {
    Role role = Role::Follower;
    int term = 0;
    CommitPoint commit;
    std::vector<int> oplog;

    int last_term() const { return oplog.empty() ? 0 : oplog.back(); }
    /// (last entry term, log length): the up-to-date order used by elections.
    std::pair<int, std::size_t> log_position() const {
        return {last_term(), oplog.size()};
    }
    friend bool operator==(const NodeState&, const NodeState&) = default;
};

struct ReplState {
    std::vector<NodeState> nodes;
    // Set (and then sticky) on the transition that rolled back an entry some
    // peer's commit point had already covered. The safety invariant is that
    // no reachable state carries it.
    bool bad_rollback = false;

    friend bool operator==(const ReplState&, const ReplState&) = default;
};

struct ReplParams {
    int nodes = 3;
    int max_term = 3;
    std::size_t max_oplog = 3;

    friend bool operator==(const ReplParams&, const ReplParams&) = default;
};

std::string encode(const ReplState& s);
ReplState decode(const std::string& text);

ReplState initial_repl_state(const ReplParams& params);

/// True when the node's commit point refers to an entry actually present in
/// its own oplog (a commit point may legitimately run ahead of the log of
/// the node that merely learned it).
bool commit_in_own_log(const NodeState& n);

/// Entries (1-based index, term) some peer's valid-in-own-log commit point
/// covers. Rolling any of these back loses acknowledged writes.
std::set<std::pair<std::size_t, int>> committed_entries(const ReplState& s);

/// All enabled transitions of the protocol from `s`, in a deterministic
/// order. Labels look like "AppendOplog(n2,src=n1)" or "ClientWrite(n1)".
std::vector<std::pair<mck::ActionLabel, ReplState>>
successors(const ReplParams& params, const ReplState& s);

/// The action name inside a label ("AppendOplog" from the above).
std::string label_action(const mck::ActionLabel& label);

/// Model over the canonical encoding. The constraint bounds terms and oplog
/// lengths; invariants: bad_rollback never set, and every valid-in-own-log
/// commit point covers only majority-replicated entries.
mck::ModelDefinition repl_model(const ReplParams& params);

} // namespace mbt::repl
