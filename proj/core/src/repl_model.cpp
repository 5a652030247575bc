#include <mbt/repl/model.hpp>

#include <algorithm>
#include <charconv>
#include <stdexcept>

namespace mbt::repl {
namespace {

[[noreturn]] void bad(const std::string& what) {
    throw std::invalid_argument("malformed replica state encoding: " + what);
}

int parse_int(const char*& p, const char* end) {
    int v = 0;
    auto [q, ec] = std::from_chars(p, end, v);
    if (ec != std::errc{})
        bad("number");
    p = q;
    return v;
}

void expect(const char*& p, const char* end, const std::string& tok) {
    if (static_cast<std::size_t>(end - p) < tok.size() ||
        std::string(p, tok.size()) != tok)
        bad("expected '" + tok + "' at '" + std::string(p, end) + "'");
    p += tok.size();
}

bool is_prefix(const std::vector<int>& a, const std::vector<int>& b) {
    return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
}

std::string node_name(std::size_t i) { return "n" + std::to_string(i + 1); }

} // namespace

std::string encode(const ReplState& s) {
    std::string out;
    for (std::size_t i = 0; i < s.nodes.size(); ++i) {
        const NodeState& n = s.nodes[i];
        if (i)
            out += ";";
        out += node_name(i) + "={r=" + (n.role == Role::Leader ? "L" : "F");
        out += ";t=" + std::to_string(n.term);
        out += ";c=" + std::to_string(n.commit.term) + "." +
               std::to_string(n.commit.index);
        out += ";l=[";
        for (std::size_t k = 0; k < n.oplog.size(); ++k) {
            if (k)
                out += ",";
            out += std::to_string(n.oplog[k]);
        }
        out += "]}";
    }
    if (s.bad_rollback)
        out += ";badrb=1";
    return out;
}

ReplState decode(const std::string& text) {
    ReplState s;
    const char* p = text.data();
    const char* end = p + text.size();
    while (p < end) {
        if (std::string(p, std::min<std::size_t>(6, end - p)) == "badrb=") {
            expect(p, end, "badrb=1");
            s.bad_rollback = true;
            break;
        }
        expect(p, end, node_name(s.nodes.size()) + "={r=");
        NodeState n;
        if (p == end || (*p != 'L' && *p != 'F'))
            bad("role");
        n.role = (*p == 'L') ? Role::Leader : Role::Follower;
        ++p;
        expect(p, end, ";t=");
        n.term = parse_int(p, end);
        expect(p, end, ";c=");
        n.commit.term = parse_int(p, end);
        expect(p, end, ".");
        n.commit.index = static_cast<std::size_t>(parse_int(p, end));
        expect(p, end, ";l=[");
        while (p < end && *p != ']') {
            n.oplog.push_back(parse_int(p, end));
            if (p < end && *p == ',')
                ++p;
        }
        expect(p, end, "]}");
        if (p < end)
            expect(p, end, ";");
        s.nodes.push_back(std::move(n));
    }
    if (s.nodes.empty())
        bad("no nodes");
    return s;
}

ReplState initial_repl_state(const ReplParams& params) {
    if (params.nodes < 1)
        throw std::invalid_argument("need at least one node");
    ReplState s;
    s.nodes.resize(static_cast<std::size_t>(params.nodes));
    return s;
}

bool commit_in_own_log(const NodeState& n) {
    if (n.commit.index == 0)
        return n.commit.term == 0;
    return n.commit.index <= n.oplog.size() &&
           n.oplog[n.commit.index - 1] == n.commit.term;
}

std::set<std::pair<std::size_t, int>> committed_entries(const ReplState& s) {
    std::set<std::pair<std::size_t, int>> out;
    for (const NodeState& n : s.nodes) {
        if (!commit_in_own_log(n))
            continue;
        for (std::size_t k = 1; k <= n.commit.index; ++k)
            out.insert({k, n.oplog[k - 1]});
    }
    return out;
}

std::vector<std::pair<mck::ActionLabel, ReplState>>
successors(const ReplParams& params, const ReplState& s) {
    std::vector<std::pair<mck::ActionLabel, ReplState>> out;
    const std::size_t count = s.nodes.size();
    const auto majority = [count](std::size_t k) { return 2 * k > count; };

    auto emit = [&](std::string label, ReplState t) {
        out.push_back({std::move(label), std::move(t)});
    };

    for (std::size_t i = 0; i < count; ++i) {
        const NodeState& n = s.nodes[i];

        // AppendOplog(i, src): pull the next entry from a source whose log
        // strictly extends ours.
        for (std::size_t j = 0; j < count; ++j) {
            if (j == i)
                continue;
            const NodeState& src = s.nodes[j];
            if (n.oplog.size() < src.oplog.size() && is_prefix(n.oplog, src.oplog)) {
                ReplState t = s;
                t.nodes[i].oplog.push_back(src.oplog[n.oplog.size()]);
                emit("AppendOplog(" + node_name(i) + ",src=" + node_name(j) + ")",
                     std::move(t));
            }
        }

        // RollbackOplog(i, src): our last entry conflicts with a source
        // whose log ends in a higher term.
        for (std::size_t j = 0; j < count; ++j) {
            if (j == i)
                continue;
            const NodeState& src = s.nodes[j];
            if (n.oplog.empty() || n.last_term() >= src.last_term())
                continue;
            bool conflict = src.oplog.size() < n.oplog.size() ||
                            src.oplog[n.oplog.size() - 1] != n.oplog.back();
            if (!conflict)
                continue;
            ReplState t = s;
            std::pair<std::size_t, int> popped{n.oplog.size(), n.oplog.back()};
            t.nodes[i].oplog.pop_back();
            if (committed_entries(s).count(popped))
                t.bad_rollback = true;
            emit("RollbackOplog(" + node_name(i) + ",src=" + node_name(j) + ")",
                 std::move(t));
        }

        // BecomePrimaryByMagic(i): election collapsed to its outcome. The
        // winner's log must be at least as up to date as a majority's.
        {
            std::size_t voters = 0;
            for (std::size_t j = 0; j < count; ++j)
                if (n.log_position() >= s.nodes[j].log_position())
                    ++voters;
            if (majority(voters)) {
                int top = 0;
                for (const NodeState& m : s.nodes)
                    top = std::max(top, m.term);
                ReplState t = s;
                for (std::size_t j = 0; j < count; ++j)
                    t.nodes[j].role = Role::Follower;
                t.nodes[i].role = Role::Leader;
                t.nodes[i].term = top + 1;
                emit("BecomePrimaryByMagic(" + node_name(i) + ")", std::move(t));
            }
        }

        if (n.role == Role::Leader) {
            // Stepdown(i).
            {
                ReplState t = s;
                t.nodes[i].role = Role::Follower;
                emit("Stepdown(" + node_name(i) + ")", std::move(t));
            }

            // ClientWrite(i): append an entry in the leader's own term.
            {
                ReplState t = s;
                t.nodes[i].oplog.push_back(n.term);
                emit("ClientWrite(" + node_name(i) + ")", std::move(t));
            }

            // AdvanceCommitPoint(i): newest majority-replicated index whose
            // entry carries the leader's current term.
            {
                std::size_t best = 0;
                for (std::size_t idx = n.oplog.size(); idx >= 1; --idx) {
                    std::size_t have = 0;
                    for (const NodeState& m : s.nodes)
                        if (m.oplog.size() >= idx && m.oplog[idx - 1] == n.oplog[idx - 1])
                            ++have;
                    if (majority(have) && n.oplog[idx - 1] == n.term) {
                        best = idx;
                        break;
                    }
                }
                if (best != 0) {
                    CommitPoint cp{n.oplog[best - 1], best};
                    if (n.commit < cp) {
                        ReplState t = s;
                        t.nodes[i].commit = cp;
                        emit("AdvanceCommitPoint(" + node_name(i) + ")", std::move(t));
                    }
                }
            }
        }

        for (std::size_t j = 0; j < count; ++j) {
            if (j == i)
                continue;
            const NodeState& src = s.nodes[j];

            // UpdateTermThroughHeartbeat(i, src): adopt a higher term; a
            // stale leader standing in the way steps down.
            if (src.term > n.term) {
                ReplState t = s;
                t.nodes[i].term = src.term;
                t.nodes[i].role = Role::Follower;
                emit("UpdateTermThroughHeartbeat(" + node_name(i) + ",src=" +
                         node_name(j) + ")",
                     std::move(t));
            }

            // LearnCommitPointWithTermCheck(i, src): adopt a newer commit
            // point unless it comes from a term ahead of ours.
            if (src.commit.term <= n.term && n.commit < src.commit) {
                ReplState t = s;
                t.nodes[i].commit = src.commit;
                emit("LearnCommitPointWithTermCheck(" + node_name(i) + ",src=" +
                         node_name(j) + ")",
                     std::move(t));
            }

            // LearnCommitPointFromSyncSourceNeverBeyondLastApplied(i, src):
            // clamp the learned commit point to our last applied entry. Only
            // sound when our log is a prefix of the source's and the source's
            // commit point is grounded in its own log -- then every entry of
            // ours at or below the clamp is itself committed.
            if (is_prefix(n.oplog, src.oplog) && commit_in_own_log(src) &&
                src.commit.index > 0) {
                CommitPoint applied{n.last_term(), n.oplog.size()};
                CommitPoint learned = std::min(src.commit, applied);
                if (n.commit < learned) {
                    ReplState t = s;
                    t.nodes[i].commit = learned;
                    emit("LearnCommitPointFromSyncSourceNeverBeyondLastApplied(" +
                             node_name(i) + ",src=" + node_name(j) + ")",
                         std::move(t));
                }
            }
        }
    }
    return out;
}

std::string label_action(const mck::ActionLabel& label) {
    return label.substr(0, label.find('('));
}

mck::ModelDefinition repl_model(const ReplParams& params) {
    mck::ModelDefinition m;
    m.initial_states = {mck::State{encode(initial_repl_state(params))}};

    m.next = [params](const mck::State& st) {
        ReplState s = decode(st.canonical);
        std::vector<std::pair<mck::ActionLabel, mck::State>> out;
        for (auto& [label, t] : successors(params, s))
            out.push_back({label, mck::State{encode(t)}});
        return out;
    };

    m.constraint = [params](const mck::State& st) {
        ReplState s = decode(st.canonical);
        for (const NodeState& n : s.nodes)
            if (n.term > params.max_term || n.oplog.size() > params.max_oplog)
                return false;
        return true;
    };

    m.invariants.push_back({"no-committed-rollback", [](const mck::State& st) {
        return !decode(st.canonical).bad_rollback;
    }});
    m.invariants.push_back({"commit-point-on-majority", [](const mck::State& st) {
        ReplState s = decode(st.canonical);
        for (const NodeState& n : s.nodes) {
            if (!commit_in_own_log(n) || n.commit.index == 0)
                continue;
            std::size_t have = 0;
            for (const NodeState& m2 : s.nodes)
                if (m2.oplog.size() >= n.commit.index &&
                    m2.oplog[n.commit.index - 1] == n.commit.term)
                    ++have;
            if (2 * have <= s.nodes.size())
                return false;
        }
        return true;
    }});
    return m;
}

} // namespace mbt::repl
