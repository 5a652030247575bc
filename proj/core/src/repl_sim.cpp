#include <mbt/repl/sim.hpp>

#include <algorithm>
#include <chrono>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mbt::repl {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string role_name(Role r) { return r == Role::Leader ? "Leader" : "Follower"; }

Role role_from(const std::string& s) {
    if (s == "Leader")
        return Role::Leader;
    if (s == "Follower")
        return Role::Follower;
    throw std::invalid_argument("unknown role '" + s + "'");
}

// "AppendOplog(n2,src=n1)" -> "n2"
std::string label_node(const std::string& label) {
    std::size_t open = label.find('(');
    std::size_t close = label.find_first_of(",)", open);
    return label.substr(open + 1, close - open - 1);
}

// -> "n1", or "" when the action has no source.
std::string label_src(const std::string& label) {
    std::size_t at = label.find("src=");
    if (at == std::string::npos)
        return {};
    return label.substr(at + 4, label.find(')') - at - 4);
}

std::size_t node_index(const std::string& name) {
    return static_cast<std::size_t>(std::stoul(name.substr(1))) - 1;
}

TraceEvent event_for(std::int64_t ts, const std::string& node,
                     const std::string& action, const ReplState& after) {
    const NodeState& n = after.nodes[node_index(node)];
    TraceEvent e;
    e.ts_ms = ts;
    e.node = node;
    e.action = action;
    e.role = n.role;
    e.term = n.term;
    e.commit = n.commit;
    e.oplog = n.oplog;
    return e;
}

bool within_bounds(const ReplParams& p, const ReplState& s) {
    for (const NodeState& n : s.nodes)
        if (n.term > p.max_term || n.oplog.size() > p.max_oplog)
            return false;
    return true;
}

bool partition_blocks(const std::vector<PartitionWindow>& windows, std::size_t step,
                      const std::string& node, const std::string& src) {
    if (src.empty())
        return false;
    for (const PartitionWindow& w : windows) {
        if (step < w.from_step || step >= w.to_step)
            continue;
        bool node_in = std::find(w.group.begin(), w.group.end(), node) != w.group.end();
        bool src_in = std::find(w.group.begin(), w.group.end(), src) != w.group.end();
        if (node_in != src_in)
            return true;
    }
    return false;
}

bool is_gossip(const std::string& action) {
    return action == "AppendOplog" || action == "RollbackOplog" ||
           action == "UpdateTermThroughHeartbeat" ||
           action == "LearnCommitPointWithTermCheck" ||
           action == "LearnCommitPointFromSyncSourceNeverBeyondLastApplied";
}

struct Injector {
    // Returns (action name, post state, node) or nothing if no candidate.
    static std::optional<std::tuple<std::string, ReplState, std::string>>
    attempt(const std::string& kind, const ReplState& s) {
        if (kind == "minority-commit")
            return minority_commit(s);
        if (kind == "two-leaders")
            return two_leaders(s);
        if (kind == "commit-beyond-applied")
            return commit_beyond_applied(s);
        throw std::invalid_argument("unknown injection '" + kind + "'");
    }

    // A leader commits an entry of its own term that is NOT on a majority.
    static std::optional<std::tuple<std::string, ReplState, std::string>>
    minority_commit(const ReplState& s) {
        for (std::size_t i = 0; i < s.nodes.size(); ++i) {
            const NodeState& n = s.nodes[i];
            if (n.role != Role::Leader)
                continue;
            for (std::size_t idx = n.oplog.size(); idx >= 1; --idx) {
                if (n.oplog[idx - 1] != n.term)
                    continue;
                std::size_t have = 0;
                for (const NodeState& m : s.nodes)
                    if (m.oplog.size() >= idx && m.oplog[idx - 1] == n.oplog[idx - 1])
                        ++have;
                CommitPoint cp{n.oplog[idx - 1], idx};
                if (2 * have <= s.nodes.size() && n.commit < cp) {
                    ReplState t = s;
                    t.nodes[i].commit = cp;
                    return {{"AdvanceCommitPoint", std::move(t),
                             "n" + std::to_string(i + 1)}};
                }
            }
        }
        return std::nullopt;
    }

    // A follower crowns itself without raising its term.
    static std::optional<std::tuple<std::string, ReplState, std::string>>
    two_leaders(const ReplState& s) {
        for (std::size_t i = 0; i < s.nodes.size(); ++i) {
            if (s.nodes[i].role != Role::Follower)
                continue;
            ReplState t = s;
            t.nodes[i].role = Role::Leader;
            return {{"BecomePrimaryByMagic", std::move(t), "n" + std::to_string(i + 1)}};
        }
        return std::nullopt;
    }

    // A node's commit point jumps past every oplog in the cluster.
    static std::optional<std::tuple<std::string, ReplState, std::string>>
    commit_beyond_applied(const ReplState& s) {
        std::size_t longest = 0;
        for (const NodeState& n : s.nodes)
            longest = std::max(longest, n.oplog.size());
        for (std::size_t i = 0; i < s.nodes.size(); ++i) {
            CommitPoint cp{std::max(s.nodes[i].term, 1), longest + 1};
            if (!(s.nodes[i].commit == cp)) {
                ReplState t = s;
                t.nodes[i].commit = cp;
                return {{"LearnCommitPointFromSyncSourceNeverBeyondLastApplied",
                         std::move(t), "n" + std::to_string(i + 1)}};
            }
        }
        return std::nullopt;
    }
};

} // namespace

std::string trace_to_jsonl(const std::vector<TraceEvent>& events) {
    std::string out;
    for (const TraceEvent& e : events) {
        ordered_json j;
        j["ts_ms"] = e.ts_ms;
        j["node"] = e.node;
        j["action"] = e.action;
        j["role"] = role_name(e.role);
        j["term"] = e.term;
        j["commitPoint"] = {{"term", e.commit.term}, {"index", e.commit.index}};
        j["oplog"] = e.oplog;
        if (e.oplog_start != 1)
            j["oplog_start"] = e.oplog_start;
        out += j.dump();
        out += "\n";
    }
    return out;
}

std::vector<TraceEvent> trace_from_jsonl(const std::string& text) {
    std::vector<TraceEvent> events;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        if (line.empty())
            continue;
        ordered_json j = ordered_json::parse(line);
        TraceEvent e;
        e.ts_ms = j.at("ts_ms").get<std::int64_t>();
        e.node = j.at("node").get<std::string>();
        e.action = j.at("action").get<std::string>();
        e.role = role_from(j.at("role").get<std::string>());
        e.term = j.at("term").get<int>();
        e.commit.term = j.at("commitPoint").at("term").get<int>();
        e.commit.index = j.at("commitPoint").at("index").get<std::size_t>();
        e.oplog = j.at("oplog").get<std::vector<int>>();
        if (j.contains("oplog_start"))
            e.oplog_start = j.at("oplog_start").get<std::size_t>();
        events.push_back(std::move(e));
    }
    return events;
}

EventLogger::EventLogger() = default;

EventLogger::EventLogger(Clock clock) : clock_(std::move(clock)) {
    if (!clock_)
        clock_ = [] {
            return std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                .count();
        };
}

std::int64_t EventLogger::stamp() {
    if (!clock_)
        return ++last_; // logical mode
    std::int64_t t = clock_();
    while (t == last_) // same millisecond: wait it out
        t = clock_();
    if (t < last_)
        throw std::runtime_error("Clock went backwards");
    last_ = t;
    return t;
}

std::map<std::string, int> default_action_weights() {
    return {
        {"AppendOplog", 4},
        {"RollbackOplog", 4},
        {"UpdateTermThroughHeartbeat", 4},
        {"LearnCommitPointWithTermCheck", 4},
        {"LearnCommitPointFromSyncSourceNeverBeyondLastApplied", 4},
        {"ClientWrite", 4},
        {"AdvanceCommitPoint", 4},
        {"BecomePrimaryByMagic", 1},
        {"Stepdown", 1},
    };
}

SimResult simulate(const SimConfig& config) {
    std::mt19937_64 rng(config.seed);
    EventLogger logger = config.wall_clock ? EventLogger(EventLogger::Clock{nullptr})
                                           : EventLogger();

    std::map<std::string, int> weights = default_action_weights();
    for (const auto& [k, v] : config.weights)
        weights[k] = v;
    auto weight_of = [&](const std::string& action) {
        auto it = weights.find(action);
        return it == weights.end() ? 1 : std::max(it->second, 0);
    };

    SimResult result;
    ReplState state = initial_repl_state(config.params);

    auto take = [&](const std::string& label_or_action, const std::string& node,
                    ReplState next) {
        state = std::move(next);
        result.events.push_back(
            event_for(logger.stamp(), node, label_or_action, state));
    };

    auto pick_step = [&](bool drain, std::size_t step) -> bool {
        std::vector<std::pair<mck::ActionLabel, ReplState>> candidates;
        for (auto& [label, t] : successors(config.params, state)) {
            std::string action = label_action(label);
            if (!within_bounds(config.params, t))
                continue;
            if (drain) {
                if (!is_gossip(action))
                    continue;
            } else if (partition_blocks(config.partitions, step, label_node(label),
                                        label_src(label))) {
                continue;
            }
            if (weight_of(action) > 0)
                candidates.push_back({label, std::move(t)});
        }
        if (candidates.empty())
            return false;
        std::uint64_t total = 0;
        for (auto& [label, t] : candidates)
            total += static_cast<std::uint64_t>(weight_of(label_action(label)));
        std::uint64_t at = rng() % total;
        for (auto& [label, t] : candidates) {
            std::uint64_t w = static_cast<std::uint64_t>(weight_of(label_action(label)));
            if (at < w) {
                take(label_action(label), label_node(label), std::move(t));
                return true;
            }
            at -= w;
        }
        return false; // unreachable
    };

    auto try_inject = [&]() {
        if (config.inject.empty())
            return false;
        auto hit = Injector::attempt(config.inject, state);
        if (!hit)
            return false;
        auto& [action, t, node] = *hit;
        take(action, node, std::move(t));
        result.injected_steps.push_back(result.events.size() - 1);
        return true;
    };

    for (std::size_t step = 0; step < config.steps; ++step) {
        if (!config.inject.empty() && rng() % config.inject_rate == 0 && try_inject())
            continue;
        if (!pick_step(/*drain=*/false, step)) {
            // Quiescent under the bounds; a pending injection still gets its
            // chance before the run ends.
            if (result.injected_steps.empty() && try_inject())
                continue;
            break;
        }
    }

    // Drain: replication and gossip only, partitions healed, no injections.
    for (std::size_t i = 0; i < 10 * config.steps; ++i)
        if (!pick_step(/*drain=*/true, config.steps + i))
            break;

    result.final_state = state;
    CommitPoint first = state.nodes.front().commit;
    result.converged = std::all_of(state.nodes.begin(), state.nodes.end(),
                                   [&](const NodeState& n) { return n.commit == first; });

    std::ostringstream sum;
    sum << "seed=" << config.seed << " events=" << result.events.size()
        << " injected=" << result.injected_steps.size()
        << " converged=" << (result.converged ? "yes" : "no") << " commit="
        << first.term << "." << first.index;
    result.summary = sum.str();
    return result;
}

} // namespace mbt::repl
