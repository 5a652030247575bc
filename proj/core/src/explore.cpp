#include <mbt/mck/explore.hpp>

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace mbt::mck {

std::optional<std::uint32_t> StateGraph::find(const State& s) const
{
    for (std::uint32_t i = 0; i < states.size(); ++i) {
        if (states[i] == s)
            return i;
    }
    return std::nullopt;
}

std::vector<std::uint32_t> StateGraph::terminal_states() const
{
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 0; i < out_degree.size(); ++i) {
        if (out_degree[i] == 0)
            out.push_back(i);
    }
    return out;
}

bool StateGraph::same_graph(const StateGraph& other) const
{
    auto state_set = [](const StateGraph& g) {
        std::vector<std::string> v;
        v.reserve(g.states.size());
        for (const auto& s : g.states)
            v.push_back(s.canonical);
        std::sort(v.begin(), v.end());
        return v;
    };
    auto edge_set = [](const StateGraph& g) {
        std::vector<std::tuple<std::string, std::string, std::string>> v;
        v.reserve(g.edges.size());
        for (const auto& e : g.edges)
            v.emplace_back(g.states[e.from].canonical, e.label, g.states[e.to].canonical);
        std::sort(v.begin(), v.end());
        return v;
    };
    return state_set(*this) == state_set(other) && edge_set(*this) == edge_set(other);
}

namespace {

std::vector<std::pair<ActionLabel, State>> trace_path(const StateGraph& g, std::uint32_t id)
{
    std::vector<std::pair<ActionLabel, State>> path;
    std::uint32_t cur = id;
    while (true) {
        const auto& pred = g.predecessors[cur];
        if (!pred) {
            path.emplace_back("", g.states[cur]);
            break;
        }
        path.emplace_back(pred->label, g.states[cur]);
        cur = pred->from;
    }
    std::reverse(path.begin(), path.end());
    return path;
}

} // namespace

ExploreResult explore(const ModelDefinition& model, const ExploreOptions& options)
{
    if (model.initial_states.empty())
        throw std::invalid_argument("explore: model has no initial states");
    if (options.limits.max_states == 0 || options.limits.max_depth == 0)
        throw std::invalid_argument("explore: limits must be positive");

    StateGraph graph;
    std::unordered_map<std::string, std::uint32_t> seen;
    std::deque<std::uint32_t> frontier;

    // Sorted initial states make the breadth-first order (and therefore the
    // first violation and the DOT export) independent of caller ordering.
    std::vector<State> initials = model.initial_states;
    std::sort(initials.begin(), initials.end());
    initials.erase(std::unique(initials.begin(), initials.end()), initials.end());

    auto add_state = [&](const State& s, std::optional<Predecessor> pred,
                         std::uint32_t d) -> std::optional<std::uint32_t> {
        auto [it, inserted] = seen.emplace(s.canonical, static_cast<std::uint32_t>(graph.states.size()));
        if (!inserted)
            return it->second;
        graph.states.push_back(s);
        graph.predecessors.push_back(pred);
        graph.out_degree.push_back(0);
        graph.depth.push_back(d);
        frontier.push_back(it->second);
        return it->second;
    };

    for (const auto& s : initials) {
        if (model.constraint && !model.constraint(s))
            continue;
        add_state(s, std::nullopt, 0);
    }
    graph.initial_count = graph.states.size();

    // Invariants are checked in discovery order, which is breadth-first, so
    // the first violating state found has a shortest counterexample path.
    auto check_invariants = [&](std::uint32_t id) -> std::optional<Violation> {
        for (const auto& inv : model.invariants) {
            if (!inv.holds(graph.states[id])) {
                Violation v;
                v.invariant_name = inv.name;
                v.state = graph.states[id];
                v.path = trace_path(graph, id);
                return v;
            }
        }
        return std::nullopt;
    };

    for (std::uint32_t i = 0; i < graph.initial_count; ++i) {
        if (auto v = check_invariants(i))
            return *v;
    }

    while (!frontier.empty()) {
        std::uint32_t cur = frontier.front();
        frontier.pop_front();

        std::uint32_t next_depth = graph.depth[cur] + 1;
        if (next_depth > options.limits.max_depth)
            return LimitExceeded{"max_depth", options.limits.max_depth};

        auto succs = model.next(graph.states[cur]);
        for (const auto& [label, succ] : succs) {
            if (model.constraint && !model.constraint(succ))
                continue;
            graph.out_degree[cur] += 1;
            graph.stats.transitions += 1;

            std::size_t before = graph.states.size();
            auto id = add_state(succ, Predecessor{cur, label}, next_depth);
            bool is_new = graph.states.size() > before;
            if (options.record_edges)
                graph.edges.push_back(Edge{cur, *id, label});
            if (graph.states.size() > options.limits.max_states)
                return LimitExceeded{"max_states", options.limits.max_states};
            if (is_new) {
                if (auto v = check_invariants(*id))
                    return *v;
            }
        }
    }

    graph.stats.distinct_states = graph.states.size();
    graph.stats.depth = graph.depth.empty() ? 0 : *std::max_element(graph.depth.begin(), graph.depth.end());
    return graph;
}

} // namespace mbt::mck
