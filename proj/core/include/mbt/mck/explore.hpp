#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <variant>
#include <vector>

#include <mbt/mck/model.hpp>

namespace mbt::mck {

struct GraphStats {
    std::size_t distinct_states = 0;
    std::size_t transitions = 0;
    std::size_t depth = 0;

    friend bool operator==(const GraphStats&, const GraphStats&) = default;
};

/// Edge endpoints are indices into StateGraph::states.
struct Edge {
    std::uint32_t from = 0;
    std::uint32_t to = 0;
    ActionLabel label;

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct Predecessor {
    std::uint32_t from = 0;
    ActionLabel label;
};

/// The reachable, constraint-satisfying state graph. States appear in
/// breadth-first discovery order. `predecessors[i]` records the first
/// discovery of state i (absent for initial states); following it always
/// reaches an initial state in at most `stats.depth` steps.
struct StateGraph {
    std::vector<State> states;
    std::vector<Edge> edges; // empty when explored with record_edges=false
    std::vector<std::optional<Predecessor>> predecessors;
    std::vector<std::uint32_t> out_degree;
    std::vector<std::uint32_t> depth;
    std::size_t initial_count = 0;
    GraphStats stats;

    std::optional<std::uint32_t> find(const State& s) const;
    std::vector<std::uint32_t> terminal_states() const;

    /// Set equality on states and labeled edges (node order irrelevant).
    bool same_graph(const StateGraph& other) const;
};

/// A safety violation with its shortest (breadth-first) counterexample
/// path from an initial state.
struct Violation {
    std::string invariant_name;
    State state;
    std::vector<std::pair<ActionLabel, State>> path; // path[0].first == "" (initial)
};

struct LimitExceeded {
    std::string which; // "max_states" or "max_depth"
    std::size_t limit = 0;
};

struct ExploreLimits {
    std::size_t max_states = 10'000'000;
    std::size_t max_depth = 10'000;
};

struct ExploreOptions {
    ExploreLimits limits;
    bool record_edges = true;
};

using ExploreResult = std::variant<StateGraph, Violation, LimitExceeded>;

/// Exhaustive breadth-first exploration. Deterministic given the model:
/// the resulting graph (and the first violation, if any) does not depend
/// on anything but the model definition and the limits.
ExploreResult explore(const ModelDefinition& model, const ExploreOptions& options = {});

} // namespace mbt::mck
