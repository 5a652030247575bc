#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace mbt::mck {

/// A model state as seen by the generic kernel. Concrete models provide a
/// canonical, byte-comparable encoding; two states are equal iff their
/// encodings are byte-identical.
struct State {
    std::string canonical;

    friend bool operator==(const State&, const State&) = default;
    friend auto operator<=>(const State&, const State&) = default;
};

using ActionLabel = std::string;

struct Invariant {
    std::string name;
    std::function<bool(const State&)> holds;
};

/// Everything the kernel needs to exhaustively explore a model. `next` must
/// be a pure function of the state: same input, same transition list, same
/// order.
struct ModelDefinition {
    std::vector<State> initial_states;
    std::function<std::vector<std::pair<ActionLabel, State>>(const State&)> next;
    std::vector<Invariant> invariants;
    // Optional: successors failing the constraint are pruned (not added to
    // the graph, no edge recorded).
    std::function<bool(const State&)> constraint;
};

} // namespace mbt::mck
