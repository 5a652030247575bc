#pragma once

#include <stdexcept>
#include <string>

#include <mbt/mck/explore.hpp>

namespace mbt::mck {

struct DotParseError : std::runtime_error {
    DotParseError(std::size_t line, std::size_t column, const std::string& message);
    std::size_t line;
    std::size_t column;
};

struct UnknownNodeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Emits a GraphViz DOT digraph. Node ids are 64-bit fingerprints of the
/// canonical state encoding; node labels carry the encoding itself; edge
/// labels carry the action. Output is byte-stable across runs.
std::string export_dot(const StateGraph& graph);

/// Reconstructs a StateGraph from text emitted by export_dot. Stats,
/// depths and predecessors are recomputed.
StateGraph parse_dot(const std::string& text);

} // namespace mbt::mck
