#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace mbt::ot {

/// Array elements are opaque integer payloads compared by equality.
using Element = int;

struct ArrayState {
    std::vector<Element> elems;

    std::size_t size() const { return elems.size(); }
    friend bool operator==(const ArrayState&, const ArrayState&) = default;
};

struct SetOp {
    std::size_t ndx;
    Element value;
    friend bool operator==(const SetOp&, const SetOp&) = default;
};
struct InsertOp {
    std::size_t ndx; // may equal the array length (append)
    Element value;
    friend bool operator==(const InsertOp&, const InsertOp&) = default;
};
/// Remove the element at `from`, then reinsert it so that it lands at
/// index `to` of the resulting array (`to` is a post-removal index).
struct MoveOp {
    std::size_t from;
    std::size_t to;
    friend bool operator==(const MoveOp&, const MoveOp&) = default;
};
struct SwapOp {
    std::size_t ndx1;
    std::size_t ndx2;
    friend bool operator==(const SwapOp&, const SwapOp&) = default;
};
struct EraseOp {
    std::size_t ndx;
    friend bool operator==(const EraseOp&, const EraseOp&) = default;
};
struct ClearOp {
    friend bool operator==(const ClearOp&, const ClearOp&) = default;
};

using ArrayOp = std::variant<SetOp, InsertOp, MoveOp, SwapOp, EraseOp, ClearOp>;

enum class OpKind { Set, Insert, Move, Swap, Erase, Clear };

OpKind kind_of(const ArrayOp& op);
std::string kind_name(OpKind kind);

/// An operation with its origin metadata. (client, seq) is unique within a
/// history; a discarded op is a no-op under apply.
struct TaggedOp {
    ArrayOp op;
    int client = 0;
    int seq = 0;
    int timestamp = 0; // constant in the model; kept for the LWW order
    bool discarded = false;

    friend bool operator==(const TaggedOp&, const TaggedOp&) = default;
};

struct IndexError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Applies one operation. Out-of-range indices are a caller contract
/// violation (model generation never produces them) and throw IndexError.
ArrayState apply(const ArrayState& state, const TaggedOp& op);

/// True iff a's (timestamp, client) pair is lexicographically greater than
/// b's: the last-write-wins total order. a and b must come from different
/// clients, so the pairs are never equal.
bool wins(const TaggedOp& a, const TaggedOp& b);

/// Compact one-line renderings, also used in canonical state encodings:
/// "Set(1,4)", "Ins(0,5)", "Mov(2,0)", "Swp(0,2)", "Era(1)", "Clr".
std::string render_op(const ArrayOp& op);
std::string render_tagged(const TaggedOp& op); // "Set(1,4)@2#1" + "!" if discarded
ArrayOp parse_op(const std::string& text);
TaggedOp parse_tagged(const std::string& text);

std::string render_array(const ArrayState& a); // "[1,2,3]"
ArrayState parse_array(const std::string& text);

} // namespace mbt::ot
