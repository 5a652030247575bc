#include <mbt/ot/ops.hpp>

#include <charconv>

namespace mbt::ot {

OpKind kind_of(const ArrayOp& op)
{
    return static_cast<OpKind>(op.index());
}

std::string kind_name(OpKind kind)
{
    switch (kind) {
        case OpKind::Set:
            return "Set";
        case OpKind::Insert:
            return "Insert";
        case OpKind::Move:
            return "Move";
        case OpKind::Swap:
            return "Swap";
        case OpKind::Erase:
            return "Erase";
        case OpKind::Clear:
            return "Clear";
    }
    return "?";
}

ArrayState apply(const ArrayState& state, const TaggedOp& tagged)
{
    if (tagged.discarded)
        return state;

    ArrayState out = state;
    auto& v = out.elems;
    auto check = [&](std::size_t ndx, std::size_t bound) {
        if (ndx >= bound)
            throw IndexError("apply: index " + std::to_string(ndx) + " out of range for " +
                             render_op(tagged.op) + " on " + render_array(state));
    };

    std::visit(
        [&](const auto& op) {
            using T = std::decay_t<decltype(op)>;
            if constexpr (std::is_same_v<T, SetOp>) {
                check(op.ndx, v.size());
                v[op.ndx] = op.value;
            }
            else if constexpr (std::is_same_v<T, InsertOp>) {
                check(op.ndx, v.size() + 1);
                v.insert(v.begin() + static_cast<std::ptrdiff_t>(op.ndx), op.value);
            }
            else if constexpr (std::is_same_v<T, MoveOp>) {
                check(op.from, v.size());
                check(op.to, v.size());
                Element moved = v[op.from];
                v.erase(v.begin() + static_cast<std::ptrdiff_t>(op.from));
                v.insert(v.begin() + static_cast<std::ptrdiff_t>(op.to), moved);
            }
            else if constexpr (std::is_same_v<T, SwapOp>) {
                check(op.ndx1, v.size());
                check(op.ndx2, v.size());
                std::swap(v[op.ndx1], v[op.ndx2]);
            }
            else if constexpr (std::is_same_v<T, EraseOp>) {
                check(op.ndx, v.size());
                v.erase(v.begin() + static_cast<std::ptrdiff_t>(op.ndx));
            }
            else if constexpr (std::is_same_v<T, ClearOp>) {
                v.clear();
            }
        },
        tagged.op);
    return out;
}

bool wins(const TaggedOp& a, const TaggedOp& b)
{
    if (a.timestamp != b.timestamp)
        return a.timestamp > b.timestamp;
    return a.client > b.client;
}

std::string render_op(const ArrayOp& op)
{
    return std::visit(
        [](const auto& o) -> std::string {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, SetOp>)
                return "Set(" + std::to_string(o.ndx) + "," + std::to_string(o.value) + ")";
            else if constexpr (std::is_same_v<T, InsertOp>)
                return "Ins(" + std::to_string(o.ndx) + "," + std::to_string(o.value) + ")";
            else if constexpr (std::is_same_v<T, MoveOp>)
                return "Mov(" + std::to_string(o.from) + "," + std::to_string(o.to) + ")";
            else if constexpr (std::is_same_v<T, SwapOp>)
                return "Swp(" + std::to_string(o.ndx1) + "," + std::to_string(o.ndx2) + ")";
            else if constexpr (std::is_same_v<T, EraseOp>)
                return "Era(" + std::to_string(o.ndx) + ")";
            else
                return "Clr";
        },
        op);
}

std::string render_tagged(const TaggedOp& op)
{
    std::string out = render_op(op.op) + "@" + std::to_string(op.client) + "#" + std::to_string(op.seq);
    if (op.timestamp != 0)
        out += "~" + std::to_string(op.timestamp);
    if (op.discarded)
        out += "!";
    return out;
}

namespace {

struct Scan {
    const std::string& s;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& msg) const
    {
        throw std::invalid_argument("parse error in '" + s + "' at " + std::to_string(pos) + ": " + msg);
    }
    bool eat(char c)
    {
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    void expect(char c)
    {
        if (!eat(c))
            fail(std::string("expected '") + c + "'");
    }
    long number()
    {
        long value = 0;
        auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + s.size(), value);
        if (ec != std::errc())
            fail("expected number");
        pos = static_cast<std::size_t>(ptr - s.data());
        return value;
    }
};

ArrayOp parse_op_at(Scan& sc)
{
    auto word = [&](const char* w) {
        std::size_t len = std::string_view(w).size();
        if (sc.s.compare(sc.pos, len, w) == 0) {
            sc.pos += len;
            return true;
        }
        return false;
    };
    auto two_args = [&](auto make) {
        sc.expect('(');
        long a = sc.number();
        sc.expect(',');
        long b = sc.number();
        sc.expect(')');
        return make(a, b);
    };
    if (word("Set"))
        return two_args([](long a, long b) -> ArrayOp {
            return SetOp{static_cast<std::size_t>(a), static_cast<Element>(b)};
        });
    if (word("Ins"))
        return two_args([](long a, long b) -> ArrayOp {
            return InsertOp{static_cast<std::size_t>(a), static_cast<Element>(b)};
        });
    if (word("Mov"))
        return two_args([](long a, long b) -> ArrayOp {
            return MoveOp{static_cast<std::size_t>(a), static_cast<std::size_t>(b)};
        });
    if (word("Swp"))
        return two_args([](long a, long b) -> ArrayOp {
            return SwapOp{static_cast<std::size_t>(a), static_cast<std::size_t>(b)};
        });
    if (word("Era")) {
        sc.expect('(');
        long a = sc.number();
        sc.expect(')');
        return EraseOp{static_cast<std::size_t>(a)};
    }
    if (word("Clr"))
        return ClearOp{};
    sc.fail("unknown op kind");
}

} // namespace

ArrayOp parse_op(const std::string& text)
{
    Scan sc{text};
    ArrayOp op = parse_op_at(sc);
    if (sc.pos != text.size())
        sc.fail("trailing characters");
    return op;
}

TaggedOp parse_tagged(const std::string& text)
{
    Scan sc{text};
    TaggedOp out;
    out.op = parse_op_at(sc);
    sc.expect('@');
    out.client = static_cast<int>(sc.number());
    sc.expect('#');
    out.seq = static_cast<int>(sc.number());
    if (sc.eat('~'))
        out.timestamp = static_cast<int>(sc.number());
    if (sc.eat('!'))
        out.discarded = true;
    if (sc.pos != text.size())
        sc.fail("trailing characters");
    return out;
}

std::string render_array(const ArrayState& a)
{
    std::string out = "[";
    for (std::size_t i = 0; i < a.elems.size(); ++i) {
        if (i)
            out += ",";
        out += std::to_string(a.elems[i]);
    }
    return out + "]";
}

ArrayState parse_array(const std::string& text)
{
    Scan sc{text};
    sc.expect('[');
    ArrayState out;
    if (!sc.eat(']')) {
        while (true) {
            out.elems.push_back(static_cast<Element>(sc.number()));
            if (sc.eat(']'))
                break;
            sc.expect(',');
        }
    }
    if (sc.pos != text.size())
        sc.fail("trailing characters");
    return out;
}

} // namespace mbt::ot
