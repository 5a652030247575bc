#include <mbt/ot/transform.hpp>

#include <algorithm>
#include <cstddef>
#include <stdexcept>

namespace mbt::ot {
namespace {

// Index of a position after a move is applied: the moved element lands at
// `to`, everything else shifts around the removal/insertion pair.
std::size_t remap_through_move(std::size_t k, const MoveOp& m) {
    if (k == m.from)
        return m.to;
    if (k > m.from)
        k -= 1;
    if (k >= m.to)
        k += 1;
    return k;
}

std::size_t remap_through_swap(std::size_t k, const SwapOp& w) {
    if (k == w.ndx1)
        return w.ndx2;
    if (k == w.ndx2)
        return w.ndx1;
    return k;
}

// --- Same-kind rules -------------------------------------------------------

void merge_set_set(TaggedOp& x, TaggedOp& y, std::string& label) {
    auto& s = std::get<SetOp>(x.op);
    auto& t = std::get<SetOp>(y.op);
    if (s.ndx == t.ndx) {
        (wins(x, y) ? y : x).discarded = true;
        label = "same-index-lww";
    } else {
        label = "no-overlap";
    }
}

void merge_insert_insert(TaggedOp& x, TaggedOp& y, std::string& label) {
    auto& a = std::get<InsertOp>(x.op);
    auto& b = std::get<InsertOp>(y.op);
    if (a.ndx < b.ndx) {
        b.ndx += 1;
        label = "no-overlap";
    } else if (a.ndx > b.ndx) {
        a.ndx += 1;
        label = "no-overlap";
    } else {
        // Same insertion point: elements end up in increasing priority
        // order, so the winner's insertion steps over the loser's element.
        (wins(x, y) ? a : b).ndx += 1;
        label = "same-index-priority";
    }
}

void merge_move_move(TaggedOp& x, TaggedOp& y, std::string& label) {
    auto& a = std::get<MoveOp>(x.op);
    auto& b = std::get<MoveOp>(y.op);

    // Removal vs removal.
    if (a.from < b.from) {
        b.from -= 1;
    } else if (a.from > b.from) {
        a.from -= 1;
    } else {
        // Both move the same element: the winner takes over, chasing the
        // element to wherever the loser put it.
        TaggedOp& winner = wins(x, y) ? x : y;
        TaggedOp& loser = wins(x, y) ? y : x;
        auto& wm = std::get<MoveOp>(winner.op);
        wm.from = std::get<MoveOp>(loser.op).to;
        loser.discarded = true;
        if (wm.from == wm.to)
            winner.discarded = true;
        label = "same-element-lww";
        return;
    }

    bool dest_tie = false;
    // a's insertion vs b's removal.
    if (a.to > b.from)
        a.to -= 1;
    else
        b.from += 1;
    // a's removal vs b's insertion.
    if (a.from < b.to)
        b.to -= 1;
    else
        a.from += 1;
    // Insertion vs insertion.
    if (a.to < b.to) {
        b.to += 1;
    } else if (a.to > b.to) {
        a.to += 1;
    } else {
        (wins(x, y) ? a : b).to += 1;
        dest_tie = true;
    }

    bool degenerate = false;
    if (a.from == a.to) {
        x.discarded = true;
        degenerate = true;
    }
    if (b.from == b.to) {
        y.discarded = true;
        degenerate = true;
    }
    label = dest_tie ? "same-destination-priority"
                     : (degenerate ? "degenerate-discard" : "adjusted");
}

void merge_swap_swap(TaggedOp& x, TaggedOp& y, std::string& label) {
    auto& a = std::get<SwapOp>(x.op);
    auto& b = std::get<SwapOp>(y.op);
    auto norm = [](const SwapOp& w) {
        return std::pair{std::min(w.ndx1, w.ndx2), std::max(w.ndx1, w.ndx2)};
    };
    if (norm(a) == norm(b)) {
        x.discarded = true;
        y.discarded = true;
        label = "identical-discard";
        return;
    }
    // Winner's transposition stands; the loser's is conjugated through it
    // so that winner-then-loser' equals loser-then-winner'.
    const auto& wsw = std::get<SwapOp>((wins(x, y) ? x : y).op);
    auto& lsw = std::get<SwapOp>((wins(x, y) ? y : x).op);
    SwapOp before = lsw;
    lsw.ndx1 = remap_through_swap(lsw.ndx1, wsw);
    lsw.ndx2 = remap_through_swap(lsw.ndx2, wsw);
    label = (norm(lsw) == norm(before)) ? "disjoint" : "overlap-lww";
}

void merge_erase_erase(TaggedOp& x, TaggedOp& y, std::string& label) {
    auto& a = std::get<EraseOp>(x.op);
    auto& b = std::get<EraseOp>(y.op);
    if (a.ndx == b.ndx) {
        x.discarded = true;
        y.discarded = true;
        label = "same-index-discard";
    } else {
        (a.ndx > b.ndx ? a.ndx : b.ndx) -= 1;
        label = "shift";
    }
}

void merge_clear_clear(TaggedOp& x, TaggedOp& y, std::string& label) {
    (wins(x, y) ? y : x).discarded = true;
    label = "lww";
}

// --- Mixed-kind rules (first argument has the lower kind) ------------------

void merge_set_insert(TaggedOp& x, TaggedOp& y, std::string& label) {
    auto& s = std::get<SetOp>(x.op);
    const auto& i = std::get<InsertOp>(y.op);
    if (s.ndx >= i.ndx) {
        s.ndx += 1;
        label = "set-shifted";
    } else {
        label = "no-overlap";
    }
}

void merge_set_move(TaggedOp& x, TaggedOp& y, std::string& label) {
    auto& s = std::get<SetOp>(x.op);
    const auto& m = std::get<MoveOp>(y.op);
    std::size_t moved = remap_through_move(s.ndx, m);
    if (s.ndx == m.from)
        label = "set-follows-move";
    else
        label = (moved == s.ndx) ? "no-overlap" : "index-adjusted";
    s.ndx = moved;
}

void merge_set_swap(TaggedOp& x, TaggedOp& y, std::string& label) {
    auto& s = std::get<SetOp>(x.op);
    const auto& w = std::get<SwapOp>(y.op);
    std::size_t moved = remap_through_swap(s.ndx, w);
    label = (moved == s.ndx) ? "no-overlap" : "set-follows-swap";
    s.ndx = moved;
}

void merge_set_erase(TaggedOp& x, TaggedOp& y, std::string& label) {
    auto& s = std::get<SetOp>(x.op);
    const auto& e = std::get<EraseOp>(y.op);
    if (s.ndx == e.ndx) {
        x.discarded = true;
        label = "same-index-discard";
    } else if (s.ndx > e.ndx) {
        s.ndx -= 1;
        label = "shift-left";
    } else {
        label = "no-overlap";
    }
}

void merge_set_clear(TaggedOp& x, TaggedOp&, std::string& label) {
    x.discarded = true;
    label = "set-discarded";
}

void merge_insert_move(TaggedOp& x, TaggedOp& y, std::string& label) {
    auto& i = std::get<InsertOp>(x.op);
    auto& m = std::get<MoveOp>(y.op);
    // Insertion vs the move's removal.
    if (i.ndx > m.from)
        i.ndx -= 1;
    else
        m.from += 1;
    // Insertion vs the move's insertion.
    if (i.ndx < m.to) {
        m.to += 1;
        label = "adjusted";
    } else if (i.ndx > m.to) {
        i.ndx += 1;
        label = "adjusted";
    } else {
        (wins(x, y) ? i.ndx : m.to) += 1;
        label = "dest-tie-priority";
    }
}

void merge_insert_swap(TaggedOp& x, TaggedOp& y, std::string& label) {
    const auto& i = std::get<InsertOp>(x.op);
    auto& w = std::get<SwapOp>(y.op);
    bool changed = false;
    for (std::size_t* k : {&w.ndx1, &w.ndx2}) {
        if (*k >= i.ndx) {
            *k += 1;
            changed = true;
        }
    }
    label = changed ? "swap-adjusted" : "no-overlap";
}

void merge_insert_erase(TaggedOp& x, TaggedOp& y, std::string& label) {
    auto& i = std::get<InsertOp>(x.op);
    auto& e = std::get<EraseOp>(y.op);
    if (i.ndx <= e.ndx) {
        e.ndx += 1;
        label = "erase-shifted";
    } else {
        i.ndx -= 1;
        label = "insert-shifted";
    }
}

void merge_insert_clear(TaggedOp& x, TaggedOp&, std::string& label) {
    x.discarded = true;
    label = "insert-discarded";
}

void merge_move_swap(TaggedOp& x, TaggedOp& y, std::string& label) {
    const auto& m = std::get<MoveOp>(x.op);
    auto& w = std::get<SwapOp>(y.op);
    bool follows = (w.ndx1 == m.from || w.ndx2 == m.from);
    SwapOp before = w;
    w.ndx1 = remap_through_move(w.ndx1, m);
    w.ndx2 = remap_through_move(w.ndx2, m);
    if (follows)
        label = "swap-follows-moved-element";
    else
        label = (w.ndx1 == before.ndx1 && w.ndx2 == before.ndx2) ? "no-overlap"
                                                                 : "swap-adjusted";
}

void merge_move_erase(TaggedOp& x, TaggedOp& y, std::string& label) {
    auto& m = std::get<MoveOp>(x.op);
    auto& e = std::get<EraseOp>(y.op);
    if (e.ndx == m.from) {
        // The erased element was moved: chase it, drop the move.
        e.ndx = m.to;
        x.discarded = true;
        label = "moved-element-erased";
        return;
    }
    if (e.ndx > m.from)
        e.ndx -= 1;
    else
        m.from -= 1;
    if (e.ndx >= m.to)
        e.ndx += 1;
    else
        m.to -= 1;
    if (m.from == m.to) {
        x.discarded = true;
        label = "degenerate-discard";
    } else {
        label = "adjusted";
    }
}

void merge_move_clear(TaggedOp& x, TaggedOp&, std::string& label) {
    x.discarded = true;
    label = "move-discarded";
}

void merge_swap_erase(TaggedOp& x, TaggedOp& y, std::string& label) {
    auto& w = std::get<SwapOp>(x.op);
    auto& e = std::get<EraseOp>(y.op);
    std::size_t lo = std::min(w.ndx1, w.ndx2);
    std::size_t hi = std::max(w.ndx1, w.ndx2);
    if (e.ndx == lo || e.ndx == hi) {
        // One swapped element is gone; the survivor still has to travel to
        // the other slot, which an erase-adjusted move expresses exactly.
        MoveOp mv = (e.ndx == hi) ? MoveOp{lo, hi - 1} : MoveOp{hi - 1, lo};
        e.ndx = remap_through_swap(e.ndx, w);
        x.op = mv;
        if (mv.from == mv.to)
            x.discarded = true;
        label = "swapped-element-erased";
        return;
    }
    bool changed = false;
    for (std::size_t* k : {&w.ndx1, &w.ndx2}) {
        if (*k > e.ndx) {
            *k -= 1;
            changed = true;
        }
    }
    label = changed ? "adjusted" : "no-overlap";
}

void merge_swap_clear(TaggedOp& x, TaggedOp&, std::string& label) {
    x.discarded = true;
    label = "swap-discarded";
}

void merge_erase_clear(TaggedOp& x, TaggedOp&, std::string& label) {
    x.discarded = true;
    label = "erase-discarded";
}

using SortedRule = void (*)(TaggedOp&, TaggedOp&, std::string&);

// Indexed by [min kind][max kind].
constexpr SortedRule kRules[6][6] = {
    {merge_set_set, merge_set_insert, merge_set_move, merge_set_swap,
     merge_set_erase, merge_set_clear},
    {nullptr, merge_insert_insert, merge_insert_move, merge_insert_swap,
     merge_insert_erase, merge_insert_clear},
    {nullptr, nullptr, merge_move_move, merge_move_swap, merge_move_erase,
     merge_move_clear},
    {nullptr, nullptr, nullptr, merge_swap_swap, merge_swap_erase,
     merge_swap_clear},
    {nullptr, nullptr, nullptr, nullptr, merge_erase_erase, merge_erase_clear},
    {nullptr, nullptr, nullptr, nullptr, nullptr, merge_clear_clear},
};

bool builtin_rule(TaggedOp& a, TaggedOp& b, std::string& label) {
    OpKind ka = kind_of(a.op);
    OpKind kb = kind_of(b.op);
    TaggedOp& x = (ka <= kb) ? a : b;
    TaggedOp& y = (ka <= kb) ? b : a;
    kRules[static_cast<int>(std::min(ka, kb))][static_cast<int>(std::max(ka, kb))](
        x, y, label);
    return true;
}

void report(const RuleCaseSink& sink, OpKind ka, OpKind kb, const std::string& label) {
    if (sink)
        sink(RuleCase{std::min(ka, kb), std::max(ka, kb), label});
}

} // namespace

NonTerminationError::NonTerminationError(mck::NonTermination d)
    : std::runtime_error("merge rule exceeded its step budget of " +
                         std::to_string(d.budget) + " on inputs [" + d.inputs + "]"),
      diag(std::move(d)) {}

std::variant<std::pair<TaggedOp, TaggedOp>, mck::NonTermination>
transform_with_rule(const MergeRule& rule, TaggedOp a, TaggedOp b, std::size_t budget) {
    std::string label;
    auto step = [&](std::size_t) -> std::optional<std::pair<TaggedOp, TaggedOp>> {
        if (rule(a, b, label))
            return std::pair{a, b};
        return std::nullopt;
    };
    auto res = mck::run_budgeted(step, budget, render_tagged(a) + ", " + render_tagged(b));
    if (auto* nt = std::get_if<mck::NonTermination>(&res))
        return *nt;
    return std::get<std::pair<TaggedOp, TaggedOp>>(res);
}

std::pair<TaggedOp, TaggedOp> transform(const TaggedOp& a, const TaggedOp& b,
                                        const RuleCaseSink& sink, std::size_t budget) {
    OpKind ka = kind_of(a.op);
    OpKind kb = kind_of(b.op);
    if (a.discarded || b.discarded) {
        report(sink, ka, kb, "discarded-input");
        return {a, b};
    }
    TaggedOp ta = a;
    TaggedOp tb = b;
    std::string label;
    auto step = [&](std::size_t) -> std::optional<int> {
        return builtin_rule(ta, tb, label) ? std::optional<int>{0} : std::nullopt;
    };
    auto res = mck::run_budgeted(step, budget, render_tagged(a) + ", " + render_tagged(b));
    if (auto* nt = std::get_if<mck::NonTermination>(&res))
        throw NonTerminationError(*nt);
    report(sink, ka, kb, label);
    return {ta, tb};
}

std::pair<std::vector<TaggedOp>, std::vector<TaggedOp>>
transform_window(std::vector<TaggedOp> incoming, std::vector<TaggedOp> window,
                 const RuleCaseSink& sink) {
    for (TaggedOp& in : incoming) {
        for (TaggedOp& win : window) {
            auto [in2, win2] = transform(in, win, sink);
            in = in2;
            win = win2;
        }
    }
    return {std::move(incoming), std::move(window)};
}

const std::vector<RuleCase>& declared_rule_cases() {
    static const std::vector<RuleCase> cases = {
        {OpKind::Set, OpKind::Set, "same-index-lww"},
        {OpKind::Set, OpKind::Set, "no-overlap"},
        {OpKind::Set, OpKind::Insert, "set-shifted"},
        {OpKind::Set, OpKind::Insert, "no-overlap"},
        {OpKind::Set, OpKind::Move, "set-follows-move"},
        {OpKind::Set, OpKind::Move, "index-adjusted"},
        {OpKind::Set, OpKind::Move, "no-overlap"},
        {OpKind::Set, OpKind::Swap, "set-follows-swap"},
        {OpKind::Set, OpKind::Swap, "no-overlap"},
        {OpKind::Set, OpKind::Erase, "same-index-discard"},
        {OpKind::Set, OpKind::Erase, "shift-left"},
        {OpKind::Set, OpKind::Erase, "no-overlap"},
        {OpKind::Set, OpKind::Clear, "set-discarded"},
        {OpKind::Insert, OpKind::Insert, "same-index-priority"},
        {OpKind::Insert, OpKind::Insert, "no-overlap"},
        {OpKind::Insert, OpKind::Move, "dest-tie-priority"},
        {OpKind::Insert, OpKind::Move, "adjusted"},
        {OpKind::Insert, OpKind::Swap, "swap-adjusted"},
        {OpKind::Insert, OpKind::Swap, "no-overlap"},
        {OpKind::Insert, OpKind::Erase, "erase-shifted"},
        {OpKind::Insert, OpKind::Erase, "insert-shifted"},
        {OpKind::Insert, OpKind::Clear, "insert-discarded"},
        {OpKind::Move, OpKind::Move, "same-element-lww"},
        {OpKind::Move, OpKind::Move, "same-destination-priority"},
        {OpKind::Move, OpKind::Move, "degenerate-discard"},
        {OpKind::Move, OpKind::Move, "adjusted"},
        {OpKind::Move, OpKind::Swap, "swap-follows-moved-element"},
        {OpKind::Move, OpKind::Swap, "swap-adjusted"},
        {OpKind::Move, OpKind::Swap, "no-overlap"},
        {OpKind::Move, OpKind::Erase, "moved-element-erased"},
        {OpKind::Move, OpKind::Erase, "degenerate-discard"},
        {OpKind::Move, OpKind::Erase, "adjusted"},
        {OpKind::Move, OpKind::Clear, "move-discarded"},
        {OpKind::Swap, OpKind::Swap, "identical-discard"},
        {OpKind::Swap, OpKind::Swap, "overlap-lww"},
        {OpKind::Swap, OpKind::Swap, "disjoint"},
        {OpKind::Swap, OpKind::Erase, "swapped-element-erased"},
        {OpKind::Swap, OpKind::Erase, "adjusted"},
        {OpKind::Swap, OpKind::Erase, "no-overlap"},
        {OpKind::Swap, OpKind::Clear, "swap-discarded"},
        {OpKind::Erase, OpKind::Erase, "same-index-discard"},
        {OpKind::Erase, OpKind::Erase, "shift"},
        {OpKind::Erase, OpKind::Clear, "erase-discarded"},
        {OpKind::Clear, OpKind::Clear, "lww"},
    };
    return cases;
}

} // namespace mbt::ot
