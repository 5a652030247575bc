#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <variant>
#include <vector>

#include <mbt/mck/budget.hpp>
#include <mbt/ot/ops.hpp>

namespace mbt::ot {

/// One branch of one merge rule. `a` and `b` are the (kind-sorted) pair of
/// operation kinds the rule is for; `label` names the branch taken.
struct RuleCase {
    OpKind a;
    OpKind b;
    std::string label;

    std::string key() const { return kind_name(a) + "x" + kind_name(b) + "." + label; }
    friend bool operator==(const RuleCase&, const RuleCase&) = default;
};

using RuleCaseSink = std::function<void(const RuleCase&)>;

/// All semantic branch labels the merge rules can report. Labels reported
/// for discarded inputs ("discarded-input") are bookkeeping, not semantics,
/// and are not declared here.
const std::vector<RuleCase>& declared_rule_cases();

struct NonTerminationError : std::runtime_error {
    explicit NonTerminationError(mck::NonTermination diag);
    mck::NonTermination diag;
};

inline constexpr std::size_t kTransformBudget = 10'000;

/// Transforms two concurrent operations from different peers so that
/// apply(apply(s, b), a') == apply(apply(s, a), b') for every common state s
/// (TP1). Returns (a', b'). Reports exactly one RuleCase per invocation.
/// Rules expressed as fixpoints run under the step budget; exhaustion
/// throws NonTerminationError.
std::pair<TaggedOp, TaggedOp> transform(const TaggedOp& a, const TaggedOp& b,
                                        const RuleCaseSink& sink = nullptr,
                                        std::size_t budget = kTransformBudget);

/// A merge rule as seen by the budgeted driver: mutates the pair in place,
/// returns true once settled and false to be invoked again.
using MergeRule = std::function<bool(TaggedOp&, TaggedOp&, std::string& label)>;

/// Test hook: runs an arbitrary rule under the same budget machinery and
/// returns the NonTermination diagnostic instead of throwing.
std::variant<std::pair<TaggedOp, TaggedOp>, mck::NonTermination>
transform_with_rule(const MergeRule& rule, TaggedOp a, TaggedOp b, std::size_t budget);

/// Transforms a causally ordered incoming batch against a concurrent merge
/// window, threading intermediate results pairwise. Result lists keep the
/// lengths (and positions) of the inputs; discarded ops stay as markers.
std::pair<std::vector<TaggedOp>, std::vector<TaggedOp>>
transform_window(std::vector<TaggedOp> incoming, std::vector<TaggedOp> window,
                 const RuleCaseSink& sink = nullptr);

} // namespace mbt::ot
