#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>

namespace mbt::mck {

/// Diagnostic produced when a step function fails to complete within its
/// budget. Deliberately a value, not an exception: non-termination of a
/// merge rule is a finding, not a crash.
struct NonTermination {
    std::size_t budget = 0;
    std::string inputs; // rendering of the inputs that looped
};

/// Drives `step` until it yields a value or the budget is exhausted.
/// `step` is called with the current iteration index and returns an engaged
/// optional once done.
template <typename Step>
auto run_budgeted(Step&& step, std::size_t budget, std::string inputs = {})
    -> std::variant<typename std::invoke_result_t<Step, std::size_t>::value_type, NonTermination>
{
    for (std::size_t i = 0; i < budget; ++i) {
        if (auto r = step(i))
            return std::move(*r);
    }
    return NonTermination{budget, std::move(inputs)};
}

} // namespace mbt::mck
