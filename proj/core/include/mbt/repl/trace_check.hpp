#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <mbt/repl/model.hpp>
#include <mbt/repl/sim.hpp>

namespace mbt::repl {

struct TraceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Sorts events by timestamp. Two events sharing a timestamp make the trace
/// unusable: the error names both.
std::vector<TraceEvent> order_events(std::vector<TraceEvent> events);

/// Applies one observed event to a reconstructed cluster state: the event's
/// node takes the reported role/term/commit/oplog; a node reporting itself
/// Leader demotes everyone else; a former leader reporting Follower changes
/// only itself.
ReplState fold_event(ReplState state, const TraceEvent& event);

/// Fills in oplog prefixes for events that only saw the tail of the log
/// (oplog_start > 1). The prefix comes from the most up-to-date donor event
/// whose oplog starts at 1 and covers the missing positions. Returns a log
/// line per synthesized entry; disagreeing donors or a missing donor are
/// TraceErrors.
std::vector<std::string> backfill_oplog(std::vector<TraceEvent>& events);

enum class Verdict { Pass, Fail };

/// A model action close to (but not matching) an observed step.
struct ActionDiagnostic {
    std::string label;
    std::size_t differing_fields = 0; // distance to the observed post-state
    std::string detail;
};

struct CheckReport {
    Verdict verdict = Verdict::Pass;
    std::size_t steps_checked = 0;
    std::size_t stutter_steps = 0; // events that changed nothing
    std::optional<std::size_t> failed_step; // index into the ordered events
    std::string failure;
    std::vector<ActionDiagnostic> nearest; // best candidates, closest first
};

/// Replays the trace against the model: every event must either change
/// nothing (stutter) or match an enabled action with the same name and
/// post-state. Stops at the first failure.
CheckReport check_trace(const ReplParams& params, std::vector<TraceEvent> events,
                        bool backfill = false);

} // namespace mbt::repl
