#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <mbt/repl/model.hpp>

namespace mbt::repl {

/// One trace line: which node did what, and that node's state afterwards.
/// `oplog_start` is the 1-based position of the first reported entry;
/// values above 1 mean only the tail of the oplog was visible.
struct TraceEvent {
    std::int64_t ts_ms = 0;
    std::string node;   // "n1"
    std::string action; // "AppendOplog", ...
    Role role = Role::Follower;
    int term = 0;
    CommitPoint commit;
    std::vector<int> oplog;
    std::size_t oplog_start = 1;

    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

std::string trace_to_jsonl(const std::vector<TraceEvent>& events);
std::vector<TraceEvent> trace_from_jsonl(const std::string& text);

/// Produces the strictly increasing timestamps trace ordering relies on.
/// Logical mode counts 1, 2, 3, ... Wall mode reads the clock and spins
/// until the millisecond value changes; a clock that moves backwards is a
/// fatal environment failure.
class EventLogger {
  public:
    using Clock = std::function<std::int64_t()>; // milliseconds

    /// Logical clock.
    EventLogger();
    /// Wall clock; pass a custom source for testing (default: system time).
    explicit EventLogger(Clock clock);

    std::int64_t stamp();

  private:
    Clock clock_; // empty in logical mode
    std::int64_t last_ = 0;
};

struct PartitionWindow {
    std::size_t from_step = 0; // inclusive
    std::size_t to_step = 0;   // exclusive
    std::vector<std::string> group; // isolated from every node outside it
};

struct SimConfig {
    ReplParams params;
    std::uint64_t seed = 0;
    std::size_t steps = 200;
    bool wall_clock = false;
    /// Action-name weights for the random scheduler; unlisted actions get
    /// the default weights (replication and gossip 4, elections and
    /// stepdowns 1).
    std::map<std::string, int> weights;
    std::vector<PartitionWindow> partitions;
    /// Bug injection: "", "minority-commit", "two-leaders",
    /// "commit-beyond-applied". Roughly one step in `inject_rate` injects.
    std::string inject;
    std::uint32_t inject_rate = 32;
};

struct SimResult {
    std::vector<TraceEvent> events;
    ReplState final_state;
    std::vector<std::size_t> injected_steps; // indices into events
    bool converged = false; // commit points agree after the drain phase
    std::string summary;    // one human-readable line
};

/// Deterministic: the same config always produces the same trace. After the
/// scheduled steps a drain phase (replication and gossip only, no
/// injections) runs the cluster towards quiescence.
SimResult simulate(const SimConfig& config);

std::map<std::string, int> default_action_weights();

} // namespace mbt::repl
