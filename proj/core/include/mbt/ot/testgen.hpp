#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <mbt/mck/explore.hpp>
#include <mbt/ot/sync_model.hpp>

namespace mbt::ot {

/// One cross-implementation conformance case: the concurrent ops each
/// client generated, and everything an implementation under test must
/// reproduce after full synchronization.
struct TestCase {
    std::uint64_t id = 0; // fingerprint of the id-free canonical encoding
    ArrayState initial;
    std::vector<TaggedOp> client_ops;            // originals, one per client
    std::vector<std::vector<TaggedOp>> applied;  // downloads per client, markers kept
    std::vector<ArrayState> final_arrays;        // per client, post-sync
    ArrayState server_array;

    std::string name() const { return "Transform_Node__" + std::to_string(id); }
    friend bool operator==(const TestCase&, const TestCase&) = default;
};

struct Suite {
    SyncParams params;
    std::vector<TestCase> cases; // sorted by id
};

std::string encode_case(const TestCase& c); // canonical, id-free

/// Builds the case for one terminal model state.
TestCase case_from_state(const SyncState& s);

/// One case per terminal state of the graph. Throws std::runtime_error when
/// handed a Violation or LimitExceeded instead of a graph: a broken model
/// must not silently produce a suite.
Suite generate(const SyncParams& params, const mck::ExploreResult& explored);

/// Explores the sync model and generates in one step.
Suite generate(const SyncParams& params);

/// Writes cases-NNN.jsonl shards (at most `per_file` cases each, in id
/// order) plus manifest.json carrying the parameters, the case count and a
/// content digest. Returns the manifest path.
std::filesystem::path emit_jsonl(const Suite& suite, const std::filesystem::path& dir,
                                 std::size_t per_file = 1000);

/// Reads back what emit_jsonl wrote, verifying the manifest digest.
Suite load_jsonl(const std::filesystem::path& dir);

/// Expands {{placeholder}} markers. Unknown placeholders throw.
std::string expand_template(const std::string& text,
                            const std::map<std::string, std::string>& values);

/// Renders every case through a per-case template. Placeholders:
/// {{name}}, {{initial}}, {{ops}} (one "client N: Op" line each),
/// {{applied}} (one "client N: [ops]" line each), {{finals}}, {{server}}.
std::string emit_source(const Suite& suite, const std::string& case_template);

std::string default_case_template();

struct ReplayResult {
    std::size_t checked = 0;
    std::vector<std::string> failures; // one message per mismatching case
    bool ok() const { return failures.empty(); }
};

/// Re-runs every case through the merge pipeline and compares applied ops
/// and final arrays against the recorded expectations.
ReplayResult replay(const Suite& suite);

struct CoverageReport {
    std::map<std::string, std::size_t> hits; // RuleCase::key() -> count
    std::vector<RuleCase> unfired;           // declared cases never hit
};

/// Replays the suite, counting which merge-rule branches fire.
CoverageReport rule_coverage(const Suite& suite);

/// Number of initial-to-terminal paths in a DAG (topological DP). Throws
/// std::invalid_argument if the graph has a cycle or lacks edges.
std::uint64_t count_terminal_paths(const mck::StateGraph& g);

} // namespace mbt::ot
