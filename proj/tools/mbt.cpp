#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include <mbt/mck/dot.hpp>
#include <mbt/mck/explore.hpp>
#include <mbt/ot/sync_model.hpp>
#include <mbt/ot/testgen.hpp>
#include <mbt/repl/model.hpp>
#include <mbt/repl/sim.hpp>
#include <mbt/repl/trace_check.hpp>

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct Options {
    std::string out;
    std::string config;
    std::uint64_t seed = 0;
    int clients = 3;
    std::size_t array_len = 3;
    bool include_swap = false;
    int nodes = 3;
    int max_term = 3;
    std::size_t max_oplog = 3;
    std::size_t steps = 1000;
    std::string inject;
    bool backfill = false;
    std::string format = "jsonl";
    std::string template_file;
    std::string from_dot;
    std::string trace_file;
    std::string suite_dir;

    mbt::ot::SyncParams sync() const { return {clients, array_len, include_swap}; }
    mbt::repl::ReplParams repl() const { return {nodes, max_term, max_oplog}; }
};

std::string default_out_dir() {
    const char* env = std::getenv("MBT_OUT_DIR");
    return env ? env : "out";
}

// Config file (flat JSON object) fills anything not given on the command
// line; flags always win because they are applied afterwards by CLI11.
void apply_config(Options& o) {
    if (o.config.empty())
        return;
    std::ifstream in(o.config);
    if (!in)
        throw CLI::FileError::Missing(o.config);
    nlohmann::json j = nlohmann::json::parse(in);
    if (j.contains("out"))
        o.out = j["out"].get<std::string>();
    if (j.contains("seed"))
        o.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("clients"))
        o.clients = j["clients"].get<int>();
    if (j.contains("array_len"))
        o.array_len = j["array_len"].get<std::size_t>();
    if (j.contains("include_swap"))
        o.include_swap = j["include_swap"].get<bool>();
    if (j.contains("nodes"))
        o.nodes = j["nodes"].get<int>();
    if (j.contains("max_term"))
        o.max_term = j["max_term"].get<int>();
    if (j.contains("max_oplog"))
        o.max_oplog = j["max_oplog"].get<std::size_t>();
    if (j.contains("steps"))
        o.steps = j["steps"].get<std::size_t>();
    if (j.contains("inject"))
        o.inject = j["inject"].get<std::string>();
    if (j.contains("backfill_oplog"))
        o.backfill = j["backfill_oplog"].get<bool>();
    if (j.contains("format"))
        o.format = j["format"].get<std::string>();
}

std::filesystem::path ensure_out(const Options& o) {
    std::filesystem::path dir = o.out;
    std::filesystem::create_directories(dir);
    return dir;
}

mbt::mck::ExploreResult explore_sync(const Options& o) {
    return mbt::mck::explore(mbt::ot::sync_model(o.sync()));
}

int report_violation(const mbt::mck::Violation& v) {
    std::cerr << "invariant '" << v.invariant_name << "' violated\n";
    for (const auto& [label, state] : v.path)
        std::cerr << (label.empty() ? "initial" : label) << " -> "
                  << state.canonical << "\n";
    return kExitFail;
}

int cmd_ot_explore(const Options& o) {
    auto res = explore_sync(o);
    if (const auto* v = std::get_if<mbt::mck::Violation>(&res))
        return report_violation(*v);
    if (std::holds_alternative<mbt::mck::LimitExceeded>(res)) {
        std::cerr << "exploration limit exceeded\n";
        return kExitFail;
    }
    const auto& g = std::get<mbt::mck::StateGraph>(res);
    auto path = ensure_out(o) / "sync-graph.dot";
    std::ofstream(path) << mbt::mck::export_dot(g);
    std::cout << "states=" << g.stats.distinct_states
              << " transitions=" << g.stats.transitions
              << " depth=" << g.stats.depth
              << " terminal=" << g.terminal_states().size()
              << " paths=" << mbt::ot::count_terminal_paths(g) << "\n"
              << "dot=" << path.string() << "\n";
    return kExitPass;
}

int cmd_ot_gen_tests(const Options& o) {
    mbt::ot::Suite suite;
    if (!o.from_dot.empty()) {
        std::ifstream in(o.from_dot);
        if (!in) {
            std::cerr << "cannot read " << o.from_dot << "\n";
            return kExitUsage;
        }
        std::stringstream buf;
        buf << in.rdbuf();
        suite = mbt::ot::generate(o.sync(),
                                  mbt::mck::ExploreResult{mbt::mck::parse_dot(buf.str())});
    } else {
        suite = mbt::ot::generate(o.sync(), explore_sync(o));
    }

    auto dir = ensure_out(o);
    if (o.format == "jsonl") {
        auto manifest = mbt::ot::emit_jsonl(suite, dir);
        std::cout << "cases=" << suite.cases.size() << " manifest="
                  << manifest.string() << "\n";
    } else if (o.format == "source") {
        std::string tmpl = mbt::ot::default_case_template();
        if (!o.template_file.empty()) {
            std::ifstream in(o.template_file);
            if (!in) {
                std::cerr << "cannot read " << o.template_file << "\n";
                return kExitUsage;
            }
            std::stringstream buf;
            buf << in.rdbuf();
            tmpl = buf.str();
        }
        auto path = dir / "generated_cases.txt";
        std::ofstream(path) << mbt::ot::emit_source(suite, tmpl);
        std::cout << "cases=" << suite.cases.size() << " source=" << path.string()
                  << "\n";
    } else {
        std::cerr << "unknown --format '" << o.format << "' (jsonl|source)\n";
        return kExitUsage;
    }
    return kExitPass;
}

int cmd_ot_replay(const Options& o) {
    auto suite = mbt::ot::load_jsonl(o.suite_dir.empty() ? o.out : o.suite_dir);
    auto result = mbt::ot::replay(suite);
    std::cout << "checked=" << result.checked
              << " failures=" << result.failures.size() << "\n";
    for (const std::string& f : result.failures)
        std::cerr << f << "\n";
    return result.ok() ? kExitPass : kExitFail;
}

int cmd_ot_coverage(const Options& o) {
    auto suite = mbt::ot::load_jsonl(o.suite_dir.empty() ? o.out : o.suite_dir);
    auto cov = mbt::ot::rule_coverage(suite);
    for (const auto& [key, count] : cov.hits)
        std::cout << key << " " << count << "\n";
    // Swap rules can only fire when the suite generated swaps.
    std::size_t missing = 0;
    for (const mbt::ot::RuleCase& rc : cov.unfired) {
        bool swap_rule =
            rc.a == mbt::ot::OpKind::Swap || rc.b == mbt::ot::OpKind::Swap;
        if (swap_rule && !suite.params.include_swap)
            continue;
        ++missing;
        std::cerr << "unfired: " << rc.key() << "\n";
    }
    std::cout << "unfired=" << missing << "\n";
    return missing == 0 ? kExitPass : kExitFail;
}

int cmd_repl_check(const Options& o) {
    mbt::mck::ExploreOptions opt;
    opt.record_edges = false;
    auto res = mbt::mck::explore(mbt::repl::repl_model(o.repl()), opt);
    if (const auto* v = std::get_if<mbt::mck::Violation>(&res))
        return report_violation(*v);
    if (std::holds_alternative<mbt::mck::LimitExceeded>(res)) {
        std::cerr << "exploration limit exceeded\n";
        return kExitFail;
    }
    const auto& g = std::get<mbt::mck::StateGraph>(res);
    std::cout << "states=" << g.stats.distinct_states
              << " transitions=" << g.stats.transitions
              << " depth=" << g.stats.depth << " violations=0\n";
    return kExitPass;
}

int cmd_repl_simulate(const Options& o) {
    mbt::repl::SimConfig cfg;
    cfg.params = o.repl();
    cfg.seed = o.seed;
    cfg.steps = o.steps;
    cfg.inject = o.inject;
    auto result = mbt::repl::simulate(cfg);
    auto path = ensure_out(o) / "trace.jsonl";
    std::ofstream(path) << mbt::repl::trace_to_jsonl(result.events);
    std::cout << result.summary << " trace=" << path.string() << "\n";
    return kExitPass;
}

int cmd_repl_check_trace(const Options& o) {
    std::string file = o.trace_file;
    if (file.empty())
        file = (std::filesystem::path(o.out) / "trace.jsonl").string();
    std::ifstream in(file);
    if (!in) {
        std::cerr << "cannot read " << file << "\n";
        return kExitUsage;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    auto events = mbt::repl::trace_from_jsonl(buf.str());
    auto report = mbt::repl::check_trace(o.repl(), events, o.backfill);
    std::cout << "verdict=" << (report.verdict == mbt::repl::Verdict::Pass ? "pass" : "fail")
              << " steps=" << report.steps_checked
              << " stutters=" << report.stutter_steps << "\n";
    if (report.verdict == mbt::repl::Verdict::Pass)
        return kExitPass;
    std::cerr << "step " << *report.failed_step << ": " << report.failure << "\n";
    for (const auto& d : report.nearest)
        std::cerr << "  near: " << d.label << " (" << d.differing_fields
                  << " fields differ: " << d.detail << ")\n";
    return kExitFail;
}

} // namespace

int main(int argc, char** argv) {
    Options o;
    o.out = default_out_dir();

    // The config file must be applied before CLI11 binds flag values, so
    // flags can override it.
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--config")
            o.config = argv[i + 1];
    try {
        apply_config(o);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    }

    CLI::App app{"model-based conformance testing workbench"};
    app.require_subcommand(1);
    app.add_option("--config", o.config, "flat JSON config file (flags override it)");

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out", o.out, "output directory")
            ->default_str(o.out);
    };
    auto add_sync_flags = [&](CLI::App* cmd) {
        cmd->add_option("--clients", o.clients, "number of clients")->default_str("3");
        cmd->add_option("--array-len", o.array_len, "initial array length")
            ->default_str("3");
        cmd->add_flag("--include-swap", o.include_swap, "include swap operations");
    };
    auto add_repl_flags = [&](CLI::App* cmd) {
        cmd->add_option("--nodes", o.nodes, "replica count")->default_str("3");
        cmd->add_option("--max-term", o.max_term, "term bound")->default_str("3");
        cmd->add_option("--max-oplog", o.max_oplog, "oplog length bound")
            ->default_str("3");
    };

    CLI::App* ot = app.add_subcommand("ot", "array merge algorithm");
    CLI::App* ot_explore = ot->add_subcommand("explore", "explore the sync model");
    add_common(ot_explore);
    add_sync_flags(ot_explore);

    CLI::App* gen = ot->add_subcommand("gen-tests", "generate the conformance suite");
    add_common(gen);
    add_sync_flags(gen);
    gen->add_option("--format", o.format, "jsonl|source")->default_str("jsonl");
    gen->add_option("--template", o.template_file, "per-case source template");
    gen->add_option("--from-dot", o.from_dot, "reuse an exported state graph");

    CLI::App* replay = ot->add_subcommand("replay", "re-run an emitted suite");
    add_common(replay);
    replay->add_option("dir", o.suite_dir, "suite directory (default --out)");

    CLI::App* coverage = ot->add_subcommand("coverage", "merge-rule branch coverage");
    add_common(coverage);
    coverage->add_option("dir", o.suite_dir, "suite directory (default --out)");

    CLI::App* repl = app.add_subcommand("repl", "replication protocol");
    CLI::App* check = repl->add_subcommand("check", "exhaustively check the model");
    add_common(check);
    add_repl_flags(check);

    CLI::App* sim = repl->add_subcommand("simulate", "run the seeded simulator");
    add_common(sim);
    add_repl_flags(sim);
    sim->add_option("--seed", o.seed, "random seed")->default_str("0");
    sim->add_option("--steps", o.steps, "scheduled steps")->default_str("1000");
    sim->add_option("--inject", o.inject,
                    "minority-commit|two-leaders|commit-beyond-applied");

    CLI::App* ct = repl->add_subcommand("check-trace", "validate a trace");
    add_common(ct);
    add_repl_flags(ct);
    ct->add_option("trace", o.trace_file, "trace file (default <out>/trace.jsonl)");
    ct->add_flag("--backfill-oplog", o.backfill, "reconstruct truncated oplogs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitPass : kExitUsage;
    }

    try {
        if (ot_explore->parsed())
            return cmd_ot_explore(o);
        if (gen->parsed())
            return cmd_ot_gen_tests(o);
        if (replay->parsed())
            return cmd_ot_replay(o);
        if (coverage->parsed())
            return cmd_ot_coverage(o);
        if (check->parsed())
            return cmd_repl_check(o);
        if (sim->parsed())
            return cmd_repl_simulate(o);
        if (ct->parsed())
            return cmd_repl_check_trace(o);
        std::cerr << app.help();
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFail;
    }
}
