#include <mbt/ot/testgen.hpp>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include <mbt/mck/fingerprint.hpp>

namespace mbt::ot {
namespace {

using nlohmann::json;

std::string render_oplist(const std::vector<TaggedOp>& ops) {
    std::string out = "[";
    for (std::size_t i = 0; i < ops.size(); ++i) {
        if (i)
            out += ",";
        out += render_tagged(ops[i]);
    }
    return out + "]";
}

std::string shard_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "cases-%03zu.jsonl", index);
    return buf;
}

std::string suite_digest(const Suite& suite) {
    std::string ids;
    for (const TestCase& c : suite.cases) {
        ids += std::to_string(c.id);
        ids += ",";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(mck::fingerprint64(ids)));
    return buf;
}

json case_to_json(const TestCase& c) {
    json j;
    j["id"] = std::to_string(c.id);
    j["initial"] = render_array(c.initial);
    j["ops"] = json::array();
    for (const TaggedOp& op : c.client_ops)
        j["ops"].push_back(render_tagged(op));
    j["applied"] = json::array();
    for (const auto& list : c.applied) {
        json inner = json::array();
        for (const TaggedOp& op : list)
            inner.push_back(render_tagged(op));
        j["applied"].push_back(std::move(inner));
    }
    j["final"] = json::array();
    for (const ArrayState& a : c.final_arrays)
        j["final"].push_back(render_array(a));
    j["server"] = render_array(c.server_array);
    return j;
}

TestCase case_from_json(const json& j) {
    TestCase c;
    c.id = std::stoull(j.at("id").get<std::string>());
    c.initial = parse_array(j.at("initial").get<std::string>());
    for (const auto& s : j.at("ops"))
        c.client_ops.push_back(parse_tagged(s.get<std::string>()));
    for (const auto& list : j.at("applied")) {
        std::vector<TaggedOp> inner;
        for (const auto& s : list)
            inner.push_back(parse_tagged(s.get<std::string>()));
        c.applied.push_back(std::move(inner));
    }
    for (const auto& s : j.at("final"))
        c.final_arrays.push_back(parse_array(s.get<std::string>()));
    c.server_array = parse_array(j.at("server").get<std::string>());
    return c;
}

std::vector<ArrayOp> plain_ops(const TestCase& c) {
    std::vector<ArrayOp> ops;
    for (const TaggedOp& t : c.client_ops)
        ops.push_back(t.op);
    return ops;
}

} // namespace

std::string encode_case(const TestCase& c) {
    std::string out = "init=" + render_array(c.initial);
    out += ";ops=" + render_oplist(c.client_ops);
    out += ";applied=[";
    for (std::size_t i = 0; i < c.applied.size(); ++i) {
        if (i)
            out += ",";
        out += render_oplist(c.applied[i]);
    }
    out += "];final=[";
    for (std::size_t i = 0; i < c.final_arrays.size(); ++i) {
        if (i)
            out += ",";
        out += render_array(c.final_arrays[i]);
    }
    out += "];srv=" + render_array(c.server_array);
    return out;
}

TestCase case_from_state(const SyncState& s) {
    TestCase c;
    c.initial = s.initial;
    c.server_array = s.server_array;
    for (const ClientState& cs : s.clients) {
        if (!cs.own)
            throw std::invalid_argument("case_from_state: client never acted");
        c.client_ops.push_back(*cs.own);
        c.applied.push_back(cs.downloaded);
        c.final_arrays.push_back(cs.array);
    }
    c.id = mck::fingerprint64(encode_case(c));
    return c;
}

Suite generate(const SyncParams& params, const mck::ExploreResult& explored) {
    if (const auto* v = std::get_if<mck::Violation>(&explored))
        throw std::runtime_error("refusing to generate: invariant '" +
                                 v->invariant_name + "' violated at " +
                                 v->state.canonical);
    if (const auto* le = std::get_if<mck::LimitExceeded>(&explored))
        throw std::runtime_error("refusing to generate: exploration exceeded " +
                                 le->which + " = " + std::to_string(le->limit));
    const auto& g = std::get<mck::StateGraph>(explored);

    Suite suite;
    suite.params = params;
    for (std::uint32_t i : g.terminal_states())
        suite.cases.push_back(case_from_state(decode(g.states[i].canonical)));
    std::sort(suite.cases.begin(), suite.cases.end(),
              [](const TestCase& a, const TestCase& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < suite.cases.size(); ++i)
        if (suite.cases[i].id == suite.cases[i - 1].id)
            throw std::runtime_error("case id collision: " +
                                     std::to_string(suite.cases[i].id));
    return suite;
}

Suite generate(const SyncParams& params) {
    return generate(params, mck::explore(sync_model(params)));
}

std::filesystem::path emit_jsonl(const Suite& suite, const std::filesystem::path& dir,
                                 std::size_t per_file) {
    if (per_file == 0)
        throw std::invalid_argument("emit_jsonl: per_file must be positive");
    std::filesystem::create_directories(dir);

    std::size_t shards = 0;
    for (std::size_t at = 0; at < suite.cases.size(); at += per_file, ++shards) {
        std::ofstream out(dir / shard_name(shards));
        std::size_t end = std::min(at + per_file, suite.cases.size());
        for (std::size_t i = at; i < end; ++i)
            out << case_to_json(suite.cases[i]).dump() << "\n";
    }

    json manifest;
    manifest["params"] = {{"clients", suite.params.clients},
                          {"array_len", suite.params.array_len},
                          {"include_swap", suite.params.include_swap}};
    manifest["count"] = suite.cases.size();
    manifest["shards"] = shards;
    manifest["per_file"] = per_file;
    manifest["digest"] = suite_digest(suite);

    std::filesystem::path path = dir / "manifest.json";
    std::ofstream(path) << manifest.dump(2) << "\n";
    return path;
}

Suite load_jsonl(const std::filesystem::path& dir) {
    std::ifstream mf(dir / "manifest.json");
    if (!mf)
        throw std::runtime_error("no manifest.json under " + dir.string());
    json manifest = json::parse(mf);

    Suite suite;
    suite.params.clients = manifest.at("params").at("clients").get<int>();
    suite.params.array_len = manifest.at("params").at("array_len").get<std::size_t>();
    suite.params.include_swap = manifest.at("params").at("include_swap").get<bool>();

    for (std::size_t s = 0; s < manifest.at("shards").get<std::size_t>(); ++s) {
        std::ifstream in(dir / shard_name(s));
        if (!in)
            throw std::runtime_error("missing shard " + shard_name(s));
        for (std::string line; std::getline(in, line);)
            if (!line.empty())
                suite.cases.push_back(case_from_json(json::parse(line)));
    }

    if (suite.cases.size() != manifest.at("count").get<std::size_t>())
        throw std::runtime_error("manifest count mismatch");
    if (suite_digest(suite) != manifest.at("digest").get<std::string>())
        throw std::runtime_error("manifest digest mismatch");
    return suite;
}

std::string expand_template(const std::string& text,
                            const std::map<std::string, std::string>& values) {
    std::string out;
    std::size_t at = 0;
    while (true) {
        std::size_t open = text.find("{{", at);
        if (open == std::string::npos) {
            out += text.substr(at);
            return out;
        }
        std::size_t close = text.find("}}", open);
        if (close == std::string::npos)
            throw std::invalid_argument("unterminated placeholder in template");
        out += text.substr(at, open - at);
        std::string key = text.substr(open + 2, close - open - 2);
        auto it = values.find(key);
        if (it == values.end())
            throw std::invalid_argument("unknown placeholder {{" + key + "}}");
        out += it->second;
        at = close + 2;
    }
}

std::string default_case_template() {
    return "TEST({{name}}) {\n"
           "    setup(\"{{initial}}\");\n"
           "{{ops}}"
           "    sync_all();\n"
           "{{applied}}"
           "{{finals}}"
           "    check_server(\"{{server}}\");\n"
           "}\n";
}

std::string emit_source(const Suite& suite, const std::string& case_template) {
    std::string out;
    for (const TestCase& c : suite.cases) {
        std::map<std::string, std::string> values;
        values["name"] = c.name();
        values["initial"] = render_array(c.initial);
        values["server"] = render_array(c.server_array);
        std::string ops, applied, finals;
        for (std::size_t i = 0; i < c.client_ops.size(); ++i) {
            std::string n = std::to_string(i + 1);
            ops += "    perform(" + n + ", \"" + render_op(c.client_ops[i].op) + "\");\n";
            applied += "    check_ops(" + n + ", \"" + render_oplist(c.applied[i]) + "\");\n";
            finals += "    check_array(" + n + ", \"" + render_array(c.final_arrays[i]) + "\");\n";
        }
        values["ops"] = ops;
        values["applied"] = applied;
        values["finals"] = finals;
        out += expand_template(case_template, values);
        out += "\n";
    }
    return out;
}

ReplayResult replay(const Suite& suite) {
    ReplayResult result;
    for (const TestCase& c : suite.cases) {
        ++result.checked;
        SyncState end = run_scenario(suite.params, plain_ops(c));
        std::string why;
        for (std::size_t i = 0; i < end.clients.size(); ++i) {
            if (!(end.clients[i].downloaded == c.applied[i]))
                why = "client " + std::to_string(i + 1) + " applied " +
                      render_oplist(end.clients[i].downloaded) + ", expected " +
                      render_oplist(c.applied[i]);
            else if (!(end.clients[i].array == c.final_arrays[i]))
                why = "client " + std::to_string(i + 1) + " ended at " +
                      render_array(end.clients[i].array) + ", expected " +
                      render_array(c.final_arrays[i]);
        }
        if (why.empty() && !(end.server_array == c.server_array))
            why = "server ended at " + render_array(end.server_array) +
                  ", expected " + render_array(c.server_array);
        if (!why.empty())
            result.failures.push_back(c.name() + ": " + why);
    }
    return result;
}

CoverageReport rule_coverage(const Suite& suite) {
    CoverageReport report;
    RuleCaseSink sink = [&](const RuleCase& rc) { report.hits[rc.key()] += 1; };
    for (const TestCase& c : suite.cases)
        (void)run_scenario(suite.params, plain_ops(c), sink);
    for (const RuleCase& rc : declared_rule_cases())
        if (!report.hits.count(rc.key()))
            report.unfired.push_back(rc);
    return report;
}

std::uint64_t count_terminal_paths(const mck::StateGraph& g) {
    if (g.states.empty())
        throw std::invalid_argument("count_terminal_paths: empty graph");
    if (g.edges.empty() && g.stats.transitions != 0)
        throw std::invalid_argument("count_terminal_paths: graph explored without edges");

    std::vector<std::size_t> indegree(g.states.size(), 0);
    for (const mck::Edge& e : g.edges)
        indegree[e.to] += 1;

    std::vector<std::vector<std::uint32_t>> out(g.states.size());
    for (const mck::Edge& e : g.edges)
        out[e.from].push_back(e.to);

    std::vector<std::uint64_t> paths(g.states.size(), 0);
    for (std::size_t i = 0; i < g.initial_count; ++i)
        paths[i] = 1;

    std::vector<std::uint32_t> ready;
    for (std::size_t i = 0; i < g.states.size(); ++i)
        if (indegree[i] == 0)
            ready.push_back(static_cast<std::uint32_t>(i));

    std::size_t processed = 0;
    std::uint64_t total = 0;
    while (!ready.empty()) {
        std::uint32_t n = ready.back();
        ready.pop_back();
        ++processed;
        if (out[n].empty())
            total += paths[n];
        for (std::uint32_t m : out[n]) {
            paths[m] += paths[n];
            if (--indegree[m] == 0)
                ready.push_back(m);
        }
    }
    if (processed != g.states.size())
        throw std::invalid_argument("count_terminal_paths: graph has a cycle");
    return total;
}

} // namespace mbt::ot
