#include <mbt/mck/dot.hpp>

#include <algorithm>
#include <deque>
#include <sstream>
#include <unordered_map>

#include <mbt/mck/fingerprint.hpp>

namespace mbt::mck {

DotParseError::DotParseError(std::size_t line_, std::size_t column_, const std::string& message)
    : std::runtime_error("DOT parse error at line " + std::to_string(line_) + ", column " +
                         std::to_string(column_) + ": " + message)
    , line(line_)
    , column(column_)
{
}

namespace {

std::string escape(const std::string& s)
{
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '"':
                out += "\\\"";
                break;
            case '\\':
                out += "\\\\";
                break;
            case '\n':
                out += "\\n";
                break;
            default:
                out += c;
        }
    }
    return out;
}

} // namespace

std::string export_dot(const StateGraph& graph)
{
    std::ostringstream out;
    out << "digraph states {\n";
    for (std::uint32_t i = 0; i < graph.states.size(); ++i) {
        const auto& s = graph.states[i];
        out << "  s" << fingerprint64(s.canonical) << " [label=\"" << escape(s.canonical) << "\"";
        if (i < graph.initial_count)
            out << ", init=1";
        out << "];\n";
    }
    for (const auto& e : graph.edges) {
        out << "  s" << fingerprint64(graph.states[e.from].canonical) << " -> s"
            << fingerprint64(graph.states[e.to].canonical) << " [label=\"" << escape(e.label)
            << "\"];\n";
    }
    out << "}\n";
    return out.str();
}

namespace {

struct Cursor {
    const std::string& line;
    std::size_t line_no;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& msg) const { throw DotParseError(line_no, pos + 1, msg); }

    void skip_ws()
    {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t'))
            ++pos;
    }

    bool eat(const std::string& token)
    {
        skip_ws();
        if (line.compare(pos, token.size(), token) == 0) {
            pos += token.size();
            return true;
        }
        return false;
    }

    void expect(const std::string& token)
    {
        if (!eat(token))
            fail("expected '" + token + "'");
    }

    std::string ident()
    {
        skip_ws();
        std::size_t start = pos;
        while (pos < line.size() && (std::isalnum(static_cast<unsigned char>(line[pos])) || line[pos] == '_'))
            ++pos;
        if (pos == start)
            fail("expected identifier");
        return line.substr(start, pos - start);
    }

    std::string quoted()
    {
        skip_ws();
        if (pos >= line.size() || line[pos] != '"')
            fail("expected quoted string");
        ++pos;
        std::string out;
        while (pos < line.size() && line[pos] != '"') {
            if (line[pos] == '\\') {
                ++pos;
                if (pos >= line.size())
                    fail("dangling escape");
                char c = line[pos];
                if (c == 'n')
                    out += '\n';
                else
                    out += c;
            }
            else {
                out += line[pos];
            }
            ++pos;
        }
        if (pos >= line.size())
            fail("unterminated quoted string");
        ++pos;
        return out;
    }
};

} // namespace

StateGraph parse_dot(const std::string& text)
{
    StateGraph graph;
    std::unordered_map<std::string, std::uint32_t> by_dot_id;
    struct RawEdge {
        std::string from, to;
        ActionLabel label;
        std::size_t line_no;
    };
    std::vector<RawEdge> raw_edges;
    std::vector<std::string> initial_ids;

    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    bool saw_header = false, saw_footer = false;
    while (std::getline(in, line)) {
        ++line_no;
        Cursor cur{line, line_no};
        cur.skip_ws();
        if (cur.pos >= line.size())
            continue;
        if (!saw_header) {
            cur.expect("digraph");
            cur.ident();
            cur.expect("{");
            saw_header = true;
            continue;
        }
        if (cur.eat("}")) {
            saw_footer = true;
            continue;
        }
        if (saw_footer)
            cur.fail("content after closing brace");

        std::string id = cur.ident();
        if (cur.eat("->")) {
            std::string to = cur.ident();
            cur.expect("[");
            cur.expect("label");
            cur.expect("=");
            std::string label = cur.quoted();
            cur.expect("]");
            cur.expect(";");
            raw_edges.push_back(RawEdge{id, to, label, line_no});
        }
        else {
            cur.expect("[");
            cur.expect("label");
            cur.expect("=");
            std::string label = cur.quoted();
            bool init = false;
            if (cur.eat(",")) {
                cur.expect("init");
                cur.expect("=");
                cur.expect("1");
                init = true;
            }
            cur.expect("]");
            cur.expect(";");
            if (by_dot_id.count(id))
                cur.fail("duplicate node id " + id);
            by_dot_id.emplace(id, static_cast<std::uint32_t>(graph.states.size()));
            graph.states.push_back(State{label});
            if (init)
                initial_ids.push_back(id);
        }
    }
    if (!saw_header)
        throw DotParseError(1, 1, "missing digraph header");
    if (!saw_footer)
        throw DotParseError(line_no, 1, "missing closing brace");

    for (const auto& e : raw_edges) {
        auto from = by_dot_id.find(e.from);
        auto to = by_dot_id.find(e.to);
        if (from == by_dot_id.end())
            throw UnknownNodeError("edge at line " + std::to_string(e.line_no) +
                                   " references unknown node " + e.from);
        if (to == by_dot_id.end())
            throw UnknownNodeError("edge at line " + std::to_string(e.line_no) +
                                   " references unknown node " + e.to);
        graph.edges.push_back(Edge{from->second, to->second, e.label});
    }

    // Recompute stats, depths and first-discovery predecessors with a
    // breadth-first pass from the initial nodes.
    std::size_t n = graph.states.size();
    graph.predecessors.assign(n, std::nullopt);
    graph.out_degree.assign(n, 0);
    graph.depth.assign(n, 0);
    std::vector<std::vector<std::pair<std::uint32_t, const ActionLabel*>>> adj(n);
    for (const auto& e : graph.edges) {
        graph.out_degree[e.from] += 1;
        adj[e.from].emplace_back(e.to, &e.label);
    }
    std::vector<bool> visited(n, false);
    std::deque<std::uint32_t> queue;
    for (const auto& id : initial_ids) {
        auto idx = by_dot_id.at(id);
        visited[idx] = true;
        queue.push_back(idx);
    }
    graph.initial_count = initial_ids.size();
    while (!queue.empty()) {
        auto cur = queue.front();
        queue.pop_front();
        for (auto [to, label] : adj[cur]) {
            if (!visited[to]) {
                visited[to] = true;
                graph.depth[to] = graph.depth[cur] + 1;
                graph.predecessors[to] = Predecessor{cur, *label};
                queue.push_back(to);
            }
        }
    }
    graph.stats.distinct_states = n;
    graph.stats.transitions = graph.edges.size();
    graph.stats.depth = graph.depth.empty() ? 0 : *std::max_element(graph.depth.begin(), graph.depth.end());
    return graph;
}

} // namespace mbt::mck
