#include <mbt/ot/sync_model.hpp>

#include <charconv>
#include <stdexcept>

namespace mbt::ot {
namespace {

std::string render_oplist(const std::vector<TaggedOp>& ops) {
    std::string out = "[";
    for (std::size_t i = 0; i < ops.size(); ++i) {
        if (i)
            out += ",";
        out += render_tagged(ops[i]);
    }
    return out + "]";
}

// Splits on `sep` at nesting depth zero ((), [], {} all nest).
std::vector<std::string> split_top(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    int depth = 0;
    for (char c : text) {
        if (c == '(' || c == '[' || c == '{')
            ++depth;
        else if (c == ')' || c == ']' || c == '}')
            --depth;
        if (c == sep && depth == 0) {
            parts.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(std::move(cur));
    return parts;
}

[[noreturn]] void bad(const std::string& what) {
    throw std::invalid_argument("malformed sync state encoding: " + what);
}

// "key=value" -> value, insisting on the key.
std::string expect_field(const std::string& part, const std::string& key) {
    if (part.size() < key.size() + 1 || part.compare(0, key.size(), key) != 0 ||
        part[key.size()] != '=')
        bad("expected field '" + key + "' in '" + part + "'");
    return part.substr(key.size() + 1);
}

std::vector<TaggedOp> parse_oplist(const std::string& text) {
    if (text.size() < 2 || text.front() != '[' || text.back() != ']')
        bad("op list '" + text + "'");
    std::string body = text.substr(1, text.size() - 2);
    std::vector<TaggedOp> out;
    if (body.empty())
        return out;
    for (const std::string& item : split_top(body, ','))
        out.push_back(parse_tagged(item));
    return out;
}

std::size_t parse_size(const std::string& text) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size())
        bad("number '" + text + "'");
    return v;
}

} // namespace

std::string encode(const SyncState& s) {
    std::string out = "init=" + render_array(s.initial);
    out += ";srv={a=" + render_array(s.server_array) +
           ";h=" + render_oplist(s.server_history) + "}";
    for (std::size_t c = 0; c < s.clients.size(); ++c) {
        const ClientState& cs = s.clients[c];
        out += ";c" + std::to_string(c + 1) + "={a=" + render_array(cs.array);
        out += ";o=" + (cs.own ? render_tagged(*cs.own) : std::string("-"));
        out += ";p=" + render_oplist(cs.pending);
        out += ";d=" + render_oplist(cs.downloaded);
        out += ";seen=" + std::to_string(cs.seen) + "}";
    }
    return out;
}

SyncState decode(const std::string& text) {
    auto parts = split_top(text, ';');
    if (parts.size() < 2)
        bad("too few sections");
    SyncState s;
    s.initial = parse_array(expect_field(parts[0], "init"));

    auto strip_braces = [](const std::string& t) {
        if (t.size() < 2 || t.front() != '{' || t.back() != '}')
            bad("section '" + t + "'");
        return t.substr(1, t.size() - 2);
    };

    auto srv = split_top(strip_braces(expect_field(parts[1], "srv")), ';');
    if (srv.size() != 2)
        bad("server section");
    s.server_array = parse_array(expect_field(srv[0], "a"));
    s.server_history = parse_oplist(expect_field(srv[1], "h"));

    for (std::size_t i = 2; i < parts.size(); ++i) {
        std::string key = "c" + std::to_string(i - 1);
        auto fields = split_top(strip_braces(expect_field(parts[i], key)), ';');
        if (fields.size() != 5)
            bad("client section " + key);
        ClientState cs;
        cs.array = parse_array(expect_field(fields[0], "a"));
        std::string own = expect_field(fields[1], "o");
        if (own != "-")
            cs.own = parse_tagged(own);
        cs.pending = parse_oplist(expect_field(fields[2], "p"));
        cs.downloaded = parse_oplist(expect_field(fields[3], "d"));
        cs.seen = parse_size(expect_field(fields[4], "seen"));
        s.clients.push_back(std::move(cs));
    }
    return s;
}

SyncState initial_sync_state(const SyncParams& params) {
    SyncState s;
    for (std::size_t i = 0; i < params.array_len; ++i)
        s.initial.elems.push_back(static_cast<Element>(i + 1));
    s.server_array = s.initial;
    s.clients.resize(static_cast<std::size_t>(params.clients));
    for (ClientState& c : s.clients)
        c.array = s.initial;
    return s;
}

std::vector<ArrayOp> op_universe(const SyncParams& params, int client) {
    const std::size_t len = params.array_len;
    const Element value = static_cast<Element>(len) + client;
    std::vector<ArrayOp> out;
    for (std::size_t i = 0; i < len; ++i)
        out.push_back(SetOp{i, value});
    for (std::size_t i = 0; i <= len; ++i)
        out.push_back(InsertOp{i, value});
    for (std::size_t f = 0; f < len; ++f)
        for (std::size_t t = 0; t < len; ++t)
            if (f != t)
                out.push_back(MoveOp{f, t});
    if (params.include_swap)
        for (std::size_t i = 0; i < len; ++i)
            for (std::size_t j = i + 1; j < len; ++j)
                out.push_back(SwapOp{i, j});
    for (std::size_t i = 0; i < len; ++i)
        out.push_back(EraseOp{i});
    out.push_back(ClearOp{});
    return out;
}

bool peers_consistent(const SyncState& s) {
    // Server vs each fully synced client; synced clients among themselves
    // then agree transitively.
    for (std::size_t c = 0; c < s.clients.size(); ++c)
        if (s.synced(c) && !(s.clients[c].array == s.server_array))
            return false;
    return true;
}

namespace {

void client_act(SyncState& s, std::size_t c, const ArrayOp& op) {
    int id = static_cast<int>(c) + 1;
    TaggedOp tagged{op, id, 1, 0, false};
    ClientState& cs = s.clients[c];
    cs.array = apply(cs.array, tagged);
    cs.own = tagged;
    cs.pending.push_back(tagged);
}

void client_merge(SyncState& s, std::size_t c, const RuleCaseSink& sink) {
    ClientState& cs = s.clients[c];
    std::vector<TaggedOp> window(
        s.server_history.begin() + static_cast<std::ptrdiff_t>(cs.seen),
        s.server_history.end());
    auto [up, down] = transform_window(cs.pending, window, sink);
    for (const TaggedOp& op : up) {
        s.server_array = apply(s.server_array, op);
        s.server_history.push_back(op);
    }
    for (const TaggedOp& op : down) {
        cs.array = apply(cs.array, op);
        cs.downloaded.push_back(op);
    }
    cs.pending.clear();
    cs.seen = s.server_history.size();
}

} // namespace

SyncState run_scenario(const SyncParams& params, const std::vector<ArrayOp>& ops,
                       const RuleCaseSink& sink) {
    if (ops.size() != static_cast<std::size_t>(params.clients))
        throw std::invalid_argument("run_scenario: one op per client required");
    SyncState s = initial_sync_state(params);
    for (std::size_t c = 0; c < ops.size(); ++c)
        client_act(s, c, ops[c]);
    for (bool progressed = true; progressed;) {
        progressed = false;
        for (std::size_t c = 0; c < s.clients.size(); ++c) {
            if (!s.synced(c)) {
                client_merge(s, c, sink);
                progressed = true;
                break;
            }
        }
    }
    return s;
}

mck::ModelDefinition sync_model(const SyncParams& params) {
    if (params.clients < 1)
        throw std::invalid_argument("sync model needs at least one client");

    mck::ModelDefinition m;
    m.initial_states = {mck::State{encode(initial_sync_state(params))}};

    m.next = [params](const mck::State& st) {
        SyncState s = decode(st.canonical);
        std::vector<std::pair<mck::ActionLabel, mck::State>> out;

        // Phase one: the lowest client that has not acted generates one op.
        for (std::size_t c = 0; c < s.clients.size(); ++c) {
            if (s.clients[c].acted())
                continue;
            int id = static_cast<int>(c) + 1;
            for (const ArrayOp& op : op_universe(params, id)) {
                SyncState t = s;
                client_act(t, c, op);
                out.push_back({"act(c" + std::to_string(id) + "," + render_op(op) + ")",
                               mck::State{encode(t)}});
            }
            return out;
        }

        // Phase two: the lowest unsynced client merges with the server.
        for (std::size_t c = 0; c < s.clients.size(); ++c) {
            if (s.synced(c))
                continue;
            SyncState t = s;
            client_merge(t, c, nullptr);
            out.push_back({"merge(c" + std::to_string(c + 1) + ")",
                           mck::State{encode(t)}});
            return out;
        }
        return out; // terminal: everyone synced
    };

    m.invariants.push_back({"peers-consistent", [](const mck::State& st) {
        return peers_consistent(decode(st.canonical));
    }});
    return m;
}

} // namespace mbt::ot
