#include <mbt/repl/trace_check.hpp>

#include <algorithm>
#include <sstream>

namespace mbt::repl {
namespace {

std::size_t node_index(const std::string& name) {
    return static_cast<std::size_t>(std::stoul(name.substr(1))) - 1;
}

std::string describe_event(const TraceEvent& e) {
    return e.node + "/" + e.action + "@" + std::to_string(e.ts_ms);
}

// Field-level distance between two cluster states: how many of role, term,
// commit point and oplog differ, summed over the nodes.
std::size_t state_distance(const ReplState& a, const ReplState& b,
                           std::string* detail = nullptr) {
    std::size_t d = 0;
    std::ostringstream why;
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        const NodeState& x = a.nodes[i];
        const NodeState& y = b.nodes[i];
        std::string n = "n" + std::to_string(i + 1);
        if (x.role != y.role) {
            ++d;
            why << n << ".role ";
        }
        if (x.term != y.term) {
            ++d;
            why << n << ".term ";
        }
        if (!(x.commit == y.commit)) {
            ++d;
            why << n << ".commitPoint ";
        }
        if (x.oplog != y.oplog) {
            ++d;
            why << n << ".oplog ";
        }
    }
    if (detail)
        *detail = why.str();
    return d;
}

} // namespace

std::vector<TraceEvent> order_events(std::vector<TraceEvent> events) {
    std::stable_sort(events.begin(), events.end(),
                     [](const TraceEvent& a, const TraceEvent& b) {
                         return a.ts_ms < b.ts_ms;
                     });
    for (std::size_t i = 1; i < events.size(); ++i)
        if (events[i].ts_ms == events[i - 1].ts_ms)
            throw TraceError("events share timestamp " +
                             std::to_string(events[i].ts_ms) + ": " +
                             describe_event(events[i - 1]) + " and " +
                             describe_event(events[i]));
    return events;
}

ReplState fold_event(ReplState state, const TraceEvent& event) {
    std::size_t i = node_index(event.node);
    if (i >= state.nodes.size())
        throw TraceError("event names unknown node " + event.node);
    if (event.role == Role::Leader)
        for (NodeState& n : state.nodes)
            n.role = Role::Follower;
    NodeState& n = state.nodes[i];
    n.role = event.role;
    n.term = event.term;
    n.commit = event.commit;
    n.oplog = event.oplog;
    return state;
}

std::vector<std::string> backfill_oplog(std::vector<TraceEvent>& events) {
    std::vector<std::string> log;
    for (TraceEvent& e : events) {
        if (e.oplog_start <= 1)
            continue;
        const std::size_t need = e.oplog_start - 1;

        const TraceEvent* donor = nullptr;
        for (const TraceEvent& d : events) {
            if (&d == &e || d.oplog_start != 1 || d.oplog.size() < need)
                continue;
            if (donor) {
                if (!std::equal(d.oplog.begin(), d.oplog.begin() + need,
                                donor->oplog.begin()))
                    throw TraceError("conflicting oplog donors for " +
                                     describe_event(e) + ": " +
                                     describe_event(*donor) + " vs " +
                                     describe_event(d));
                // Keep the most up-to-date donor for attribution.
                auto pos = [](const TraceEvent& t) {
                    return std::pair{t.oplog.empty() ? 0 : t.oplog.back(),
                                     t.oplog.size()};
                };
                if (pos(d) > pos(*donor))
                    donor = &d;
            } else {
                donor = &d;
            }
        }
        if (!donor)
            throw TraceError("no donor can backfill the oplog of " +
                             describe_event(e));

        e.oplog.insert(e.oplog.begin(), donor->oplog.begin(),
                       donor->oplog.begin() + need);
        for (std::size_t k = 1; k <= need; ++k)
            log.push_back("backfilled " + e.node + "@" + std::to_string(e.ts_ms) +
                          " position " + std::to_string(k) + " term " +
                          std::to_string(e.oplog[k - 1]) + " from " +
                          describe_event(*donor));
        e.oplog_start = 1;
    }
    return log;
}

CheckReport check_trace(const ReplParams& params, std::vector<TraceEvent> events,
                        bool backfill) {
    CheckReport report;
    events = order_events(std::move(events));
    if (backfill)
        (void)backfill_oplog(events);

    ReplState state = initial_repl_state(params);
    for (std::size_t i = 0; i < events.size(); ++i) {
        const TraceEvent& e = events[i];
        ReplState target = fold_event(state, e);
        if (target == state) {
            ++report.stutter_steps;
            continue;
        }

        auto candidates = successors(params, state);
        bool matched = false;
        for (auto& [label, t] : candidates) {
            if (label_action(label) == e.action && t == target) {
                state = std::move(target);
                ++report.steps_checked;
                matched = true;
                break;
            }
        }
        if (matched)
            continue;

        report.verdict = Verdict::Fail;
        report.failed_step = i;
        report.failure = "no enabled '" + e.action + "' action reproduces the state " +
                         describe_event(e) + " reports";
        for (auto& [label, t] : candidates) {
            ActionDiagnostic d;
            d.label = label;
            d.differing_fields = state_distance(t, target, &d.detail);
            report.nearest.push_back(std::move(d));
        }
        std::stable_sort(report.nearest.begin(), report.nearest.end(),
                         [&](const ActionDiagnostic& a, const ActionDiagnostic& b) {
                             bool an = a.label.rfind(e.action + "(", 0) == 0;
                             bool bn = b.label.rfind(e.action + "(", 0) == 0;
                             if (an != bn)
                                 return an;
                             return a.differing_fields < b.differing_fields;
                         });
        if (report.nearest.size() > 3)
            report.nearest.resize(3);
        return report;
    }
    return report;
}

} // namespace mbt::repl
