#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <mbt/mck/model.hpp>
#include <mbt/ot/ops.hpp>
#include <mbt/ot/transform.hpp>

namespace mbt::ot {

struct SyncParams {
    int clients = 3;
    std::size_t array_len = 3; // initial array is [1 .. array_len]
    bool include_swap = false;

    friend bool operator==(const SyncParams&, const SyncParams&) = default;
};

/// One client, as the model sees it. `own` is the operation the client
/// generated locally (engaged once it has acted); `pending` holds own ops
/// not yet uploaded; `downloaded` the transformed server ops it applied
/// (discarded markers included); `seen` an index into the server history.
struct ClientState {
    ArrayState array;
    std::optional<TaggedOp> own;
    std::vector<TaggedOp> pending;
    std::vector<TaggedOp> downloaded;
    std::size_t seen = 0;

    bool acted() const { return own.has_value(); }
    friend bool operator==(const ClientState&, const ClientState&) = default;
};

struct SyncState {
    ArrayState initial;
    ArrayState server_array;
    std::vector<TaggedOp> server_history; // transformed uploads, markers kept
    std::vector<ClientState> clients;

    bool synced(std::size_t c) const {
        return clients[c].pending.empty() &&
               clients[c].seen == server_history.size();
    }
    friend bool operator==(const SyncState&, const SyncState&) = default;
};

std::string encode(const SyncState& s);
SyncState decode(const std::string& text);

SyncState initial_sync_state(const SyncParams& params);

/// The operations a given client may generate against the initial array.
/// Values are array_len + client so every write is attributable.
std::vector<ArrayOp> op_universe(const SyncParams& params, int client);

/// Pairwise consistency: any two peers (server included) that have nothing
/// pending between them hold equal arrays.
bool peers_consistent(const SyncState& s);

/// Two-phase model: first the clients act in ascending id order (one
/// generated op each), then the lowest unsynced client runs its merge until
/// everyone converges. Exactly one action is enabled per state in phase
/// two, so terminal states correspond one-to-one with op choices.
mck::ModelDefinition sync_model(const SyncParams& params);

/// Runs one complete scenario (client c generates ops[c-1], then merges to
/// quiescence) through the same pipeline the model uses. `ops` must contain
/// params.clients entries.
SyncState run_scenario(const SyncParams& params, const std::vector<ArrayOp>& ops,
                       const RuleCaseSink& sink = nullptr);

} // namespace mbt::ot
