#ifndef SPLAYNET_PROTOCOL_HPP
#define SPLAYNET_PROTOCOL_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "splaynet/buffer.hpp"
#include "splaynet/rotation.hpp"
#include "splaynet/topology.hpp"

namespace splaynet {

enum class MsgType : std::uint8_t {
    SplayRequest,   // routed hop-by-hop from source to destination
    BetaRequest,    // rotation request travelling up the chain
    LockRequest,    // chain top asked to grant
    LockAck,        // grant wave moving down the chain
    BetaAck,        // release wave moving up after the commit
    LinkChange,     // you have a new parent
    BufferChange,   // buffer contents forwarded across a fresh link
    LockRelease,    // grant undone (stale chain or withdrawn request)
    SplayComplete,  // splay objective reached
};

const char* to_string(MsgType t);

struct Message {
    MsgType type{};
    NodeId from = kNoNode;
    NodeId to = kNoNode;
    // SplayRequest / SplayComplete
    NodeId src = kNoNode;
    NodeId dst = kNoNode;
    // entry-bearing messages
    bool has_entry = false;
    BufferEntry entry;
    NodeId handoff_parent = kNoNode;  // LockAck: the node above the rotation
    bool drop = false;                // LockRelease: also remove the entry
    NodeId new_parent = kNoNode;      // LinkChange
    std::vector<BufferEntry> entries; // BufferChange / LinkChange piggyback
    bool completion = false;          // BufferChange after a commit
    std::uint64_t splay_index = 0;    // SplayRequest/SplayComplete bookkeeping
    std::uint32_t seq = 0;            // deterministic delivery order
};

struct LocalLinks {
    NodeId parent = kNoNode;
    NodeId left = kNoNode;
    NodeId right = kNoNode;
    NodeId lo = kNoNode;
    NodeId hi = kNoNode;

    bool is_child(NodeId x) const { return x != kNoNode && (x == left || x == right); }
    bool is_neighbor(NodeId x) const { return is_child(x) || (x != kNoNode && x == parent); }
};

enum class SplayRole : std::uint8_t { Source, Destination };

struct ActiveSplay {
    NodeId peer = kNoNode;
    SplayRole role = SplayRole::Source;
    bool waiting_as_lca = false;
    std::size_t splay_index = 0;    // engine bookkeeping
    std::uint32_t super_round = 0;  // this node's splay sequence number
};

struct PendingOwn {
    EntryKey key;
    bool withdrawn = false;
    std::uint64_t request_slot = 0;
};

/// Local per-entry bookkeeping: which chain role this node plays and what
/// it has already sent for it.
struct ChainState {
    bool top_duty = false;     // must grant (got a LockRequest, or chain ends here)
    bool granted = false;      // grant issued, this node locked
    NodeId granted_by = kNoNode;               // who passed the grant to us
    NodeId announced_child = kNoNode;          // t-role told to re-parent to us
    NodeId announced_child_old_parent = kNoNode;
    std::uint64_t sent_sig = 0;                // dedupes upward (re)sends
};

struct EntryKeyLess {
    bool operator()(const EntryKey& a, const EntryKey& b) const {
        if (a.level1 != b.level1) return a.level1 < b.level1;
        if (a.super_round != b.super_round) return a.super_round < b.super_round;
        return a.round < b.round;
    }
};

struct NodeState {
    NodeId id = kNoNode;
    LocalLinks links;
    bool locked = false;
    EntryKey locked_key{};
    Buffer buffer;
    std::optional<ActiveSplay> splay;
    std::optional<PendingOwn> pending;
    std::uint32_t rotations_completed = 0;
    std::uint32_t splays_completed = 0;
    std::map<EntryKey, ChainState, EntryKeyLess> chain;
    std::map<EntryKey, int, EntryKeyLess> stale_streak;  // cone misses in a row
    std::vector<Message> held_grants;
    bool fault_invert_priority = false;  // test-only: breaks the id tie-break
    bool links_dirty = false;            // re-evaluate duties when unlocked
};

/// The requester is ready to rotate: all locks are held, the engine applies
/// the rotation at the slot boundary.
struct CommitIntent {
    NodeId requester = kNoNode;
    BufferEntry entry;
    NodeId ack_to = kNoNode;          // level2, gets the BetaAck
    NodeId handoff_parent = kNoNode;  // node above the rotation, or none
};

/// Side channel from node handlers back to the engine. Handlers may only
/// touch their own NodeState; everything else goes through here.
struct ProtocolContext {
    const Tree* tree = nullptr;
    std::uint64_t slot = 0;
    std::vector<Message>* outbox = nullptr;
    std::vector<CommitIntent>* commits = nullptr;
    std::vector<NodeId>* mirror_resyncs = nullptr;  // released speculative links
    std::function<void(NodeId, const std::string&, const std::string&)> log;
    bool generation_allowed = true;  // lockstep gate
};

/// Fully process one time-slot for a node: ingest the inbox, run buffer
/// maintenance, splay-objective and LCA-wait logic, request generation and
/// the head-gated grant duties.
void node_slot(NodeState& st, const std::vector<Message>& inbox, ProtocolContext& ctx);

// exposed pieces (unit tested / reused by the engine)
bool objective_met(const NodeState& st);
bool is_lca_of_pair(const NodeState& st);
void start_splay(NodeState& st, NodeId dst, std::size_t splay_index, ProtocolContext& ctx);
void activate_destination(NodeState& st, NodeId src, std::size_t splay_index,
                          ProtocolContext& ctx);
void sync_links(NodeState& st, const Tree& t);

/// Buffer in this node's own priority order (honors the fault-injection
/// flag); detectors compare these across nodes.
std::vector<BufferEntry> sorted_entries(const NodeState& st, const Tree& t);

std::string key_str(const EntryKey& k);

}  // namespace splaynet

#endif
