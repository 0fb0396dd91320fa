#ifndef SPLAYNET_BUFFER_HPP
#define SPLAYNET_BUFFER_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "splaynet/rotation.hpp"
#include "splaynet/topology.hpp"

namespace splaynet {

/// Identity of a rotation request: requester plus its round / super-round
/// sequence numbers. A node has at most one live request at a time, so the
/// key is unique network-wide.
struct EntryKey {
    NodeId level1 = kNoNode;       // requester u
    std::uint32_t round = 0;       // u's rotation sequence number
    std::uint32_t super_round = 0; // u's splay sequence number

    bool operator==(const EntryKey&) const = default;
};

/// A pending rotation request as stored in a buffer. level2 is the node the
/// request travels through (u's parent), level3 the farthest participant
/// (empty for a zig). The child ids ferry the subtree hand-off information
/// the participants need when the rotation is granted.
struct BufferEntry {
    EntryKey key;
    NodeId level2 = kNoNode;
    NodeId level3 = kNoNode;
    NodeId splay_peer = kNoNode;
    RotationKind kind = RotationKind::Zig;
    bool kind_known = false;
    NodeId u_left = kNoNode;
    NodeId u_right = kNoNode;
    NodeId v_other = kNoNode;  // v's child on the far side of u (doubles)
};

/// Priority routine: (super-round, round, hierarchy w.r.t. the buffer
/// owner, ascending id). Hierarchy ranks self before children before
/// grandchildren before great-grandchildren; anything farther is stale and
/// ranks last until cleanup.
int hierarchy_rank(const Tree& t, NodeId owner, NodeId level1);
bool entry_before(const Tree& t, NodeId owner, const BufferEntry& a, const BufferEntry& b);
int compare_entries(const Tree& t, NodeId owner, const BufferEntry& a, const BufferEntry& b);

/// Per-node request queue, capacity 15 (self + 2 children + 4 grandchildren
/// + 8 great-grandchildren).
class Buffer {
public:
    static constexpr std::size_t kCapacity = 15;

    explicit Buffer(NodeId owner = kNoNode) : owner_(owner) {}

    NodeId owner() const { return owner_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    /// Insert in priority position. Duplicate keys refresh the stored
    /// metadata instead of inserting twice. Throws on overflow past 15
    /// once stale entries have been dropped.
    void insert(const Tree& t, const BufferEntry& e);

    void remove(const EntryKey& key);
    bool contains(const EntryKey& key) const;
    BufferEntry* find(const EntryKey& key);
    const BufferEntry* find(const EntryKey& key) const;

    /// Highest-priority entry under the current tree, or nothing.
    std::optional<BufferEntry> head(const Tree& t) const;

    /// Link-change reconciliation: drop entries that reference the departed
    /// neighbor at any level, then merge the entries imported from the new
    /// neighbor.
    void reconcile_on_link_change(const Tree& t, NodeId old_neighbor, NodeId new_neighbor,
                                  const std::vector<BufferEntry>& imported);

    /// Drop entries whose requester is no longer within three hops below
    /// the owner. Returns the removed keys.
    std::vector<EntryKey> purge_stale(const Tree& t);

    /// Entries referencing `who` at level one, two or three — the set a new
    /// child forwards to its new parent.
    std::vector<BufferEntry> entries_involving(NodeId who) const;

    std::vector<BufferEntry> sorted(const Tree& t) const;
    const std::vector<BufferEntry>& raw() const { return entries_; }

private:
    NodeId owner_;
    std::vector<BufferEntry> entries_;
};

}  // namespace splaynet

#endif
