#include "splaynet/buffer.hpp"

#include <algorithm>
#include <stdexcept>

namespace splaynet {

int hierarchy_rank(const Tree& t, NodeId owner, NodeId level1) {
    if (!t.contains(level1)) return 4;
    NodeId cur = level1;
    for (int hops = 0; hops <= 3; ++hops) {
        if (cur == owner) return hops;
        if (cur == kNoNode) break;
        cur = t.node(cur).parent;
    }
    return 4;  // stale: no longer within the owner's request cone
}

int compare_entries(const Tree& t, NodeId owner, const BufferEntry& a, const BufferEntry& b) {
    int ra = hierarchy_rank(t, owner, a.key.level1);
    int rb = hierarchy_rank(t, owner, b.key.level1);
    // stale entries sort behind every live one until they are cleaned up
    bool sa = ra > 3, sb = rb > 3;
    if (sa != sb) return sa ? 1 : -1;
    if (a.key.super_round != b.key.super_round)
        return a.key.super_round < b.key.super_round ? -1 : 1;
    if (a.key.round != b.key.round) return a.key.round < b.key.round ? -1 : 1;
    if (ra != rb) return ra < rb ? -1 : 1;
    if (a.key.level1 != b.key.level1) return a.key.level1 < b.key.level1 ? -1 : 1;
    return 0;
}

bool entry_before(const Tree& t, NodeId owner, const BufferEntry& a, const BufferEntry& b) {
    return compare_entries(t, owner, a, b) < 0;
}

void Buffer::insert(const Tree& t, const BufferEntry& e) {
    if (BufferEntry* existing = find(e.key)) {
        // same request re-delivered (possibly along a new chain): refresh
        // the routing metadata, keep the identity
        *existing = e;
        return;
    }
    entries_.push_back(e);
    if (entries_.size() > kCapacity) {
        purge_stale(t);
        if (entries_.size() > kCapacity)
            throw std::logic_error("buffer overflow past 15 live entries at node " +
                                   std::to_string(owner_));
    }
}

void Buffer::remove(const EntryKey& key) {
    entries_.erase(std::remove_if(entries_.begin(), entries_.end(),
                                  [&](const BufferEntry& e) { return e.key == key; }),
                   entries_.end());
}

bool Buffer::contains(const EntryKey& key) const { return find(key) != nullptr; }

BufferEntry* Buffer::find(const EntryKey& key) {
    for (BufferEntry& e : entries_)
        if (e.key == key) return &e;
    return nullptr;
}

const BufferEntry* Buffer::find(const EntryKey& key) const {
    for (const BufferEntry& e : entries_)
        if (e.key == key) return &e;
    return nullptr;
}

std::optional<BufferEntry> Buffer::head(const Tree& t) const {
    if (entries_.empty()) return std::nullopt;
    const BufferEntry* best = &entries_.front();
    for (const BufferEntry& e : entries_)
        if (entry_before(t, owner_, e, *best)) best = &e;
    return *best;
}

void Buffer::reconcile_on_link_change(const Tree& t, NodeId old_neighbor, NodeId new_neighbor,
                                      const std::vector<BufferEntry>& imported) {
    (void)new_neighbor;
    if (old_neighbor != kNoNode) {
        entries_.erase(std::remove_if(entries_.begin(), entries_.end(),
                                      [&](const BufferEntry& e) {
                                          return e.key.level1 == old_neighbor ||
                                                 e.level2 == old_neighbor ||
                                                 e.level3 == old_neighbor;
                                      }),
                       entries_.end());
    }
    for (const BufferEntry& e : imported) insert(t, e);
}

std::vector<EntryKey> Buffer::purge_stale(const Tree& t) {
    std::vector<EntryKey> removed;
    auto it = std::remove_if(entries_.begin(), entries_.end(), [&](const BufferEntry& e) {
        if (hierarchy_rank(t, owner_, e.key.level1) > 3) {
            removed.push_back(e.key);
            return true;
        }
        return false;
    });
    entries_.erase(it, entries_.end());
    return removed;
}

std::vector<BufferEntry> Buffer::entries_involving(NodeId who) const {
    std::vector<BufferEntry> out;
    for (const BufferEntry& e : entries_)
        if (e.key.level1 == who || e.level2 == who || e.level3 == who) out.push_back(e);
    return out;
}

std::vector<BufferEntry> Buffer::sorted(const Tree& t) const {
    std::vector<BufferEntry> out = entries_;
    std::stable_sort(out.begin(), out.end(), [&](const BufferEntry& a, const BufferEntry& b) {
        return entry_before(t, owner_, a, b);
    });
    return out;
}

}  // namespace splaynet
