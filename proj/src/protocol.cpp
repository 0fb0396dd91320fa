#include "splaynet/protocol.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

namespace splaynet {

const char* to_string(MsgType t) {
    switch (t) {
        case MsgType::SplayRequest: return "splay_req";
        case MsgType::BetaRequest: return "beta_req";
        case MsgType::LockRequest: return "lock_req";
        case MsgType::LockAck: return "lock_ack";
        case MsgType::BetaAck: return "beta_ack";
        case MsgType::LinkChange: return "link_change";
        case MsgType::BufferChange: return "buffer_change";
        case MsgType::LockRelease: return "lock_release";
        case MsgType::SplayComplete: return "splay_complete";
    }
    return "?";
}

std::string key_str(const EntryKey& k) {
    std::ostringstream os;
    os << k.level1 << "/" << k.super_round << "." << k.round;
    return os.str();
}

void sync_links(NodeState& st, const Tree& t) {
    const TreeNode& n = t.node(st.id);
    st.links.parent = n.parent;
    st.links.left = n.left;
    st.links.right = n.right;
    st.links.lo = n.lo;
    st.links.hi = n.hi;
}

bool objective_met(const NodeState& st) {
    if (!st.splay) return false;
    NodeId peer = st.splay->peer;
    return st.links.is_neighbor(peer);
}

bool is_lca_of_pair(const NodeState& st) {
    if (!st.splay) return false;
    NodeId peer = st.splay->peer;
    return st.links.lo <= peer && peer <= st.links.hi;
}

namespace {

void send(ProtocolContext& ctx, NodeState& st, Message m) {
    m.from = st.id;
    m.seq = static_cast<std::uint32_t>(ctx.outbox->size());
    if (ctx.log) {
        std::string detail = std::string("to=") + std::to_string(m.to);
        if (m.has_entry) detail += " key=" + key_str(m.entry.key);
        ctx.log(st.id, to_string(m.type), detail);
    }
    ctx.outbox->push_back(std::move(m));
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

std::uint64_t upward_sig(const BufferEntry& e, NodeId send_to) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    h = mix(h, e.level2);
    h = mix(h, e.level3);
    h = mix(h, e.u_left);
    h = mix(h, e.u_right);
    h = mix(h, e.v_other);
    h = mix(h, static_cast<std::uint64_t>(e.kind));
    h = mix(h, e.kind_known ? 1 : 0);
    h = mix(h, send_to);
    return h == 0 ? 1 : h;
}

// Priority head honoring the test-only fault that inverts the id tie-break.
const BufferEntry* head_entry(const NodeState& st, const Tree& t) {
    const BufferEntry* best = nullptr;
    for (const BufferEntry& e : st.buffer.raw()) {
        if (!best) {
            best = &e;
            continue;
        }
        int c = compare_entries(t, st.id, e, *best);
        if (st.fault_invert_priority) {
            // flip ties that were decided by the ascending-id rule
            int cs = compare_entries(t, st.id, *best, e);
            bool id_decided =
                e.key.super_round == best->key.super_round && e.key.round == best->key.round &&
                hierarchy_rank(t, st.id, e.key.level1) == hierarchy_rank(t, st.id, best->key.level1);
            if (id_decided) c = -cs;
        }
        if (c < 0) best = &e;
    }
    return best;
}

void lock_node(NodeState& st, const EntryKey& key, ProtocolContext& ctx) {
    st.locked = true;
    st.locked_key = key;
    if (ctx.log) ctx.log(st.id, "lock", "key=" + key_str(key));
}

void unlock_node(NodeState& st, ProtocolContext& ctx) {
    st.locked = false;
    if (ctx.log) ctx.log(st.id, "free", "key=" + key_str(st.locked_key));
    st.locked_key = EntryKey{};
    st.links_dirty = true;  // duties may have been deferred while locked
}

// v's local link updates for the rotation it just granted/passed, plus the
// link-change to the child it gains from u.
void apply_v_locally(NodeState& st, const BufferEntry& e, ProtocolContext& ctx) {
    NodeId u = e.key.level1;
    NodeId gained = (u < st.id) ? e.u_right : e.u_left;
    if (u < st.id) st.links.left = gained; else st.links.right = gained;
    if (e.kind == RotationKind::ZigZig) {
        if (u < st.id) st.links.right = e.level3; else st.links.left = e.level3;
    }
    st.links.parent = u;
    ChainState& cs = st.chain[e.key];
    if (gained != kNoNode) {
        cs.announced_child = gained;
        cs.announced_child_old_parent = u;
        Message lc;
        lc.type = MsgType::LinkChange;
        lc.to = gained;
        lc.new_parent = st.id;
        if (st.pending && !st.pending->withdrawn && st.buffer.contains(st.pending->key)) {
            // piggyback our own live request so the new child ranks it
            if (const BufferEntry* own = st.buffer.find(st.pending->key)) lc.entries.push_back(*own);
        }
        send(ctx, st, std::move(lc));
    }
}

// w's local link updates (doubles only).
void apply_w_locally(NodeState& st, const BufferEntry& e, ProtocolContext& ctx) {
    NodeId v = e.level2;
    NodeId gained;
    NodeId gained_old_parent;
    if (e.kind == RotationKind::ZigZig) {
        gained = e.v_other;
        gained_old_parent = v;
        st.links.parent = v;
    } else {
        gained = (v < st.id) ? e.u_right : e.u_left;
        gained_old_parent = e.key.level1;
        st.links.parent = e.key.level1;
    }
    if (v < st.id) st.links.left = gained; else st.links.right = gained;
    ChainState& cs = st.chain[e.key];
    if (gained != kNoNode) {
        cs.announced_child = gained;
        cs.announced_child_old_parent = gained_old_parent;
        Message lc;
        lc.type = MsgType::LinkChange;
        lc.to = gained;
        lc.new_parent = st.id;
        if (st.pending && !st.pending->withdrawn && st.buffer.contains(st.pending->key)) {
            if (const BufferEntry* own = st.buffer.find(st.pending->key)) lc.entries.push_back(*own);
        }
        send(ctx, st, std::move(lc));
    }
}

// the bystander above the rotation: its child link switches to u
void apply_top_locally(NodeState& st, const BufferEntry& e, NodeId old_child) {
    if (old_child < st.id) st.links.left = e.key.level1; else st.links.right = e.key.level1;
}

void send_release(NodeState& st, ProtocolContext& ctx, const EntryKey& key, NodeId to, bool drop) {
    Message rel;
    rel.type = MsgType::LockRelease;
    rel.to = to;
    rel.has_entry = true;
    rel.entry.key = key;
    rel.drop = drop;
    send(ctx, st, std::move(rel));
}

void withdraw_pending(NodeState& st, ProtocolContext& ctx, const char* why) {
    if (!st.pending || st.pending->withdrawn) return;
    st.pending->withdrawn = true;
    st.buffer.remove(st.pending->key);
    if (ctx.log) ctx.log(st.id, "withdraw", std::string("key=") + key_str(st.pending->key) +
                                      " why=" + why);
}

// v-role / w-role upward actions for one buffered entry; also (re)decides
// zig vs double at v. Safe to call repeatedly; re-sends only when the chain
// information changed.
void evaluate_duty(NodeState& st, const Tree& t, BufferEntry& e, ProtocolContext& ctx) {
    (void)t;
    if (e.key.level1 == st.id) return;  // own request, handled by splay logic

    if (e.level2 == st.id) {
        // level-two node: decide the rotation type and involve the chain above
        NodeId u = e.key.level1;
        if (!st.links.is_child(u)) {
            st.buffer.remove(e.key);
            st.chain.erase(e.key);
            if (ctx.log) ctx.log(st.id, "drop_stale", "key=" + key_str(e.key));
            return;
        }
        NodeId peer = e.splay_peer;
        bool peer_in_subtree = st.links.lo <= peer && peer <= st.links.hi;
        bool i_am_lca = peer_in_subtree && (u < st.id ? peer >= st.id : peer <= st.id);
        bool zig = i_am_lca || st.links.parent == peer || st.links.parent == kNoNode;
        e.kind_known = true;
        if (zig) {
            e.kind = RotationKind::Zig;
            e.level3 = kNoNode;
            e.v_other = kNoNode;
        } else {
            e.kind = ((u < st.id) == (st.id < st.links.parent)) ? RotationKind::ZigZig
                                                                : RotationKind::ZigZag;
            e.level3 = st.links.parent;
            e.v_other = (u < st.id) ? st.links.right : st.links.left;
        }
        ChainState& cs = st.chain[e.key];
        if (zig && st.links.parent == kNoNode) {
            cs.top_duty = true;  // zig at the root: we grant ourselves
            return;
        }
        std::uint64_t sig = upward_sig(e, st.links.parent);
        if (cs.sent_sig != sig) {
            cs.sent_sig = sig;
            Message m;
            m.type = zig ? MsgType::LockRequest : MsgType::BetaRequest;
            m.to = st.links.parent;
            m.has_entry = true;
            m.entry = e;
            send(ctx, st, std::move(m));
        }
        return;
    }

    if (e.level3 == st.id) {
        // level-three node of a double rotation
        if (!st.links.is_child(e.level2)) {
            st.buffer.remove(e.key);
            st.chain.erase(e.key);
            if (ctx.log) ctx.log(st.id, "drop_stale", "key=" + key_str(e.key));
            return;
        }
        ChainState& cs = st.chain[e.key];
        if (st.links.parent == kNoNode) {
            cs.top_duty = true;  // double ending at the root
            return;
        }
        std::uint64_t sig = upward_sig(e, st.links.parent);
        if (cs.sent_sig != sig) {
            cs.sent_sig = sig;
            Message m;
            m.type = MsgType::LockRequest;
            m.to = st.links.parent;
            m.has_entry = true;
            m.entry = e;
            send(ctx, st, std::move(m));
        }
        return;
    }
}

void insert_and_evaluate(NodeState& st, const Tree& t, const BufferEntry& e,
                         ProtocolContext& ctx) {
    st.buffer.insert(t, e);
    if (BufferEntry* stored = st.buffer.find(e.key)) evaluate_duty(st, t, *stored, ctx);
}

// Grant wave arriving at this node. Returns false when the message must be
// parked until the node unlocks.
bool process_lock_ack(NodeState& st, const Tree& t, const Message& msg, ProtocolContext& ctx) {
    (void)t;
    const BufferEntry& e = msg.entry;
    const EntryKey& key = e.key;

    if (st.pending && st.pending->key == key) {
        if (st.locked) return false;
        if (st.pending->withdrawn) {
            send_release(st, ctx, key, msg.from, /*drop=*/true);
            st.buffer.remove(key);
            st.chain.erase(key);
            st.pending.reset();
            return true;
        }
        if (e.level2 != st.links.parent) {
            // granted along a chain we already walked away from
            send_release(st, ctx, key, msg.from, /*drop=*/true);
            return true;
        }
        CommitIntent ci;
        ci.requester = st.id;
        ci.entry = e;
        ci.ack_to = e.level2;
        ci.handoff_parent = msg.handoff_parent;
        ctx.commits->push_back(std::move(ci));
        if (ctx.log) ctx.log(st.id, "commit_ready", "key=" + key_str(key));
        return true;
    }

    if (st.locked) return false;

    if (e.level3 == st.id) {
        bool valid = st.links.is_child(e.level2) && msg.from == st.links.parent;
        if (!valid) {
            send_release(st, ctx, key, msg.from, /*drop=*/true);
            st.buffer.remove(key);
            st.chain.erase(key);
            return true;
        }
        lock_node(st, key, ctx);
        ChainState& cs = st.chain[key];
        cs.granted_by = msg.from;
        apply_w_locally(st, e, ctx);
        Message down;
        down.type = MsgType::LockAck;
        down.to = e.level2;
        down.has_entry = true;
        down.entry = e;
        down.handoff_parent = msg.handoff_parent;
        send(ctx, st, std::move(down));
        return true;
    }

    if (e.level2 == st.id) {
        bool valid = st.links.is_child(e.key.level1);
        if (e.level3 != kNoNode) {
            valid = valid && msg.from == e.level3 && st.links.parent == e.level3;
        } else {
            valid = valid && msg.from == st.links.parent;
        }
        if (!valid) {
            send_release(st, ctx, key, msg.from, /*drop=*/true);
            st.buffer.remove(key);
            st.chain.erase(key);
            return true;
        }
        lock_node(st, key, ctx);
        ChainState& cs = st.chain[key];
        cs.granted_by = msg.from;
        apply_v_locally(st, e, ctx);
        Message down;
        down.type = MsgType::LockAck;
        down.to = e.key.level1;
        down.has_entry = true;
        down.entry = e;
        down.handoff_parent = msg.handoff_parent;
        send(ctx, st, std::move(down));
        return true;
    }

    // no role here anymore: retract the wave
    send_release(st, ctx, key, msg.from, /*drop=*/true);
    return true;
}

void process_release(NodeState& st, const Message& msg, ProtocolContext& ctx) {
    const EntryKey& key = msg.entry.key;
    auto it = st.chain.find(key);
    NodeId forward_to = kNoNode;
    if (it != st.chain.end()) {
        forward_to = it->second.granted_by;
        if (it->second.announced_child != kNoNode && ctx.mirror_resyncs) {
            // undo the early link announcement; the engine restores the
            // child's view from the committed tree, which may have moved on
            ctx.mirror_resyncs->push_back(it->second.announced_child);
        }
    }
    if (st.locked && st.locked_key == key) {
        unlock_node(st, ctx);
        if (ctx.mirror_resyncs) ctx.mirror_resyncs->push_back(st.id);
    }
    if (msg.drop) {
        st.buffer.remove(key);
        st.chain.erase(key);
        if (st.pending && st.pending->key == key) {
            // our own withdrawn request fully dissolved
            if (st.pending->withdrawn) st.pending.reset();
        }
    } else if (it != st.chain.end()) {
        it->second.granted_by = kNoNode;
        it->second.granted = false;
    }
    if (forward_to != kNoNode) {
        Message rel;
        rel.type = MsgType::LockRelease;
        rel.to = forward_to;
        rel.has_entry = true;
        rel.entry.key = key;
        rel.drop = msg.drop;
        send(ctx, st, std::move(rel));
    }
}

void route_splay_request(NodeState& st, const Message& msg, ProtocolContext& ctx) {
    NodeId dst = msg.dst;
    Message fwd = msg;
    if (st.links.lo <= dst && dst <= st.links.hi) {
        fwd.to = (dst < st.id) ? st.links.left : st.links.right;
    } else {
        fwd.to = st.links.parent;
    }
    if (fwd.to == kNoNode) {
        if (ctx.log) ctx.log(st.id, "route_dead_end", "dst=" + std::to_string(dst));
        return;
    }
    fwd.entries.clear();
    send(ctx, st, std::move(fwd));
}

void complete_splay_locally(NodeState& st, ProtocolContext& ctx, bool notify_peer) {
    if (!st.splay) return;
    NodeId peer = st.splay->peer;
    if (notify_peer) {
        Message done;
        done.type = MsgType::SplayComplete;
        done.to = peer;
        done.src = st.splay->role == SplayRole::Source ? st.id : peer;
        done.dst = st.splay->role == SplayRole::Source ? peer : st.id;
        done.splay_index = st.splay->splay_index;
        send(ctx, st, std::move(done));
    }
    withdraw_pending(st, ctx, "objective");
    st.splays_completed += 1;
    if (ctx.log) ctx.log(st.id, "complete", "peer=" + std::to_string(peer));
    st.splay.reset();
}

void splay_logic(NodeState& st, const Tree& t, ProtocolContext& ctx) {
    if (!st.splay) return;
    // a locked node is mid-rotation with speculative links; objective and
    // LCA decisions wait until it is freed and resynced
    if (st.locked) return;
    if (objective_met(st)) {
        complete_splay_locally(st, ctx, /*notify_peer=*/true);
        return;
    }
    if (is_lca_of_pair(st)) {
        if (!st.splay->waiting_as_lca) {
            st.splay->waiting_as_lca = true;
            withdraw_pending(st, ctx, "lca_wait");
            if (ctx.log) ctx.log(st.id, "lca_wait", "peer=" + std::to_string(st.splay->peer));
        }
        return;
    }
    if (st.splay->waiting_as_lca) {
        st.splay->waiting_as_lca = false;
        if (ctx.log) ctx.log(st.id, "lca_resume", "peer=" + std::to_string(st.splay->peer));
    }
    if (st.locked || !ctx.generation_allowed) return;
    if (st.pending && !st.pending->withdrawn) return;

    // (re)issue our rotation request
    assert(st.links.parent != kNoNode && "root is always the LCA of any pair");
    EntryKey key{st.id, st.rotations_completed + 1, st.splay->super_round};
    BufferEntry e;
    e.key = key;
    e.level2 = st.links.parent;
    e.splay_peer = st.splay->peer;
    e.u_left = st.links.left;
    e.u_right = st.links.right;
    st.buffer.insert(t, e);
    bool resumed = st.pending.has_value();
    st.pending = PendingOwn{key, false, ctx.slot};
    ChainState& cs = st.chain[key];
    cs.sent_sig = upward_sig(e, st.links.parent);
    Message m;
    m.type = MsgType::BetaRequest;
    m.to = st.links.parent;
    m.has_entry = true;
    m.entry = e;
    if (ctx.log)
        ctx.log(st.id, "generate",
                "key=" + key_str(key) + (resumed ? " resumed=1" : ""));
    send(ctx, st, std::move(m));
}

// re-examine everything that depends on our own links
void reevaluate_after_link_change(NodeState& st, const Tree& t, ProtocolContext& ctx) {
    if (st.pending && !st.pending->withdrawn) {
        if (const BufferEntry* own = st.buffer.find(st.pending->key)) {
            BufferEntry e = *own;
            bool changed = e.level2 != st.links.parent || e.u_left != st.links.left ||
                           e.u_right != st.links.right;
            if (changed && st.links.parent != kNoNode) {
                e.level2 = st.links.parent;
                e.u_left = st.links.left;
                e.u_right = st.links.right;
                e.level3 = kNoNode;
                e.kind_known = false;
                st.buffer.insert(t, e);
                ChainState& cs = st.chain[e.key];
                std::uint64_t sig = upward_sig(e, st.links.parent);
                if (cs.sent_sig != sig) {
                    cs.sent_sig = sig;
                    Message m;
                    m.type = MsgType::BetaRequest;
                    m.to = st.links.parent;
                    m.has_entry = true;
                    m.entry = e;
                    if (ctx.log) ctx.log(st.id, "repair", "key=" + key_str(e.key));
                    send(ctx, st, std::move(m));
                }
            }
        }
    }
    // duties for everything we relay
    std::vector<EntryKey> keys;
    for (const BufferEntry& e : st.buffer.raw()) keys.push_back(e.key);
    for (const EntryKey& k : keys) {
        if (BufferEntry* stored = st.buffer.find(k)) evaluate_duty(st, t, *stored, ctx);
    }
}

void handle_message(NodeState& st, const Tree& t, const Message& msg, ProtocolContext& ctx) {
    switch (msg.type) {
        case MsgType::SplayRequest: {
            if (msg.dst == st.id) {
                activate_destination(st, msg.src, static_cast<std::size_t>(msg.splay_index), ctx);
            } else {
                route_splay_request(st, msg, ctx);
            }
            break;
        }
        case MsgType::BetaRequest:
        case MsgType::LockRequest: {
            BufferEntry e = msg.entry;
            st.buffer.insert(t, e);
            if (msg.type == MsgType::LockRequest) {
                // we are the chain top for this request
                NodeId expected_child = e.level3 != kNoNode ? e.level3 : e.level2;
                ChainState& cs = st.chain[e.key];
                if (st.links.is_child(expected_child)) {
                    cs.top_duty = true;
                } else {
                    st.buffer.remove(e.key);
                    st.chain.erase(e.key);
                    if (ctx.log) ctx.log(st.id, "drop_stale", "key=" + key_str(e.key));
                }
            } else if (BufferEntry* stored = st.buffer.find(e.key)) {
                evaluate_duty(st, t, *stored, ctx);
            }
            break;
        }
        case MsgType::LockAck: {
            if (!process_lock_ack(st, t, msg, ctx)) {
                st.held_grants.push_back(msg);
                if (ctx.log) ctx.log(st.id, "hold_grant", "key=" + key_str(msg.entry.key));
            }
            break;
        }
        case MsgType::BetaAck: {
            const EntryKey& key = msg.entry.key;
            if (st.locked && st.locked_key == key) {
                unlock_node(st, ctx);
                if (msg.entry.level2 == st.id && msg.entry.level3 != kNoNode) {
                    Message up = msg;
                    up.to = msg.entry.level3;
                    send(ctx, st, std::move(up));
                }
            }
            break;
        }
        case MsgType::LinkChange: {
            st.links.parent = msg.new_parent;
            st.links_dirty = true;
            if (ctx.log)
                ctx.log(st.id, "set_parent", "parent=" + std::to_string(msg.new_parent));
            for (const BufferEntry& e : msg.entries) st.buffer.insert(t, e);
            if (msg.new_parent != kNoNode) {
                Message bc;
                bc.type = MsgType::BufferChange;
                bc.to = msg.new_parent;
                bc.entries = st.buffer.entries_involving(st.id);
                send(ctx, st, std::move(bc));
            }
            break;
        }
        case MsgType::BufferChange: {
            if (msg.completion && st.locked && st.locked_key == msg.entry.key) {
                unlock_node(st, ctx);
            }
            for (const BufferEntry& e : msg.entries) insert_and_evaluate(st, t, e, ctx);
            break;
        }
        case MsgType::LockRelease: {
            process_release(st, msg, ctx);
            break;
        }
        case MsgType::SplayComplete: {
            if (st.splay && (st.splay->peer == msg.src || st.splay->peer == msg.dst)) {
                complete_splay_locally(st, ctx, /*notify_peer=*/false);
            }
            break;
        }
    }
}

void try_grants(NodeState& st, const Tree& t, ProtocolContext& ctx) {
    if (st.locked) return;
    const BufferEntry* head = head_entry(st, t);
    if (!head) return;
    auto it = st.chain.find(head->key);
    if (it == st.chain.end()) return;
    ChainState& cs = it->second;
    const BufferEntry e = *head;

    bool is_own = st.pending && st.pending->key == e.key;
    if (is_own) return;

    if (cs.top_duty && !cs.granted) {
        NodeId grant_child = e.level3 != kNoNode ? e.level3 : e.level2;
        if (e.level2 == st.id && e.kind == RotationKind::Zig && st.links.parent == kNoNode) {
            // zig whose chain ends at us (we are the root): grant and take part
            if (!st.links.is_child(e.key.level1)) {
                st.buffer.remove(e.key);
                st.chain.erase(e.key);
                return;
            }
            cs.granted = true;
            lock_node(st, e.key, ctx);
            if (ctx.log) ctx.log(st.id, "grant", "key=" + key_str(e.key));
            apply_v_locally(st, e, ctx);
            Message down;
            down.type = MsgType::LockAck;
            down.to = e.key.level1;
            down.has_entry = true;
            down.entry = e;
            down.handoff_parent = kNoNode;
            send(ctx, st, std::move(down));
            return;
        }
        if (e.level3 == st.id && st.links.parent == kNoNode) {
            // double rotation whose chain ends at us
            if (!st.links.is_child(e.level2)) {
                st.buffer.remove(e.key);
                st.chain.erase(e.key);
                return;
            }
            cs.granted = true;
            lock_node(st, e.key, ctx);
            if (ctx.log) ctx.log(st.id, "grant", "key=" + key_str(e.key));
            apply_w_locally(st, e, ctx);
            Message down;
            down.type = MsgType::LockAck;
            down.to = e.level2;
            down.has_entry = true;
            down.entry = e;
            down.handoff_parent = kNoNode;
            send(ctx, st, std::move(down));
            return;
        }
        // plain bystander top
        if (!st.links.is_child(grant_child)) {
            st.buffer.remove(e.key);
            st.chain.erase(e.key);
            if (ctx.log) ctx.log(st.id, "drop_stale", "key=" + key_str(e.key));
            return;
        }
        cs.granted = true;
        lock_node(st, e.key, ctx);
        if (ctx.log) ctx.log(st.id, "grant", "key=" + key_str(e.key));
        apply_top_locally(st, e, grant_child);
        Message down;
        down.type = MsgType::LockAck;
        down.to = grant_child;
        down.has_entry = true;
        down.entry = e;
        down.handoff_parent = st.id;
        send(ctx, st, std::move(down));
    }
}

void process_held_grants(NodeState& st, const Tree& t, ProtocolContext& ctx) {
    if (st.held_grants.empty()) return;
    std::vector<Message> held;
    held.swap(st.held_grants);
    std::stable_sort(held.begin(), held.end(), [](const Message& a, const Message& b) {
        return EntryKeyLess{}(a.entry.key, b.entry.key);
    });
    for (std::size_t i = 0; i < held.size(); ++i) {
        if (st.locked) {
            st.held_grants.insert(st.held_grants.end(), held.begin() + i, held.end());
            return;
        }
        if (!process_lock_ack(st, t, held[i], ctx)) st.held_grants.push_back(held[i]);
    }
}

// The committed tree lags an in-flight grant wave by a couple of slots, so
// an entry must stay outside the cone this long before it is dropped.
constexpr int kStaleGraceSlots = 8;

void purge_buffer(NodeState& st, const Tree& t, ProtocolContext& ctx) {
    std::vector<EntryKey> drop;
    for (const BufferEntry& e : st.buffer.raw()) {
        if (e.key.level1 == st.id) {
            if (!st.pending || !(st.pending->key == e.key)) drop.push_back(e.key);
            continue;
        }
        // entries from the parent (update event 5) are held but rank last
        if (e.key.level1 == st.links.parent) {
            st.stale_streak.erase(e.key);
            continue;
        }
        if (hierarchy_rank(t, st.id, e.key.level1) > 3) {
            if (++st.stale_streak[e.key] >= kStaleGraceSlots) drop.push_back(e.key);
        } else {
            st.stale_streak.erase(e.key);
        }
    }
    for (const EntryKey& k : drop) {
        st.buffer.remove(k);
        st.chain.erase(k);
        st.stale_streak.erase(k);
        if (ctx.log) ctx.log(st.id, "purge", "key=" + key_str(k));
    }
    // forget streaks of entries that left the buffer by other paths
    for (auto it = st.stale_streak.begin(); it != st.stale_streak.end();) {
        if (!st.buffer.contains(it->first)) {
            it = st.stale_streak.erase(it);
        } else {
            ++it;
        }
    }
}

}  // namespace

std::vector<BufferEntry> sorted_entries(const NodeState& st, const Tree& t) {
    std::vector<BufferEntry> out = st.buffer.raw();
    std::stable_sort(out.begin(), out.end(), [&](const BufferEntry& a, const BufferEntry& b) {
        int c = compare_entries(t, st.id, a, b);
        if (st.fault_invert_priority) {
            bool id_decided =
                a.key.super_round == b.key.super_round && a.key.round == b.key.round &&
                hierarchy_rank(t, st.id, a.key.level1) == hierarchy_rank(t, st.id, b.key.level1);
            if (id_decided) c = -c;
        }
        return c < 0;
    });
    return out;
}

void start_splay(NodeState& st, NodeId dst, std::size_t splay_index, ProtocolContext& ctx) {
    assert(!st.splay);
    ActiveSplay sp;
    sp.peer = dst;
    sp.role = SplayRole::Source;
    sp.splay_index = splay_index;
    sp.super_round = st.splays_completed + 1;
    st.splay = sp;
    if (ctx.log) ctx.log(st.id, "splay_start", "dst=" + std::to_string(dst));
    Message m;
    m.type = MsgType::SplayRequest;
    m.src = st.id;
    m.dst = dst;
    m.splay_index = splay_index;
    if (st.links.lo <= dst && dst <= st.links.hi) {
        m.to = (dst < st.id) ? st.links.left : st.links.right;
    } else {
        m.to = st.links.parent;
    }
    send(ctx, st, std::move(m));
}

void activate_destination(NodeState& st, NodeId src, std::size_t splay_index,
                          ProtocolContext& ctx) {
    if (st.splay) {
        // engine reserves endpoints at issue time, so an active splay here
        // can only be the same pair racing its own completion
        return;
    }
    ActiveSplay sp;
    sp.peer = src;
    sp.role = SplayRole::Destination;
    sp.splay_index = splay_index;
    sp.super_round = st.splays_completed + 1;
    st.splay = sp;
    if (ctx.log) ctx.log(st.id, "splay_activate", "src=" + std::to_string(src));
}

void node_slot(NodeState& st, const std::vector<Message>& inbox, ProtocolContext& ctx) {
    const Tree& t = *ctx.tree;
    for (const Message& m : inbox) handle_message(st, t, m, ctx);
    if (st.links_dirty && !st.locked) {
        st.links_dirty = false;
        reevaluate_after_link_change(st, t, ctx);
    }
    purge_buffer(st, t, ctx);
    splay_logic(st, t, ctx);
    if (!st.locked) process_held_grants(st, t, ctx);
    try_grants(st, t, ctx);
}

}  // namespace splaynet
