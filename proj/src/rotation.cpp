#include "splaynet/rotation.hpp"

#include <algorithm>
#include <stdexcept>

namespace splaynet {

const char* to_string(RotationKind k) {
    switch (k) {
        case RotationKind::Zig: return "zig";
        case RotationKind::ZigZig: return "zigzig";
        case RotationKind::ZigZag: return "zigzag";
    }
    return "?";
}

RotationKind classify(const Tree& t, NodeId u, NodeId stop_at) {
    const TreeNode& un = t.node(u);
    if (un.parent == kNoNode) throw std::logic_error("cannot rotate root");
    if (u == stop_at) throw std::logic_error("u equals stop node");
    NodeId v = un.parent;
    if (v == stop_at) return RotationKind::Zig;
    NodeId w = t.node(v).parent;
    if (w == kNoNode) return RotationKind::Zig;  // no grandparent below stop_at
    bool u_right = u > v;
    bool v_right = v > w;
    return (u_right == v_right) ? RotationKind::ZigZig : RotationKind::ZigZag;
}

std::vector<NodeId> locked_set(const Tree& t, NodeId u, RotationKind kind) {
    const TreeNode& un = t.node(u);
    if (un.parent == kNoNode) throw std::logic_error("cannot rotate root");
    NodeId v = un.parent;
    NodeId w = t.node(v).parent;
    std::vector<NodeId> out;
    if (kind == RotationKind::Zig) {
        if (w != kNoNode) out.push_back(w);
        out.push_back(v);
        out.push_back(u);
    } else {
        if (w == kNoNode) throw std::logic_error("kind mismatch: no grandparent");
        NodeId z = t.node(w).parent;
        if (z != kNoNode) out.push_back(z);
        out.push_back(w);
        out.push_back(v);
        out.push_back(u);
    }
    return out;
}

std::vector<NodeId> notify_targets(const RotationEffect& effect) {
    std::vector<NodeId> out;
    for (const LinkChangeRecord& rec : effect.displaced) {
        NodeId n = rec.node;
        bool participant = std::find(effect.participants.begin(), effect.participants.end(), n) !=
                           effect.participants.end();
        if (!participant && std::find(out.begin(), out.end(), n) == out.end()) {
            out.push_back(n);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

struct LinkSnapshot {
    NodeId node;
    NodeId parent, left, right;
};

void snap(const Tree& t, NodeId id, std::vector<LinkSnapshot>& into) {
    if (id == kNoNode) return;
    for (const LinkSnapshot& s : into)
        if (s.node == id) return;
    const TreeNode& n = t.node(id);
    into.push_back({id, n.parent, n.left, n.right});
}

void set_parent(Tree& t, NodeId child, NodeId parent) {
    if (child != kNoNode) t.node(child).parent = parent;
}

// locked set in top-down order: bystander above, then the participants
std::vector<NodeId> with_top(const std::vector<NodeId>& participants, NodeId top) {
    std::vector<NodeId> out;
    if (top != kNoNode) out.push_back(top);
    for (auto it = participants.rbegin(); it != participants.rend(); ++it) out.push_back(*it);
    return out;
}

// Hand the rotated block back to the node above it (or make u the root).
void attach_top(Tree& t, NodeId old_top_child, NodeId top, NodeId u) {
    if (top == kNoNode) {
        t.node(u).parent = kNoNode;
        t.set_root(u);
        return;
    }
    TreeNode& tn = t.node(top);
    if (old_top_child > top) {
        tn.right = u;
    } else {
        tn.left = u;
    }
    t.node(u).parent = top;
}

}  // namespace

RotationEffect apply(Tree& t, NodeId u, RotationKind kind) {
    TreeNode& un = t.node(u);
    if (un.parent == kNoNode) throw std::logic_error("cannot rotate root");
    NodeId v = un.parent;
    NodeId w = t.node(v).parent;

    // structural precondition for the requested kind
    if (kind == RotationKind::Zig) {
        // any position works; zig ignores w beyond the child hand-off
    } else {
        if (w == kNoNode) throw std::logic_error("kind mismatch: no grandparent");
        bool same_side = (u > v) == (v > w);
        if (kind == RotationKind::ZigZig && !same_side)
            throw std::logic_error("kind mismatch: expected same-side chain");
        if (kind == RotationKind::ZigZag && same_side)
            throw std::logic_error("kind mismatch: expected opposite-side chain");
    }

    RotationEffect eff;
    eff.kind = kind;
    eff.moved_up = u;

    std::vector<LinkSnapshot> before;
    NodeId u_left = t.node(u).left;
    NodeId u_right = t.node(u).right;
    snap(t, u, before);
    snap(t, v, before);
    snap(t, u_left, before);
    snap(t, u_right, before);

    if (kind == RotationKind::Zig) {
        snap(t, w, before);
        TreeNode& vn = t.node(v);
        TreeNode& unn = t.node(u);
        if (u > v) {
            NodeId inner = unn.left;
            vn.right = inner;
            set_parent(t, inner, v);
            unn.left = v;
            eff.abandoned_children.push_back(inner);
            if (unn.right != kNoNode) eff.carried_children.push_back(unn.right);
        } else {
            NodeId inner = unn.right;
            vn.left = inner;
            set_parent(t, inner, v);
            unn.right = v;
            eff.abandoned_children.push_back(inner);
            if (unn.left != kNoNode) eff.carried_children.push_back(unn.left);
        }
        attach_top(t, v, w, u);
        vn.parent = u;
        t.refresh_interval(v);
        t.refresh_interval(u);
        eff.participants = {u, v};
        eff.locked = with_top(eff.participants, w);
    } else {
        NodeId v_other = (u > v) ? t.node(v).left : t.node(v).right;
        snap(t, w, before);
        snap(t, v_other, before);
        NodeId top = t.node(w).parent;
        snap(t, top, before);
        TreeNode& wn = t.node(w);
        TreeNode& vn = t.node(v);
        TreeNode& unn = t.node(u);
        if (kind == RotationKind::ZigZig) {
            if (u > w) {
                // right-right: v = w.r, u = v.r
                wn.right = vn.left;
                set_parent(t, vn.left, w);
                vn.left = w;
                vn.right = unn.left;
                set_parent(t, unn.left, v);
                eff.abandoned_children.push_back(unn.left);
                if (unn.right != kNoNode) eff.carried_children.push_back(unn.right);
                unn.left = v;
            } else {
                // left-left: v = w.l, u = v.l
                wn.left = vn.right;
                set_parent(t, vn.right, w);
                vn.right = w;
                vn.left = unn.right;
                set_parent(t, unn.right, v);
                eff.abandoned_children.push_back(unn.right);
                if (unn.left != kNoNode) eff.carried_children.push_back(unn.left);
                unn.right = v;
            }
            attach_top(t, w, top, u);
            vn.parent = u;
            wn.parent = v;
        } else {
            if (u > w) {
                // v = w.r, u = v.l
                wn.right = unn.left;
                set_parent(t, unn.left, w);
                vn.left = unn.right;
                set_parent(t, unn.right, v);
                eff.abandoned_children.push_back(unn.left);
                eff.abandoned_children.push_back(unn.right);
                unn.right = v;
                unn.left = w;
            } else {
                // v = w.l, u = v.r
                wn.left = unn.right;
                set_parent(t, unn.right, w);
                vn.right = unn.left;
                set_parent(t, unn.left, v);
                eff.abandoned_children.push_back(unn.right);
                eff.abandoned_children.push_back(unn.left);
                unn.right = w;
                unn.left = v;
            }
            attach_top(t, w, top, u);
            vn.parent = u;
            wn.parent = u;
        }
        t.refresh_interval(w);
        t.refresh_interval(v);
        t.refresh_interval(u);
        eff.participants = {u, v, w};
        eff.locked = with_top(eff.participants, top);
    }

    // drop empty slots recorded as abandoned
    eff.abandoned_children.erase(
        std::remove(eff.abandoned_children.begin(), eff.abandoned_children.end(), kNoNode),
        eff.abandoned_children.end());

    for (const LinkSnapshot& s : before) {
        const TreeNode& now = t.node(s.node);
        if (now.parent != s.parent)
            eff.displaced.push_back({s.node, LinkSlot::Parent, s.parent, now.parent});
        if (now.left != s.left)
            eff.displaced.push_back({s.node, LinkSlot::Left, s.left, now.left});
        if (now.right != s.right)
            eff.displaced.push_back({s.node, LinkSlot::Right, s.right, now.right});
    }
    return eff;
}

}  // namespace splaynet
