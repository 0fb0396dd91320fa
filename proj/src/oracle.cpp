#include "splaynet/oracle.hpp"

#include <stdexcept>

namespace splaynet {

namespace {

bool adjacent(const Tree& t, NodeId a, NodeId b) {
    const TreeNode& an = t.node(a);
    return an.parent == b || an.left == b || an.right == b;
}

void record(OracleTrace& tr, NodeId u, RotationKind k) {
    tr.rotations.push_back({u, k});
    tr.cyber_dollars += cyber_dollars(k);
}

}  // namespace

RotationKind reference_step_kind(const Tree& t, NodeId u, NodeId peer) {
    const TreeNode& un = t.node(u);
    NodeId v = un.parent;
    if (v == kNoNode) throw std::logic_error("rotating the root");
    const TreeNode& vn = t.node(v);
    bool peer_in_v = vn.lo <= peer && peer <= vn.hi;
    bool v_is_lca = peer_in_v && (u < v ? peer >= v : peer <= v);
    if (v_is_lca || vn.parent == peer || vn.parent == kNoNode) return RotationKind::Zig;
    NodeId w = vn.parent;
    return ((u < v) == (v < w)) ? RotationKind::ZigZig : RotationKind::ZigZag;
}

OracleTrace sequential_splay(Tree& t, NodeId s, NodeId d) {
    if (s == d) throw std::invalid_argument("s equals d");
    OracleTrace tr;
    // phase 1: s splays until it owns the lowest common ancestor position
    while (true) {
        NodeId a = t.lca(s, d);
        if (a == s || adjacent(t, s, d)) break;
        RotationKind k = classify(t, s, a);
        apply(t, s, k);
        record(tr, s, k);
    }
    // phase 2: d splays upward until it hangs under s
    while (t.node(d).parent != s && !adjacent(t, s, d)) {
        NodeId p = t.node(d).parent;
        NodeId pp = p == kNoNode ? kNoNode : t.node(p).parent;
        RotationKind k;
        if (pp == s || pp == kNoNode) {
            k = RotationKind::Zig;
        } else {
            k = ((d < p) == (p < pp)) ? RotationKind::ZigZig : RotationKind::ZigZag;
        }
        apply(t, d, k);
        record(tr, d, k);
    }
    return tr;
}

OracleTrace parallel_reference_splay(Tree& t, NodeId s, NodeId d) {
    if (s == d) throw std::invalid_argument("s equals d");
    OracleTrace tr;
    int rounds_s = 0, rounds_d = 0;
    while (!adjacent(t, s, d)) {
        NodeId a = t.lca(s, d);
        struct Actor {
            NodeId id;
            int depth_to_lca;
            int rounds;
        };
        std::vector<Actor> actors;
        if (s != a) actors.push_back({s, t.hops_to_ancestor(s, a), rounds_s});
        if (d != a) actors.push_back({d, t.hops_to_ancestor(d, a), rounds_d});
        if (actors.size() == 2) {
            const Actor& x = actors[0];
            const Actor& y = actors[1];
            bool x_first;
            if (x.rounds != y.rounds) {
                x_first = x.rounds < y.rounds;
            } else if (x.depth_to_lca != y.depth_to_lca) {
                x_first = x.depth_to_lca < y.depth_to_lca;
            } else {
                x_first = x.id < y.id;
            }
            if (!x_first) std::swap(actors[0], actors[1]);
        }
        for (const Actor& actor : actors) {
            if (adjacent(t, s, d)) break;
            // re-check enabledness: the first rotation may have changed the LCA
            NodeId cur_lca = t.lca(s, d);
            if (actor.id == cur_lca) continue;  // now holds the LCA: waits
            RotationKind k = reference_step_kind(t, actor.id, actor.id == s ? d : s);
            apply(t, actor.id, k);
            record(tr, actor.id, k);
            (actor.id == s ? rounds_s : rounds_d) += 1;
        }
    }
    return tr;
}

}  // namespace splaynet
