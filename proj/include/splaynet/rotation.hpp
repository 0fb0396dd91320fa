#ifndef SPLAYNET_ROTATION_HPP
#define SPLAYNET_ROTATION_HPP

#include <string>
#include <vector>

#include "splaynet/topology.hpp"

namespace splaynet {

enum class RotationKind { Zig, ZigZig, ZigZag };

const char* to_string(RotationKind k);

inline int cyber_dollars(RotationKind k) { return k == RotationKind::Zig ? 1 : 2; }

enum class LinkSlot { Parent, Left, Right };

struct LinkChangeRecord {
    NodeId node;
    LinkSlot slot;
    NodeId before;  // kNoNode when the slot was empty
    NodeId after;
};

/// Everything one atomic rotation did: which links moved, which of u's
/// children were kept (carried) or re-hung (abandoned), and which nodes
/// held locks for it.
struct RotationEffect {
    RotationKind kind = RotationKind::Zig;
    NodeId moved_up = kNoNode;                 // u
    std::vector<LinkChangeRecord> displaced;   // exactly the changed links
    std::vector<NodeId> participants;          // u, v (and w for doubles)
    std::vector<NodeId> carried_children;      // children of u kept by u
    std::vector<NodeId> abandoned_children;    // children of u re-hung
    std::vector<NodeId> locked;                // participants + top bystander
};

/// Rotation type for moving u one step toward stop_at (an ancestor of u,
/// normally the current LCA of u and its splay peer). Zig when u's parent
/// is the stop node; otherwise a double rotation using the grandparent.
RotationKind classify(const Tree& t, NodeId u, NodeId stop_at);

/// Nodes that must hold a lock for a rotation of u: {w,v,u} for a zig,
/// {z,w,v,u} for doubles; absent ancestor levels are simply excluded.
std::vector<NodeId> locked_set(const Tree& t, NodeId u, RotationKind kind);

/// Bystanders whose links changed but who did not take part: the displaced
/// nodes minus the participants (z plus re-hung subtree roots).
std::vector<NodeId> notify_targets(const RotationEffect& effect);

/// Apply the rotation atomically, updating intervals of the participants
/// in place. Throws on a kind/structure mismatch.
RotationEffect apply(Tree& t, NodeId u, RotationKind kind);

}  // namespace splaynet

#endif
