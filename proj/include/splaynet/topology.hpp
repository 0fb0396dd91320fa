#ifndef SPLAYNET_TOPOLOGY_HPP
#define SPLAYNET_TOPOLOGY_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace splaynet {

using NodeId = std::uint32_t;

inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);

/// One network node. Children obey BST order on ids; [lo, hi] is the id
/// range of the subtree rooted here, kept up to date by rotations so that
/// every node can route packets locally.
struct TreeNode {
    NodeId id = kNoNode;
    NodeId parent = kNoNode;
    NodeId left = kNoNode;
    NodeId right = kNoNode;
    NodeId lo = kNoNode;  // smallest id in this subtree
    NodeId hi = kNoNode;  // largest id in this subtree
};

struct InvariantViolation {
    std::string what;    // "BST order", "interval", "link symmetry", ...
    NodeId node = kNoNode;
    std::string detail;
};

/// The global tree model. Mutated only by the rotation module and the
/// simulation engine; node handlers see read-only snapshots.
class Tree {
public:
    Tree() = default;

    // Height-balanced BST over sorted distinct ids (median split).
    static Tree build_balanced(const std::vector<NodeId>& sorted_ids);

    std::size_t size() const { return nodes_.size(); }
    NodeId root() const { return root_; }
    void set_root(NodeId r) { root_ = r; }

    bool contains(NodeId id) const;
    const TreeNode& node(NodeId id) const;
    TreeNode& node(NodeId id);

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    std::vector<NodeId> ids() const;

    NodeId lca(NodeId a, NodeId b) const;
    int distance(NodeId a, NodeId b) const;
    int depth(NodeId a) const;
    // hops from `a` up to ancestor `anc`, or -1 if anc is not an ancestor
    int hops_to_ancestor(NodeId a, NodeId anc) const;

    // true iff target lies in the subtree rooted at u (interval test)
    bool is_in_subtree(NodeId u, NodeId target) const;

    // Full recomputation of every invariant; the oracle against the
    // incremental interval updates done by rotations.
    std::optional<InvariantViolation> check_invariants() const;

    std::vector<NodeId> in_order() const;

    // Recompute lo/hi of `u` from its children (children assumed correct).
    void refresh_interval(NodeId u);

private:
    NodeId build_range(const std::vector<NodeId>& ids, std::size_t b, std::size_t e);

    std::vector<TreeNode> nodes_;
    std::vector<std::int64_t> index_;  // id -> position in nodes_, -1 if absent
    NodeId root_ = kNoNode;
    NodeId max_id_ = 0;
};

}  // namespace splaynet

#endif
