#include "splaynet/topology.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace splaynet {

Tree Tree::build_balanced(const std::vector<NodeId>& sorted_ids) {
    if (sorted_ids.empty()) {
        throw std::invalid_argument("empty tree");
    }
    for (std::size_t i = 1; i < sorted_ids.size(); ++i) {
        if (sorted_ids[i] <= sorted_ids[i - 1]) {
            throw std::invalid_argument("ids must be sorted and distinct");
        }
    }
    Tree t;
    t.max_id_ = sorted_ids.back();
    t.index_.assign(static_cast<std::size_t>(t.max_id_) + 1, -1);
    t.nodes_.reserve(sorted_ids.size());
    for (NodeId id : sorted_ids) {
        t.index_[id] = static_cast<std::int64_t>(t.nodes_.size());
        TreeNode n;
        n.id = id;
        t.nodes_.push_back(n);
    }
    t.root_ = t.build_range(sorted_ids, 0, sorted_ids.size());
    return t;
}

NodeId Tree::build_range(const std::vector<NodeId>& ids, std::size_t b, std::size_t e) {
    if (b >= e) return kNoNode;
    std::size_t mid = b + (e - b) / 2;
    NodeId id = ids[mid];
    TreeNode& n = node(id);
    n.left = build_range(ids, b, mid);
    n.right = build_range(ids, mid + 1, e);
    if (n.left != kNoNode) node(n.left).parent = id;
    if (n.right != kNoNode) node(n.right).parent = id;
    n.lo = (n.left != kNoNode) ? node(n.left).lo : id;
    n.hi = (n.right != kNoNode) ? node(n.right).hi : id;
    return id;
}

bool Tree::contains(NodeId id) const {
    return id != kNoNode && id <= max_id_ && index_[id] >= 0;
}

const TreeNode& Tree::node(NodeId id) const {
    if (!contains(id)) throw std::out_of_range("unknown node id " + std::to_string(id));
    return nodes_[static_cast<std::size_t>(index_[id])];
}

TreeNode& Tree::node(NodeId id) {
    if (!contains(id)) throw std::out_of_range("unknown node id " + std::to_string(id));
    return nodes_[static_cast<std::size_t>(index_[id])];
}

std::vector<NodeId> Tree::ids() const {
    std::vector<NodeId> out;
    out.reserve(nodes_.size());
    for (const TreeNode& n : nodes_) out.push_back(n.id);
    std::sort(out.begin(), out.end());
    return out;
}

int Tree::depth(NodeId a) const {
    int d = 0;
    NodeId cur = node(a).id;
    while (node(cur).parent != kNoNode) {
        cur = node(cur).parent;
        ++d;
    }
    return d;
}

NodeId Tree::lca(NodeId a, NodeId b) const {
    // Walk down from the root using intervals; the LCA is the first node
    // whose subtree contains both ids.
    node(a);
    node(b);
    NodeId cur = root_;
    while (true) {
        const TreeNode& n = node(cur);
        if (a == cur || b == cur) return cur;
        NodeId next;
        if (a < cur && b < cur) {
            next = n.left;
        } else if (a > cur && b > cur) {
            next = n.right;
        } else {
            return cur;
        }
        if (next == kNoNode) return cur;  // degenerate, ids guaranteed present
        cur = next;
    }
}

int Tree::hops_to_ancestor(NodeId a, NodeId anc) const {
    int d = 0;
    NodeId cur = a;
    while (cur != kNoNode) {
        if (cur == anc) return d;
        cur = node(cur).parent;
        ++d;
    }
    return -1;
}

int Tree::distance(NodeId a, NodeId b) const {
    NodeId m = lca(a, b);
    return hops_to_ancestor(a, m) + hops_to_ancestor(b, m);
}

bool Tree::is_in_subtree(NodeId u, NodeId target) const {
    const TreeNode& n = node(u);
    node(target);
    return n.lo <= target && target <= n.hi;
}

std::vector<NodeId> Tree::in_order() const {
    std::vector<NodeId> out;
    out.reserve(nodes_.size());
    // iterative traversal, explicit stack
    std::vector<NodeId> stack;
    NodeId cur = root_;
    while (cur != kNoNode || !stack.empty()) {
        while (cur != kNoNode) {
            stack.push_back(cur);
            cur = node(cur).left;
        }
        cur = stack.back();
        stack.pop_back();
        out.push_back(cur);
        cur = node(cur).right;
    }
    return out;
}

void Tree::refresh_interval(NodeId u) {
    TreeNode& n = node(u);
    n.lo = (n.left != kNoNode) ? node(n.left).lo : u;
    n.hi = (n.right != kNoNode) ? node(n.right).hi : u;
}

std::optional<InvariantViolation> Tree::check_invariants() const {
    if (nodes_.empty()) return InvariantViolation{"empty tree", kNoNode, ""};
    if (!contains(root_)) return InvariantViolation{"missing root", root_, ""};
    if (node(root_).parent != kNoNode)
        return InvariantViolation{"root has parent", root_, ""};

    std::size_t visited = 0;
    // DFS from root checking links, order and intervals as we go.
    struct Frame { NodeId id; NodeId lo_bound; NodeId hi_bound; bool has_lo; bool has_hi; };
    std::vector<Frame> stack{{root_, 0, 0, false, false}};
    std::unordered_set<NodeId> seen;
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        if (!contains(f.id))
            return InvariantViolation{"dangling link", f.id, "child link to unknown id"};
        if (!seen.insert(f.id).second)
            return InvariantViolation{"cycle", f.id, "node reached twice"};
        ++visited;
        const TreeNode& n = node(f.id);
        if (f.has_lo && n.id <= f.lo_bound)
            return InvariantViolation{"BST order", n.id, "id below left bound"};
        if (f.has_hi && n.id >= f.hi_bound)
            return InvariantViolation{"BST order", n.id, "id above right bound"};
        NodeId want_lo = n.id, want_hi = n.id;
        if (n.left != kNoNode) {
            if (!contains(n.left))
                return InvariantViolation{"dangling link", n.id, "left child unknown"};
            if (node(n.left).parent != n.id)
                return InvariantViolation{"link symmetry", n.id, "left child parent mismatch"};
            if (node(n.left).id >= n.id)
                return InvariantViolation{"BST order", n.id, "left child id >= own id"};
            want_lo = node(n.left).lo;
            stack.push_back({n.left, f.lo_bound, n.id, f.has_lo, true});
        }
        if (n.right != kNoNode) {
            if (!contains(n.right))
                return InvariantViolation{"dangling link", n.id, "right child unknown"};
            if (node(n.right).parent != n.id)
                return InvariantViolation{"link symmetry", n.id, "right child parent mismatch"};
            if (node(n.right).id <= n.id)
                return InvariantViolation{"BST order", n.id, "right child id <= own id"};
            want_hi = node(n.right).hi;
            stack.push_back({n.right, n.id, f.hi_bound, true, f.has_hi});
        }
        if (n.lo != want_lo || n.hi != want_hi)
            return InvariantViolation{"interval", n.id, "stored interval disagrees with children"};
    }
    if (visited != nodes_.size())
        return InvariantViolation{"disconnected", kNoNode, "nodes unreachable from root"};
    return std::nullopt;
}

}  // namespace splaynet
