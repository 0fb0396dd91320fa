#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <map>
#include <random>
#include <vector>

#include "splaynet/rotation.hpp"
#include "splaynet/topology.hpp"

using namespace splaynet;

namespace {

std::vector<NodeId> iota_ids(std::size_t n) {
    std::vector<NodeId> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<NodeId>(i + 1);
    return ids;
}

std::map<NodeId, std::array<NodeId, 3>> link_table(const Tree& t) {
    std::map<NodeId, std::array<NodeId, 3>> out;
    for (const TreeNode& n : t.nodes()) out[n.id] = {n.parent, n.left, n.right};
    return out;
}

}  // namespace

TEST_CASE("classify per relative positions") {
    Tree t = Tree::build_balanced(iota_ids(7));
    // u left child of root region
    CHECK(classify(t, 2, 4) == RotationKind::Zig);
    CHECK(classify(t, 1, 4) == RotationKind::ZigZig);   // 1 left of 2 left of 4
    CHECK(classify(t, 3, 4) == RotationKind::ZigZag);   // 3 right of 2, 2 left of 4
    CHECK_THROWS(classify(t, 4, 4));                    // root cannot rotate
}

TEST_CASE("zig on a two-node tree") {
    Tree t = Tree::build_balanced({1, 2});
    REQUIRE(t.root() == 2);  // median split of {1,2}: root 2, left child 1
    // rotate 1 up over 2
    RotationEffect eff = apply(t, 1, RotationKind::Zig);
    CHECK(t.root() == 1);
    CHECK(t.node(1).right == 2);
    CHECK(t.node(2).parent == 1);
    CHECK(!t.check_invariants());
    CHECK(notify_targets(eff).empty());
}

TEST_CASE("zig-zig on the balanced 7-node tree matches hand execution") {
    Tree t = Tree::build_balanced(iota_ids(7));
    REQUIRE(classify(t, 1, t.root()) == RotationKind::ZigZig);
    RotationEffect eff = apply(t, 1, RotationKind::ZigZig);
    // 1 takes 4's old position (the root), 1.right=2, 2.right=4, 4.left=3
    CHECK(t.root() == 1);
    CHECK(t.node(1).right == 2);
    CHECK(t.node(2).right == 4);
    CHECK(t.node(4).left == 3);
    CHECK(t.node(3).parent == 4);
    CHECK(!t.check_invariants());
    CHECK(eff.kind == RotationKind::ZigZig);
    CHECK(eff.moved_up == 1);
    // intervals after the rotation
    CHECK(t.node(1).lo == 1);
    CHECK(t.node(1).hi == 7);
    CHECK(t.node(2).lo == 2);
    CHECK(t.node(2).hi == 7);
    CHECK(t.node(4).lo == 3);
    CHECK(t.node(4).hi == 7);
}

TEST_CASE("zig-zag on the balanced 7-node tree matches hand execution") {
    Tree t = Tree::build_balanced(iota_ids(7));
    REQUIRE(classify(t, 3, t.root()) == RotationKind::ZigZag);
    apply(t, 3, RotationKind::ZigZag);
    // 3 at 4's old position, 3.left=2, 3.right=4, 2.right empty, 4.left empty
    CHECK(t.root() == 3);
    CHECK(t.node(3).left == 2);
    CHECK(t.node(3).right == 4);
    CHECK(t.node(2).right == kNoNode);
    CHECK(t.node(4).left == kNoNode);
    CHECK(!t.check_invariants());
}

TEST_CASE("locked sets per rotation type") {
    Tree t = Tree::build_balanced(iota_ids(15));
    // zig of 2 toward root: v=4, w=8 exists
    CHECK(locked_set(t, 2, RotationKind::Zig) == std::vector<NodeId>{8, 4, 2});
    // zig with v = root
    CHECK(locked_set(t, 4, RotationKind::Zig) == std::vector<NodeId>{8, 4});
    Tree t3 = Tree::build_balanced(iota_ids(3));
    CHECK(locked_set(t3, 1, RotationKind::Zig) == std::vector<NodeId>{2, 1});
    // zig-zig 1 under 2 under 4, z=8
    CHECK(locked_set(t, 1, RotationKind::ZigZig) == std::vector<NodeId>{8, 4, 2, 1});
    CHECK(locked_set(t, 1, RotationKind::ZigZig).size() <= 4);
}

TEST_CASE("notify targets are the displaced bystanders") {
    Tree t = Tree::build_balanced(iota_ids(15));
    // zig-zig of 1: carried/abandoned subtree roots plus z get notified
    RotationEffect eff = apply(t, 1, RotationKind::ZigZig);
    std::vector<NodeId> notif = notify_targets(eff);
    // z=8 had a child-link change; 3 (old right of 2) re-hung to 4
    CHECK(std::find(notif.begin(), notif.end(), 8u) != notif.end());
    CHECK(std::find(notif.begin(), notif.end(), 3u) != notif.end());
    for (NodeId p : eff.participants)
        CHECK(std::find(notif.begin(), notif.end(), p) == notif.end());
}

TEST_CASE("carried and abandoned children of a zig") {
    // build 1..3 balanced: root 2, children 1 and 3; zig of 1 abandons nothing
    Tree t = Tree::build_balanced(iota_ids(7));
    // node 2 has children 1,3; zig of 2 over 4: 2 keeps 1 (carried), hands 3 to 4
    RotationEffect eff = apply(t, 2, RotationKind::Zig);
    CHECK(eff.carried_children == std::vector<NodeId>{1});
    CHECK(eff.abandoned_children == std::vector<NodeId>{3});
    CHECK(t.node(4).left == 3);
}

TEST_CASE("kind mismatch is rejected") {
    Tree t = Tree::build_balanced(iota_ids(7));
    CHECK_THROWS(apply(t, 1, RotationKind::ZigZag));  // 1 is a zig-zig position
    CHECK_THROWS(apply(t, 4, RotationKind::Zig));     // root cannot rotate
    Tree t2 = Tree::build_balanced({1, 2});
    CHECK_THROWS(apply(t2, 2, RotationKind::ZigZig));  // no grandparent
}

TEST_CASE("property: random rotations preserve every invariant") {
    std::mt19937 rng(20240901);
    const int kTrees = 60;
    const int kRotationsPerTree = 400;
    for (int trial = 0; trial < kTrees; ++trial) {
        std::size_t n = 2 + rng() % 255;
        Tree t = Tree::build_balanced(iota_ids(n));
        std::vector<NodeId> order_before = t.in_order();
        for (int i = 0; i < kRotationsPerTree; ++i) {
            NodeId u = static_cast<NodeId>(1 + rng() % n);
            if (t.node(u).parent == kNoNode) continue;
            int depth_before = t.depth(u);
            auto before = link_table(t);
            RotationKind k = classify(t, u, t.root());
            RotationEffect eff = apply(t, u, k);
            auto after = link_table(t);

            // moved exactly one or two levels up
            int want = (k == RotationKind::Zig) ? 1 : 2;
            CHECK(depth_before - t.depth(u) == want);

            // displaced covers exactly the changed links
            std::size_t changed = 0;
            for (const auto& [id, links] : before) {
                const auto& now = after.at(id);
                for (int s = 0; s < 3; ++s)
                    if (links[s] != now[s]) ++changed;
            }
            CHECK(changed == eff.displaced.size());
            for (const LinkChangeRecord& rec : eff.displaced) {
                int s = rec.slot == LinkSlot::Parent ? 0 : rec.slot == LinkSlot::Left ? 1 : 2;
                CHECK(before.at(rec.node)[s] == rec.before);
                CHECK(after.at(rec.node)[s] == rec.after);
            }

            // carried and abandoned are disjoint
            for (NodeId c : eff.carried_children)
                CHECK(std::find(eff.abandoned_children.begin(), eff.abandoned_children.end(),
                                c) == eff.abandoned_children.end());
            CHECK(eff.locked.size() <= 4);
        }
        auto v = t.check_invariants();
        if (v) FAIL("invariant violated: ", v->what, " at ", v->node);
        CHECK(t.in_order() == order_before);  // rotations preserve the key order
        CHECK(t.size() == n);
    }
}
