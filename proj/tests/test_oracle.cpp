#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "splaynet/oracle.hpp"
#include "splaynet/topology.hpp"

using namespace splaynet;

namespace {

std::vector<NodeId> iota_ids(std::size_t n) {
    std::vector<NodeId> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<NodeId>(i + 1);
    return ids;
}

bool adjacent(const Tree& t, NodeId a, NodeId b) { return t.distance(a, b) == 1; }

}  // namespace

TEST_CASE("sequential splay: adjacent pair does nothing") {
    Tree t = Tree::build_balanced(iota_ids(7));
    OracleTrace tr = sequential_splay(t, 4, 2);
    CHECK(tr.rotations.empty());
    CHECK(tr.cyber_dollars == 0);
}

TEST_CASE("sequential splay (1,3) on balanced 7") {
    Tree t = Tree::build_balanced(iota_ids(7));
    OracleTrace tr = sequential_splay(t, 1, 3);
    CHECK(!t.check_invariants());
    CHECK(adjacent(t, 1, 3));
    // s=1 zigs over the old lca 2, then d=3 zigs under 1
    REQUIRE(tr.rotations.size() == 2);
    CHECK(tr.rotations[0].node == 1);
    CHECK(tr.rotations[0].kind == RotationKind::Zig);
    CHECK(tr.rotations[1].node == 3);
    CHECK(tr.rotations[1].kind == RotationKind::Zig);
    CHECK(tr.cyber_dollars == 2);
    CHECK(static_cast<int>(tr.rotations.size()) <= 2 / 2 + 2);  // distance was 2
}

TEST_CASE("sequential splay reaches the objective on random pairs") {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 300; ++trial) {
        std::size_t n = 2 + rng() % 63;
        Tree t = Tree::build_balanced(iota_ids(n));
        NodeId s = static_cast<NodeId>(1 + rng() % n);
        NodeId d = static_cast<NodeId>(1 + rng() % n);
        if (s == d) continue;
        sequential_splay(t, s, d);
        CHECK(adjacent(t, s, d));
        CHECK(!t.check_invariants());
    }
}

TEST_CASE("parallel reference splay: adjacent pair does nothing") {
    Tree t = Tree::build_balanced(iota_ids(7));
    OracleTrace tr = parallel_reference_splay(t, 2, 4);
    CHECK(tr.rotations.empty());
}

TEST_CASE("parallel reference splay reaches the objective on random pairs") {
    std::mt19937 rng(18);
    for (int trial = 0; trial < 300; ++trial) {
        std::size_t n = 2 + rng() % 63;
        Tree t = Tree::build_balanced(iota_ids(n));
        NodeId s = static_cast<NodeId>(1 + rng() % n);
        NodeId d = static_cast<NodeId>(1 + rng() % n);
        if (s == d) continue;
        OracleTrace tr = parallel_reference_splay(t, s, d);
        CHECK(adjacent(t, s, d));
        CHECK(!t.check_invariants());
        // every rotation was performed by an endpoint
        for (const OracleRotation& r : tr.rotations) CHECK((r.node == s || r.node == d));
    }
}

TEST_CASE("parallel splay on larger trees stays within the cost bound") {
    std::mt19937 rng(19);
    for (int trial = 0; trial < 100; ++trial) {
        Tree t = Tree::build_balanced(iota_ids(127));
        NodeId s = static_cast<NodeId>(1 + rng() % 127);
        NodeId d = static_cast<NodeId>(1 + rng() % 127);
        if (s == d) continue;
        int dist = t.distance(s, d);
        OracleTrace tr = parallel_reference_splay(t, s, d);
        CHECK(static_cast<int>(tr.rotations.size()) <= dist / 2 + 2);
    }
}
