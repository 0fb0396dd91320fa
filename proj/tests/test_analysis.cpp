#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "splaynet/analysis.hpp"
#include "splaynet/rotation.hpp"
#include "splaynet/topology.hpp"

using namespace splaynet;

namespace {

std::vector<NodeId> iota_ids(std::size_t n) {
    std::vector<NodeId> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<NodeId>(i + 1);
    return ids;
}

}  // namespace

TEST_CASE("rank snapshot: single node") {
    Tree t = Tree::build_balanced({1});
    RankSnapshot s = snapshot_ranks(t);
    CHECK(s.sizes.at(1) == 1);
    CHECK(s.ranks.at(1) == doctest::Approx(0.0));
    CHECK(s.total == doctest::Approx(0.0));
}

TEST_CASE("rank snapshot: balanced 7 and path of 4") {
    Tree t = Tree::build_balanced(iota_ids(7));
    RankSnapshot s = snapshot_ranks(t);
    CHECK(s.sizes.at(4) == 7);
    CHECK(s.sizes.at(2) == 3);
    CHECK(s.sizes.at(1) == 1);
    CHECK(s.total == doctest::Approx(std::log2(7.0) + 2.0 * std::log2(3.0)));

    // path 1-2-3-4: two zigs turn the balanced tree into a right spine
    Tree p = Tree::build_balanced(iota_ids(4));  // 3(2(1,.),4)
    apply(p, 2, RotationKind::Zig);
    apply(p, 1, RotationKind::Zig);
    REQUIRE(p.root() == 1);
    REQUIRE(p.node(2).right == 3);
    REQUIRE(p.node(3).right == 4);
    REQUIRE(!p.check_invariants());
    RankSnapshot ps = snapshot_ranks(p);
    CHECK(ps.sizes.at(1) == 4);
    CHECK(ps.total == doctest::Approx(2.0 + std::log2(3.0) + 1.0));
}

TEST_CASE("zig delta on the two-node tree") {
    Tree t = Tree::build_balanced({1, 2});
    RankSnapshot before = snapshot_ranks(t);
    RotationEffect eff = apply(t, 1, RotationKind::Zig);
    RankSnapshot after = snapshot_ranks(t);
    RotationDelta d = rotation_delta(before, after, 1, RotationKind::Zig, eff.participants);
    CHECK(d.delta == doctest::Approx(0.0));
    CHECK(d.bound == doctest::Approx(3.0));
    CHECK(d.within_bound);
}

TEST_CASE("snapshot diff catches foreign rank changes") {
    Tree t = Tree::build_balanced(iota_ids(7));
    RankSnapshot before = snapshot_ranks(t);
    RotationEffect eff = apply(t, 1, RotationKind::ZigZig);
    RankSnapshot after = snapshot_ranks(t);
    // claiming a smaller participant set must throw: 4's rank changed
    std::vector<NodeId> wrong{1, 2};
    CHECK_THROWS(rotation_delta(before, after, 1, RotationKind::ZigZig, wrong));
    CHECK_NOTHROW(rotation_delta(before, after, 1, RotationKind::ZigZig, eff.participants));
}

TEST_CASE("property: variation-per-round bound holds for random rotations") {
    std::mt19937 rng(555);
    const int kTrees = 40;
    const int kRots = 300;
    std::size_t violations = 0;
    for (int trial = 0; trial < kTrees; ++trial) {
        std::size_t n = 2 + rng() % 255;
        Tree t = Tree::build_balanced(iota_ids(n));
        for (int i = 0; i < kRots; ++i) {
            NodeId u = static_cast<NodeId>(1 + rng() % n);
            if (t.node(u).parent == kNoNode) continue;
            RankSnapshot before = snapshot_ranks(t);
            RotationKind k = classify(t, u, t.root());
            RotationEffect eff = apply(t, u, k);
            RankSnapshot after = snapshot_ranks(t);
            RotationDelta d = rotation_delta(before, after, u, k, eff.participants);
            if (!d.within_bound) ++violations;
            // incremental and full-snapshot routes agree
            double pb = 0, pa = 0;
            for (NodeId p : eff.participants) {
                pb += before.ranks.at(p);
                pa += after.ranks.at(p);
            }
            RotationDelta inc = rotation_delta_incremental(before.ranks.at(u),
                                                           after.ranks.at(u), pb, pa, k);
            CHECK(inc.delta == doctest::Approx(d.delta));
            // total change equals participant-only change
            CHECK(after.total - before.total == doctest::Approx(d.delta).epsilon(1e-9));
        }
    }
    CHECK(violations == 0);
}

TEST_CASE("splay cost bound") {
    SplayRecord rec;
    rec.max_distance = 2;
    rec.rotations = 0;  // already adjacent
    CHECK(splay_cost(rec).rotations == 0);
    CHECK(splay_cost(rec).within_bound);
    rec.rotations = 3;
    CHECK(splay_cost(rec).within_bound);  // 3 <= 2/2 + 2
    rec.rotations = 4;
    CHECK(!splay_cost(rec).within_bound);
}
