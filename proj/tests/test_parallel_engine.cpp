#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "splaynet/simulator.hpp"

using namespace splaynet;

// The OpenMP node phase must be observationally identical to the serial
// reference: same event log, same final tree, same metrics.

namespace {

SimConfig base(std::size_t n, std::size_t m, std::uint64_t seed) {
    SimConfig cfg;
    cfg.n = n;
    cfg.seed = seed;
    cfg.workload = WorkloadSpec::parse("uniform", m);
    cfg.log_events = true;
    return cfg;
}

}  // namespace

TEST_CASE("parallel node phase replays the serial engine exactly") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        SimConfig serial = base(128, 48, seed);
        serial.parallel = false;
        SimConfig parallel = serial;
        parallel.parallel = true;

        RunResult a = run_simulation(serial);
        RunResult b = run_simulation(parallel);
        REQUIRE(a.termination == Termination::Completed);
        CHECK(a.log.to_lines() == b.log.to_lines());
        CHECK(a.timeslots == b.timeslots);
        CHECK(a.ledger.total_rotations() == b.ledger.total_rotations());
        CHECK(a.ledger.total_cyber_dollars() == b.ledger.total_cyber_dollars());
        for (const TreeNode& n : a.final_tree.nodes()) {
            const TreeNode& o = b.final_tree.node(n.id);
            CHECK(n.parent == o.parent);
            CHECK(n.left == o.left);
            CHECK(n.right == o.right);
        }
    }
}

TEST_CASE("parallel engine with zipf traffic and super-rounds") {
    SimConfig serial = base(256, 64, 9);
    serial.workload = WorkloadSpec::parse("zipf:1.4", 64);
    serial.super_rounds = 2;
    SimConfig parallel = serial;
    parallel.parallel = true;
    RunResult a = run_simulation(serial);
    RunResult b = run_simulation(parallel);
    CHECK(a.log.to_lines() == b.log.to_lines());
    CHECK(a.termination == b.termination);
}
