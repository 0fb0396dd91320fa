// Benchmark: serial reference engine vs the OpenMP node phase on the same
// workload, verifying identical results while comparing wall time.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>

#include "splaynet/simulator.hpp"

using namespace splaynet;
using Clock = std::chrono::steady_clock;

namespace {

double run_timed(const SimConfig& cfg, RunResult& out) {
    auto t0 = Clock::now();
    out = run_simulation(cfg);
    auto t1 = Clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t n = 1024;
    std::size_t m = 512;
    std::uint64_t seed = 1;
    int reps = 3;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        auto next = [&]() { return std::stoull(argv[++i]); };
        if (a == "--nodes") n = next();
        else if (a == "--requests") m = next();
        else if (a == "--seed") seed = next();
        else if (a == "--reps") reps = static_cast<int>(next());
        else {
            std::cerr << "usage: splaynet_bench [--nodes N] [--requests M] [--seed S] [--reps R]\n";
            return 2;
        }
    }

    SimConfig cfg;
    cfg.n = n;
    cfg.seed = seed;
    cfg.workload = WorkloadSpec::parse("uniform", m);
    cfg.log_events = false;
    cfg.detectors = true;
    cfg.detector_stride = 8;

    std::printf("n=%zu m=%zu seed=%llu reps=%d\n", n, m,
                static_cast<unsigned long long>(seed), reps);
    double serial_best = 1e100, parallel_best = 1e100;
    RunResult serial_res, parallel_res;
    for (int r = 0; r < reps; ++r) {
        cfg.parallel = false;
        serial_best = std::min(serial_best, run_timed(cfg, serial_res));
        cfg.parallel = true;
        parallel_best = std::min(parallel_best, run_timed(cfg, parallel_res));
    }

    bool same = serial_res.timeslots == parallel_res.timeslots &&
                serial_res.ledger.total_rotations() == parallel_res.ledger.total_rotations();
    for (const TreeNode& node : serial_res.final_tree.nodes()) {
        const TreeNode& o = parallel_res.final_tree.node(node.id);
        same = same && node.parent == o.parent && node.left == o.left && node.right == o.right;
    }

    std::printf("serial   : %8.3f s  (%llu slots, %d rotations)\n", serial_best,
                static_cast<unsigned long long>(serial_res.timeslots),
                serial_res.ledger.total_rotations());
    std::printf("parallel : %8.3f s  (%llu slots, %d rotations)\n", parallel_best,
                static_cast<unsigned long long>(parallel_res.timeslots),
                parallel_res.ledger.total_rotations());
    std::printf("speedup  : %8.2fx   results identical: %s\n", serial_best / parallel_best,
                same ? "yes" : "NO");
    return same ? 0 : 1;
}
