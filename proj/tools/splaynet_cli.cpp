// Experiment driver for the concurrent self-adjusting tree network
// simulator: single runs, parameter sweeps and the m=1 reference
// verification suite.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "splaynet/oracle.hpp"
#include "splaynet/report.hpp"
#include "splaynet/simulator.hpp"

using namespace splaynet;

namespace {

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    // "7" or "1..20" or "1,4,9"
    std::vector<std::uint64_t> out;
    auto dots = text.find("..");
    if (dots != std::string::npos) {
        std::uint64_t lo = std::stoull(text.substr(0, dots));
        std::uint64_t hi = std::stoull(text.substr(dots + 2));
        for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
        return out;
    }
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        out.push_back(std::stoull(text.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return out;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        out.push_back(std::stoull(text.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return out;
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << contents;
}

bool trees_equal(const Tree& a, const Tree& b) {
    if (a.size() != b.size() || a.root() != b.root()) return false;
    for (const TreeNode& n : a.nodes()) {
        const TreeNode& o = b.node(n.id);
        if (n.parent != o.parent || n.left != o.left || n.right != o.right) return false;
    }
    return true;
}

std::vector<NodeId> iota_ids(std::size_t n) {
    std::vector<NodeId> ids(n);
    std::iota(ids.begin(), ids.end(), NodeId{1});
    return ids;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"splaynet: concurrent self-adjusting tree network simulator"};
    app.require_subcommand(1);

    // ---- run ----
    auto* run_cmd = app.add_subcommand("run", "execute one simulation");
    std::size_t nodes = 64;
    std::size_t requests = 16;
    double requests_frac = 0.0;
    std::string workload = "uniform";
    std::uint64_t seed = 1;
    std::uint64_t max_timeslots = 0;
    bool lockstep = false;
    std::size_t super_rounds = 1;
    std::string detectors = "on";
    std::string out_path;
    std::string format = "json";
    std::string log_mode = "none";
    bool parallel = false;
    run_cmd->add_option("--nodes", nodes, "network size n")->capture_default_str();
    run_cmd->add_option("--requests", requests, "concurrent splay requests m")
        ->capture_default_str();
    run_cmd->add_option("--requests-frac", requests_frac, "m as a fraction of n (overrides --requests)");
    run_cmd->add_option("--workload", workload,
                        "uniform | zipf:<a> | product:<file> | trace:<file>")
        ->capture_default_str();
    run_cmd->add_option("--seed", seed, "RNG seed")->capture_default_str();
    run_cmd->add_option("--max-timeslots", max_timeslots, "0 = derived default")
        ->capture_default_str();
    run_cmd->add_flag("--lockstep-rounds", lockstep, "barrier after each global round");
    run_cmd->add_option("--super-rounds", super_rounds, "number of request batches")
        ->capture_default_str();
    run_cmd->add_option("--detectors", detectors, "on | off")->capture_default_str();
    run_cmd->add_option("--out", out_path, "output file (stdout when empty)");
    run_cmd->add_option("--format", format, "json | csv")->capture_default_str();
    run_cmd->add_option("--log", log_mode, "none | events (written to <out>.events)")
        ->capture_default_str();
    run_cmd->add_flag("--parallel", parallel, "OpenMP node phase");

    // ---- sweep ----
    auto* sweep_cmd = app.add_subcommand("sweep", "run a grid of configurations");
    std::string sweep_nodes = "64,128,256";
    std::string sweep_seeds = "1..5";
    std::string sweep_workload = "uniform";
    std::size_t sweep_requests = 0;
    double sweep_frac = 0.25;
    std::string sweep_out = "sweep.csv";
    bool sweep_lockstep = false;
    std::size_t sweep_super = 1;
    bool sweep_parallel = false;
    sweep_cmd->add_option("--nodes", sweep_nodes, "comma list of n values")
        ->capture_default_str();
    sweep_cmd->add_option("--requests", sweep_requests, "fixed m (0: use --requests-frac)")
        ->capture_default_str();
    sweep_cmd->add_option("--requests-frac", sweep_frac, "m = frac * n")->capture_default_str();
    sweep_cmd->add_option("--workload", sweep_workload, "workload spec")->capture_default_str();
    sweep_cmd->add_option("--seeds", sweep_seeds, "e.g. 1..20 or 1,2,3")->capture_default_str();
    sweep_cmd->add_option("--out", sweep_out, "CSV path")->capture_default_str();
    sweep_cmd->add_flag("--lockstep-rounds", sweep_lockstep, "barrier after each global round");
    sweep_cmd->add_option("--super-rounds", sweep_super, "batches per run")
        ->capture_default_str();
    sweep_cmd->add_flag("--parallel", sweep_parallel, "OpenMP node phase");

    // ---- verify ----
    auto* verify_cmd = app.add_subcommand("verify", "m=1 reference equivalence suite");
    std::size_t verify_nodes = 63;
    bool exhaustive = false;
    std::size_t samples = 1000;
    std::uint64_t verify_seed = 1;
    verify_cmd->add_option("--nodes", verify_nodes, "tree size")->capture_default_str();
    verify_cmd->add_flag("--exhaustive-pairs", exhaustive, "all ordered (s,d) pairs");
    verify_cmd->add_option("--samples", samples, "sampled pairs when not exhaustive")
        ->capture_default_str();
    verify_cmd->add_option("--seed", verify_seed, "sampling seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run_cmd) {
            SimConfig cfg;
            cfg.n = nodes;
            std::size_t m = requests_frac > 0.0
                                ? static_cast<std::size_t>(requests_frac * static_cast<double>(nodes))
                                : requests;
            cfg.workload = WorkloadSpec::parse(workload, std::max<std::size_t>(m, 1));
            cfg.seed = seed;
            cfg.max_timeslots = max_timeslots;
            cfg.lockstep_rounds = lockstep;
            cfg.super_rounds = super_rounds;
            cfg.detectors = detectors != "off";
            cfg.parallel = parallel;
            cfg.log_events = log_mode == "events";
            RunResult res = run_simulation(cfg);
            Report rep = summarize(res);
            std::string doc = format == "csv" ? csv_header() + csv_row(rep) : to_json(rep);
            if (out_path.empty()) {
                std::cout << doc;
            } else {
                write_file(out_path, doc);
            }
            if (cfg.log_events && !out_path.empty()) {
                write_file(out_path + ".events", res.log.to_lines());
            }
            if (res.termination == Termination::DetectorFired) {
                std::cerr << "detector fired: " << res.detector->which << ": "
                          << res.detector->detail << " (slot " << res.detector->slot << ")\n";
                return 3;
            }
            if (res.termination == Termination::Timeout) {
                std::cerr << "liveness failure: timeout after " << res.timeslots << " slots\n";
                return 3;
            }
            return 0;
        }

        if (*sweep_cmd) {
            std::vector<std::size_t> ns = parse_sizes(sweep_nodes);
            std::vector<std::uint64_t> seeds = parse_seeds(sweep_seeds);
            std::string csv = csv_header();
            bool failed = false;
            for (std::size_t n : ns) {
                std::vector<Report> cell;
                for (std::uint64_t s : seeds) {
                    SimConfig cfg;
                    cfg.n = n;
                    std::size_t m = sweep_requests > 0
                                        ? sweep_requests
                                        : static_cast<std::size_t>(
                                              sweep_frac * static_cast<double>(n));
                    cfg.workload = WorkloadSpec::parse(sweep_workload,
                                                       std::max<std::size_t>(m, 1));
                    cfg.seed = s;
                    cfg.lockstep_rounds = sweep_lockstep;
                    cfg.super_rounds = sweep_super;
                    cfg.parallel = sweep_parallel;
                    cfg.log_events = false;
                    RunResult res = run_simulation(cfg);
                    if (res.termination != Termination::Completed) failed = true;
                    Report rep = summarize(res);
                    csv += csv_row(rep);
                    cell.push_back(rep);
                }
                csv += csv_aggregate_row(cell);
            }
            write_file(sweep_out, csv);
            std::cout << "wrote " << sweep_out << "\n";
            return failed ? 3 : 0;
        }

        if (*verify_cmd) {
            std::vector<std::pair<NodeId, NodeId>> pairs;
            if (exhaustive) {
                for (NodeId s = 1; s <= verify_nodes; ++s)
                    for (NodeId d = 1; d <= verify_nodes; ++d)
                        if (s != d) pairs.push_back({s, d});
            } else {
                std::mt19937_64 rng(verify_seed);
                while (pairs.size() < samples) {
                    NodeId s = static_cast<NodeId>(1 + rng() % verify_nodes);
                    NodeId d = static_cast<NodeId>(1 + rng() % verify_nodes);
                    if (s != d) pairs.push_back({s, d});
                }
            }
            std::size_t pass = 0, fail = 0;
            for (auto [s, d] : pairs) {
                SimConfig cfg;
                cfg.n = verify_nodes;
                cfg.workload.m = 1;
                cfg.lockstep_rounds = true;
                cfg.log_events = false;
                RequestSet rs;
                rs.requests.push_back({s, d, 0});
                RunResult sim = run_simulation(cfg, rs);
                Tree ref = Tree::build_balanced(iota_ids(verify_nodes));
                OracleTrace tr = parallel_reference_splay(ref, s, d);
                bool ok = sim.termination == Termination::Completed &&
                          trees_equal(sim.final_tree, ref) &&
                          sim.ledger.splays[0].cyber_dollars == tr.cyber_dollars;
                if (ok) {
                    ++pass;
                } else {
                    ++fail;
                    std::cout << "MISMATCH s=" << s << " d=" << d << "\n";
                }
            }
            std::cout << "verify: " << pass << " passed, " << fail << " failed of "
                      << pairs.size() << " pairs\n";
            return fail == 0 ? 0 : 3;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
