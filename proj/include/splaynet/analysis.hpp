#ifndef SPLAYNET_ANALYSIS_HPP
#define SPLAYNET_ANALYSIS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "splaynet/rotation.hpp"
#include "splaynet/topology.hpp"

namespace splaynet {

/// Subtree sizes and ranks r(u) = log2 s(u); the total rank is the
/// potential used by the amortized accounting.
struct RankSnapshot {
    std::map<NodeId, std::size_t> sizes;
    std::map<NodeId, double> ranks;
    double total = 0.0;
};

RankSnapshot snapshot_ranks(const Tree& t);

/// Rank-variation bound for one rotation: doubles must satisfy
/// delta <= 3(r'(u) - r(u)) - 2, zigs delta <= 3(r'(u) - r(u)).
/// A small epsilon absorbs floating-point rounding on the favorable side.
inline constexpr double kRankEpsilon = 1e-9;

struct RotationDelta {
    double delta = 0.0;      // total rank change caused by the rotation
    double bound = 0.0;      // lemma bound for this rotation kind
    bool within_bound = false;
};

/// Full-snapshot route: diff two snapshots that bracket exactly one
/// rotation of u. Throws if ranks changed outside the participant set.
RotationDelta rotation_delta(const RankSnapshot& before, const RankSnapshot& after, NodeId u,
                             RotationKind kind, const std::vector<NodeId>& participants);

/// Incremental route used by the engine: ranks of the participants only.
RotationDelta rotation_delta_incremental(double r_u_before, double r_u_after,
                                         double participants_rank_before,
                                         double participants_rank_after, RotationKind kind);

struct RotationRecord {
    std::uint64_t request_slot = 0;
    std::uint64_t commit_slot = 0;   // requester applied the rotation
    std::uint64_t finish_slot = 0;   // last participant freed
    NodeId requester = kNoNode;
    RotationKind kind = RotationKind::Zig;
    double delta = 0.0;
    double bound = 0.0;
    std::size_t splay_index = 0;
};

struct SplayRecord {
    NodeId src = kNoNode;
    NodeId dst = kNoNode;
    std::uint64_t arrival_slot = 0;
    std::uint64_t issue_slot = 0;
    std::optional<std::uint64_t> completed_slot;
    int rotations = 0;        // count over both endpoints
    int cyber_dollars = 0;    // zig = 1, doubles = 2
    int max_distance = 0;     // max d(s,d) while live
};

/// Per-run accounting collected by the engine.
struct CostLedger {
    std::vector<RotationRecord> rotations;
    std::vector<SplayRecord> splays;
    double initial_total_rank = 0.0;
    double final_total_rank = 0.0;
    std::size_t bound_violations = 0;
    std::size_t max_buffer_len = 0;

    double delta_sum() const;             // sum of per-rotation deltas
    double total_variation() const;       // final - initial total rank
    int total_cyber_dollars() const;
    int total_rotations() const;
};

/// Cost of one completed splay. The rotation-count bound is
/// p_j <= max_distance/2 + 2 (at most d/2 doubles plus two zigs); the
/// cyber-dollar total weights doubles twice for the potential ledger.
struct SplayCost {
    int rotations = 0;
    int cyber = 0;
    double bound = 0.0;        // on the rotation count
    bool within_bound = false;
};

SplayCost splay_cost(const SplayRecord& rec);

/// Plot-ready summary of a completed run.
struct Report {
    std::size_t n = 0;
    std::size_t m = 0;
    std::string workload;
    std::uint64_t seed = 0;
    bool completed = false;
    std::uint64_t timeslots = 0;
    int rotations = 0;
    int cyber_dollars = 0;
    double rotations_per_splay = 0.0;
    double cyber_per_splay = 0.0;
    double rounds_per_splay = 0.0;       // rotations completed per splay
    double timeslots_per_splay = 0.0;    // issue-to-completion spans
    double mean_queue_delay = 0.0;       // arrival-to-issue
    int max_splay_distance_cost = 0;     // D = max p_j
    double h_sources = 0.0;
    double h_destinations = 0.0;
    double ratio_rot_log2n = 0.0;        // rotations / (m log2 n)
    double ratio_rot_entropy = 0.0;      // rotations / (m (Hx+Hy) + 1)
    double ratio_slots_logs = 0.0;       // timeslots / (m log2 n log2(m+1))
    double round_len_p50 = 0.0;
    double round_len_p95 = 0.0;
    double round_len_max = 0.0;
    std::size_t max_buffer_len = 0;
    std::size_t splay_bound_violations = 0;
    std::size_t rank_bound_violations = 0;
};

struct RunResult;  // simulator.hpp
Report summarize(const RunResult& run);

}  // namespace splaynet

#endif
