#include "splaynet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "splaynet/simulator.hpp"

namespace splaynet {

RankSnapshot snapshot_ranks(const Tree& t) {
    RankSnapshot snap;
    // post-order size accumulation, iterative
    std::vector<std::pair<NodeId, bool>> stack{{t.root(), false}};
    while (!stack.empty()) {
        auto [id, expanded] = stack.back();
        stack.pop_back();
        if (id == kNoNode) continue;
        const TreeNode& n = t.node(id);
        if (!expanded) {
            stack.push_back({id, true});
            stack.push_back({n.left, false});
            stack.push_back({n.right, false});
        } else {
            std::size_t s = 1;
            if (n.left != kNoNode) s += snap.sizes.at(n.left);
            if (n.right != kNoNode) s += snap.sizes.at(n.right);
            snap.sizes[id] = s;
            double r = std::log2(static_cast<double>(s));
            snap.ranks[id] = r;
            snap.total += r;
        }
    }
    return snap;
}

RotationDelta rotation_delta_incremental(double r_u_before, double r_u_after,
                                         double participants_rank_before,
                                         double participants_rank_after, RotationKind kind) {
    RotationDelta out;
    out.delta = participants_rank_after - participants_rank_before;
    double gain = 3.0 * (r_u_after - r_u_before);
    out.bound = (kind == RotationKind::Zig) ? gain : gain - 2.0;
    out.within_bound = out.delta <= out.bound + kRankEpsilon;
    return out;
}

RotationDelta rotation_delta(const RankSnapshot& before, const RankSnapshot& after, NodeId u,
                             RotationKind kind, const std::vector<NodeId>& participants) {
    for (const auto& [id, r] : before.ranks) {
        auto it = after.ranks.find(id);
        if (it == after.ranks.end()) throw std::logic_error("node vanished between snapshots");
        if (std::abs(it->second - r) > 1e-12 &&
            std::find(participants.begin(), participants.end(), id) == participants.end()) {
            throw std::logic_error("rank changed outside the participant set at node " +
                                   std::to_string(id));
        }
    }
    double pb = 0.0, pa = 0.0;
    for (NodeId p : participants) {
        pb += before.ranks.at(p);
        pa += after.ranks.at(p);
    }
    return rotation_delta_incremental(before.ranks.at(u), after.ranks.at(u), pb, pa, kind);
}

double CostLedger::delta_sum() const {
    double s = 0.0;
    for (const RotationRecord& r : rotations) s += r.delta;
    return s;
}

double CostLedger::total_variation() const { return final_total_rank - initial_total_rank; }

int CostLedger::total_cyber_dollars() const {
    int s = 0;
    for (const RotationRecord& r : rotations) s += cyber_dollars(r.kind);
    return s;
}

int CostLedger::total_rotations() const { return static_cast<int>(rotations.size()); }

SplayCost splay_cost(const SplayRecord& rec) {
    SplayCost out;
    out.rotations = rec.rotations;
    out.cyber = rec.cyber_dollars;
    out.bound = rec.max_distance / 2.0 + 2.0;
    out.within_bound = out.rotations <= out.bound + kRankEpsilon;
    return out;
}

namespace {

double percentile(std::vector<double> v, double p) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    double idx = p * (static_cast<double>(v.size()) - 1.0);
    std::size_t lo = static_cast<std::size_t>(idx);
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    double frac = idx - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

}  // namespace

Report summarize(const RunResult& run) {
    Report rep;
    rep.n = run.config.n;
    rep.m = run.m;
    rep.workload = run.config.workload.label();
    rep.seed = run.config.seed;
    rep.completed = run.termination == Termination::Completed;
    rep.timeslots = run.timeslots;
    rep.rotations = run.ledger.total_rotations();
    rep.cyber_dollars = run.ledger.total_cyber_dollars();
    double m = static_cast<double>(std::max<std::size_t>(run.m, 1));
    rep.rotations_per_splay = rep.rotations / m;
    rep.cyber_per_splay = rep.cyber_dollars / m;
    rep.rounds_per_splay = rep.rotations_per_splay;

    double span_sum = 0.0, queue_sum = 0.0;
    std::size_t completed = 0;
    int max_cost = 0;
    std::size_t splay_viol = 0;
    for (const SplayRecord& s : run.ledger.splays) {
        if (s.completed_slot) {
            span_sum += static_cast<double>(*s.completed_slot - s.issue_slot);
            ++completed;
        }
        queue_sum += static_cast<double>(s.issue_slot - s.arrival_slot);
        max_cost = std::max(max_cost, s.cyber_dollars);
        if (!splay_cost(s).within_bound) ++splay_viol;
    }
    rep.timeslots_per_splay = completed ? span_sum / static_cast<double>(completed) : 0.0;
    rep.mean_queue_delay = run.ledger.splays.empty()
                               ? 0.0
                               : queue_sum / static_cast<double>(run.ledger.splays.size());
    rep.max_splay_distance_cost = max_cost;
    rep.splay_bound_violations = splay_viol;
    rep.rank_bound_violations = run.ledger.bound_violations;

    rep.h_sources = run.entropy.sources;
    rep.h_destinations = run.entropy.destinations;
    double log2n = std::log2(static_cast<double>(std::max<std::size_t>(run.config.n, 2)));
    double log2m1 = std::log2(static_cast<double>(run.m) + 1.0);
    rep.ratio_rot_log2n = rep.rotations / (m * log2n);
    rep.ratio_rot_entropy = rep.rotations / (m * (rep.h_sources + rep.h_destinations) + 1.0);
    rep.ratio_slots_logs =
        static_cast<double>(run.timeslots) / (m * log2n * std::max(log2m1, 1.0));

    std::vector<double> round_lens;
    round_lens.reserve(run.ledger.rotations.size());
    for (const RotationRecord& r : run.ledger.rotations)
        round_lens.push_back(static_cast<double>(r.commit_slot - r.request_slot));
    rep.round_len_p50 = percentile(round_lens, 0.50);
    rep.round_len_p95 = percentile(round_lens, 0.95);
    rep.round_len_max = round_lens.empty() ? 0.0 : *std::max_element(round_lens.begin(),
                                                                     round_lens.end());
    rep.max_buffer_len = run.ledger.max_buffer_len;
    return rep;
}

}  // namespace splaynet
