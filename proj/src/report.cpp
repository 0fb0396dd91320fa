#include "splaynet/report.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"

namespace splaynet {

const std::vector<std::string> kCsvColumns = {
    "n",
    "m",
    "workload",
    "seed",
    "agg",
    "completed",
    "timeslots",
    "rotations",
    "cyber_dollars",
    "rot_per_m",
    "rounds_per_m",
    "timeslots_per_splay",
    "queue_delay_mean",
    "H_src",
    "H_dst",
    "D",
    "ratio_rot_log2n",
    "ratio_rot_entropy",
    "ratio_slots_logs",
    "round_len_p50",
    "round_len_p95",
    "round_len_max",
    "max_buffer",
    "rank_bound_violations",
    "splay_bound_violations",
};

namespace {

// fixed float formatting so replays produce byte-identical rows
std::string fmt(double v) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

std::string csv_header() {
    std::string out;
    for (std::size_t i = 0; i < kCsvColumns.size(); ++i) {
        if (i) out += ',';
        out += kCsvColumns[i];
    }
    out += '\n';
    return out;
}

std::string csv_row(const Report& rep, const std::string& agg) {
    std::ostringstream os;
    os << rep.n << ',' << rep.m << ',' << rep.workload << ',' << rep.seed << ','
       << (agg.empty() ? "-" : agg) << ',' << (rep.completed ? 1 : 0) << ',' << rep.timeslots
       << ',' << rep.rotations << ',' << rep.cyber_dollars << ',' << fmt(rep.rotations_per_splay)
       << ',' << fmt(rep.rounds_per_splay) << ',' << fmt(rep.timeslots_per_splay) << ','
       << fmt(rep.mean_queue_delay) << ',' << fmt(rep.h_sources) << ','
       << fmt(rep.h_destinations) << ',' << rep.max_splay_distance_cost << ','
       << fmt(rep.ratio_rot_log2n) << ',' << fmt(rep.ratio_rot_entropy) << ','
       << fmt(rep.ratio_slots_logs) << ',' << fmt(rep.round_len_p50) << ','
       << fmt(rep.round_len_p95) << ',' << fmt(rep.round_len_max) << ',' << rep.max_buffer_len
       << ',' << rep.rank_bound_violations << ',' << rep.splay_bound_violations << '\n';
    return os.str();
}

std::string csv_aggregate_row(const std::vector<Report>& cell) {
    if (cell.empty()) return "";
    Report mean = cell.front();
    auto avg = [&](auto proj) {
        double s = 0.0;
        for (const Report& r : cell) s += static_cast<double>(proj(r));
        return s / static_cast<double>(cell.size());
    };
    mean.timeslots = static_cast<std::uint64_t>(avg([](const Report& r) { return r.timeslots; }));
    mean.rotations = static_cast<int>(avg([](const Report& r) { return r.rotations; }));
    mean.cyber_dollars = static_cast<int>(avg([](const Report& r) { return r.cyber_dollars; }));
    mean.rotations_per_splay = avg([](const Report& r) { return r.rotations_per_splay; });
    mean.rounds_per_splay = avg([](const Report& r) { return r.rounds_per_splay; });
    mean.timeslots_per_splay = avg([](const Report& r) { return r.timeslots_per_splay; });
    mean.mean_queue_delay = avg([](const Report& r) { return r.mean_queue_delay; });
    mean.h_sources = avg([](const Report& r) { return r.h_sources; });
    mean.h_destinations = avg([](const Report& r) { return r.h_destinations; });
    mean.ratio_rot_log2n = avg([](const Report& r) { return r.ratio_rot_log2n; });
    mean.ratio_rot_entropy = avg([](const Report& r) { return r.ratio_rot_entropy; });
    mean.ratio_slots_logs = avg([](const Report& r) { return r.ratio_slots_logs; });
    mean.round_len_p50 = avg([](const Report& r) { return r.round_len_p50; });
    mean.round_len_p95 = avg([](const Report& r) { return r.round_len_p95; });
    mean.round_len_max = avg([](const Report& r) { return r.round_len_max; });
    bool all_completed = true;
    std::size_t max_buf = 0, rankv = 0, splayv = 0;
    for (const Report& r : cell) {
        all_completed = all_completed && r.completed;
        max_buf = std::max(max_buf, r.max_buffer_len);
        rankv += r.rank_bound_violations;
        splayv += r.splay_bound_violations;
    }
    mean.completed = all_completed;
    mean.max_buffer_len = max_buf;
    mean.rank_bound_violations = rankv;
    mean.splay_bound_violations = splayv;
    int max_d = 0;
    for (const Report& r : cell) max_d = std::max(max_d, r.max_splay_distance_cost);
    mean.max_splay_distance_cost = max_d;
    return csv_row(mean, "mean");
}

std::string to_json(const Report& rep) {
    nlohmann::ordered_json j;
    j["n"] = rep.n;
    j["m"] = rep.m;
    j["workload"] = rep.workload;
    j["seed"] = rep.seed;
    j["completed"] = rep.completed;
    j["timeslots"] = rep.timeslots;
    j["rotations"] = rep.rotations;
    j["cyber_dollars"] = rep.cyber_dollars;
    j["rotations_per_splay"] = rep.rotations_per_splay;
    j["rounds_per_splay"] = rep.rounds_per_splay;
    j["timeslots_per_splay"] = rep.timeslots_per_splay;
    j["queue_delay_mean"] = rep.mean_queue_delay;
    j["entropy"] = {{"sources", rep.h_sources}, {"destinations", rep.h_destinations}};
    j["max_splay_distance"] = rep.max_splay_distance_cost;
    j["ratios"] = {{"rot_per_m_log2n", rep.ratio_rot_log2n},
                   {"rot_per_m_entropy", rep.ratio_rot_entropy},
                   {"slots_per_m_logs", rep.ratio_slots_logs}};
    j["round_length"] = {{"p50", rep.round_len_p50},
                         {"p95", rep.round_len_p95},
                         {"max", rep.round_len_max}};
    j["max_buffer_len"] = rep.max_buffer_len;
    j["rank_bound_violations"] = rep.rank_bound_violations;
    j["splay_bound_violations"] = rep.splay_bound_violations;
    return j.dump(2) + "\n";
}

}  // namespace splaynet
