#ifndef SPLAYNET_SIMULATOR_HPP
#define SPLAYNET_SIMULATOR_HPP

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "splaynet/analysis.hpp"
#include "splaynet/protocol.hpp"
#include "splaynet/topology.hpp"
#include "splaynet/workload.hpp"

namespace splaynet {

struct SimConfig {
    std::size_t n = 0;
    std::uint64_t seed = 1;
    std::uint64_t max_timeslots = 0;  // 0: derived from n and m
    WorkloadSpec workload;
    bool detectors = true;
    std::size_t detector_stride = 1;
    bool lockstep_rounds = false;
    std::size_t super_rounds = 1;
    bool parallel = false;  // OpenMP node phase; serial path is the reference
    bool log_events = true;
    NodeId fault_invert_priority_at = kNoNode;  // test-only fault injection

    std::uint64_t effective_max_timeslots(std::size_t m) const;
};

struct EventRecord {
    std::uint64_t slot;
    NodeId node;
    std::string kind;
    std::string detail;
};

struct EventLog {
    std::vector<EventRecord> records;
    void append(std::uint64_t slot, NodeId node, std::string kind, std::string detail) {
        records.push_back({slot, node, std::move(kind), std::move(detail)});
    }
    std::string to_lines() const;  // `slot,node,event,detail`
};

enum class Termination { Completed, Timeout, DetectorFired };

const char* to_string(Termination t);

struct DetectorReport {
    std::string which;   // "deadlock" | "buffer_inconsistency" | "loop" | ...
    std::string detail;
    std::uint64_t slot = 0;
};

struct RunResult {
    SimConfig config;
    std::size_t m = 0;
    Tree final_tree;
    EventLog log;
    CostLedger ledger;
    EntropyPair entropy;
    Termination termination = Termination::Completed;
    std::optional<DetectorReport> detector;
    std::uint64_t timeslots = 0;
    std::size_t commit_aborts = 0;
    std::size_t locality_violations = 0;
};

class Simulator {
public:
    Simulator(const SimConfig& cfg, RequestSet requests);

    void step();
    RunResult run();  // steps to completion / timeout / detector

    bool finished() const { return termination_.has_value(); }
    std::uint64_t slot() const { return slot_; }
    const Tree& tree() const { return tree_; }
    const std::vector<NodeState>& states() const { return states_; }
    NodeState& state(NodeId id);

    // detectors (also runnable standalone; unit tests poke them directly)
    std::optional<DetectorReport> detect_buffer_inconsistency() const;
    std::optional<DetectorReport> detect_deadlock() const;
    std::optional<DetectorReport> detect_loop() const;

    RunResult result() &&;

private:
    struct SplayTask {
        SplayRequest req;
        std::size_t record;      // index into ledger_.splays
        bool issued = false;
        bool completed = false;
    };

    void issue_arrivals();
    void node_phase();
    void commit_phase(std::vector<CommitIntent>& intents);
    void run_detectors();
    void check_termination();
    bool lockstep_gate_open() const;
    void fire(const std::string& which, const std::string& detail);
    void log_event(NodeId node, const std::string& kind, const std::string& detail);
    std::size_t state_index(NodeId id) const;

    SimConfig cfg_;
    std::size_t m_ = 0;
    Tree tree_;
    std::vector<NodeState> states_;
    std::vector<NodeId> ids_;
    std::uint64_t slot_ = 0;
    std::vector<Message> in_flight_;       // delivered next slot
    std::deque<SplayTask*> waiting_;       // arrived, endpoints busy
    std::vector<SplayTask> tasks_;
    std::size_t next_arrival_ = 0;
    std::size_t completed_splays_ = 0;
    std::size_t issued_splays_ = 0;
    std::vector<bool> endpoint_busy_;      // reserved or active, by state index
    EventLog log_;
    CostLedger ledger_;
    double total_rank_ = 0.0;
    std::optional<Termination> termination_;
    std::optional<DetectorReport> detector_;
    std::uint64_t last_progress_slot_ = 0;
    std::size_t commit_aborts_ = 0;
    std::size_t locality_violations_ = 0;
    std::size_t entry_msgs_in_flight_ = 0;
    std::size_t splay_reqs_in_flight_ = 0;
    std::size_t current_super_round_ = 0;
    RequestSet base_requests_;
    // per-splay progress windows: distances at endpoint round completions
    std::vector<std::vector<int>> src_round_dist_;
    std::vector<std::vector<int>> dst_round_dist_;
};

RunResult run_simulation(const SimConfig& cfg);
RunResult run_simulation(const SimConfig& cfg, const RequestSet& rs);

}  // namespace splaynet

#endif
