#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <string>
#include <vector>

#include "splaynet/simulator.hpp"

using namespace splaynet;

namespace {

RequestSet single(NodeId s, NodeId d) {
    RequestSet rs;
    rs.requests.push_back({s, d, 0});
    return rs;
}

SimConfig config(std::size_t n) {
    SimConfig cfg;
    cfg.n = n;
    cfg.workload.m = 1;
    cfg.log_events = true;
    return cfg;
}

// slots of all events of a given kind at a given node
std::vector<std::uint64_t> slots_of(const EventLog& log, NodeId node, const std::string& kind) {
    std::vector<std::uint64_t> out;
    for (const EventRecord& r : log.records)
        if (r.node == node && r.kind == kind) out.push_back(r.slot);
    return out;
}

bool has_event(const EventLog& log, NodeId node, const std::string& kind,
               const std::string& detail_part, std::uint64_t slot) {
    for (const EventRecord& r : log.records)
        if (r.node == node && r.kind == kind && r.slot == slot &&
            r.detail.find(detail_part) != std::string::npos)
            return true;
    return false;
}

}  // namespace

TEST_CASE("already adjacent pair completes at issue with zero rotations") {
    RunResult res = run_simulation(config(3), single(2, 1));
    CHECK(res.termination == Termination::Completed);
    CHECK(res.ledger.rotations.empty());
    REQUIRE(res.ledger.splays.size() == 1);
    CHECK(res.ledger.splays[0].completed_slot == res.ledger.splays[0].issue_slot);
}

TEST_CASE("isolated zig-zig runs the nine-slot trace") {
    // n=15: splay (1,8); the lone rotation is the zig-zig of 1 over 2 and 4
    // with the root 8 as the locked bystander
    RunResult res = run_simulation(config(15), single(1, 8));
    REQUIRE(res.termination == Termination::Completed);
    REQUIRE(res.ledger.rotations.size() == 1);
    const RotationRecord& rot = res.ledger.rotations[0];
    CHECK(rot.kind == RotationKind::ZigZig);
    CHECK(rot.requester == 1);
    CHECK(rot.finish_slot - rot.request_slot + 1 == 9);

    const EventLog& log = res.log;
    std::uint64_t t1 = rot.request_slot;
    // the trace, slot by slot
    CHECK(has_event(log, 1, "beta_req", "to=2", t1));
    CHECK(has_event(log, 2, "beta_req", "to=4", t1 + 1));
    CHECK(has_event(log, 4, "lock_req", "to=8", t1 + 2));
    CHECK(has_event(log, 8, "grant", "key=1/", t1 + 3));
    CHECK(has_event(log, 8, "lock_ack", "to=4", t1 + 3));
    CHECK(has_event(log, 4, "lock_ack", "to=2", t1 + 4));
    CHECK(has_event(log, 4, "link_change", "to=3", t1 + 4));
    CHECK(has_event(log, 2, "lock_ack", "to=1", t1 + 5));
    CHECK(has_event(log, 3, "buffer_change", "to=4", t1 + 5));
    CHECK(has_event(log, 1, "commit", "kind=zigzig", t1 + 6));
    CHECK(has_event(log, 1, "beta_ack", "to=2", t1 + 6));
    CHECK(has_event(log, 1, "buffer_change", "to=8", t1 + 6));
    CHECK(has_event(log, 8, "free", "", t1 + 7));
    CHECK(has_event(log, 2, "free", "", t1 + 7));
    CHECK(has_event(log, 2, "beta_ack", "to=4", t1 + 7));
    CHECK(has_event(log, 4, "free", "", t1 + 8));

    // final topology: 1 replaced 4 under 8
    CHECK(res.final_tree.node(8).left == 1);
    CHECK(res.final_tree.node(1).right == 2);
    CHECK(res.final_tree.node(2).right == 4);
    CHECK(res.final_tree.node(4).left == 3);
    CHECK(res.final_tree.distance(1, 8) == 1);
}

TEST_CASE("isolated zig completes in fewer slots than a zig-zig") {
    // n=7: splay (3,4): 3's parent 2 hangs under the peer 4, so the single
    // rotation is a zig of 3 over 2 with 4 locked as bystander
    RunResult res = run_simulation(config(7), single(3, 4));
    REQUIRE(res.termination == Termination::Completed);
    REQUIRE(res.ledger.rotations.size() == 1);
    const RotationRecord& rot = res.ledger.rotations[0];
    CHECK(rot.kind == RotationKind::Zig);
    std::uint64_t span = rot.finish_slot - rot.request_slot + 1;
    CHECK(span == 6);
    CHECK(span < 9);
    CHECK(res.final_tree.distance(3, 4) == 1);
}

TEST_CASE("zig at the root has the shortest trace") {
    RunResult res = run_simulation(config(3), single(1, 3));
    REQUIRE(res.termination == Termination::Completed);
    REQUIRE(res.ledger.rotations.size() == 2);  // both endpoints zig once
    CHECK(res.ledger.rotations[0].kind == RotationKind::Zig);
    CHECK(res.final_tree.distance(1, 3) == 1);
    CHECK(res.ledger.splays[0].cyber_dollars == 2);
}

TEST_CASE("source that is already the lca waits while the destination rotates") {
    // splay (8,1) on n=15: 8 is the root and the lca; only 1 rotates
    RunResult res = run_simulation(config(15), single(8, 1));
    REQUIRE(res.termination == Termination::Completed);
    for (const RotationRecord& r : res.ledger.rotations) CHECK(r.requester == 1);
    CHECK(res.final_tree.distance(1, 8) == 1);
    CHECK(!slots_of(res.log, 8, "lca_wait").empty());
}

TEST_CASE("generic pair: both endpoints generate rotation requests") {
    RunResult res = run_simulation(config(31), single(3, 29));
    REQUIRE(res.termination == Termination::Completed);
    bool src_rotated = false, dst_rotated = false;
    for (const RotationRecord& r : res.ledger.rotations) {
        if (r.requester == 3) src_rotated = true;
        if (r.requester == 29) dst_rotated = true;
    }
    CHECK(src_rotated);
    CHECK(dst_rotated);
    CHECK(res.final_tree.distance(3, 29) == 1);
}

TEST_CASE("two disjoint rotations proceed independently") {
    // two splays in far-apart subtrees of n=31; both commit without
    // waiting on each other
    RequestSet rs;
    rs.requests.push_back({1, 4, 0});
    rs.requests.push_back({29, 26, 0});
    SimConfig cfg = config(31);
    RunResult both = run_simulation(cfg, rs);
    REQUIRE(both.termination == Termination::Completed);

    RunResult alone1 = run_simulation(cfg, single(1, 4));
    RunResult alone2 = run_simulation(cfg, single(29, 26));
    // same per-splay cost as when run alone
    CHECK(both.ledger.splays[0].cyber_dollars == alone1.ledger.splays[0].cyber_dollars);
    CHECK(both.ledger.splays[1].cyber_dollars == alone2.ledger.splays[0].cyber_dollars);
    // and the same completion span
    auto span = [](const RunResult& r, std::size_t i) {
        return *r.ledger.splays[i].completed_slot - r.ledger.splays[i].issue_slot;
    };
    CHECK(span(both, 0) == span(alone1, 0));
    CHECK(span(both, 1) == span(alone2, 0));
}

TEST_CASE("locked nodes queue foreign requests until freed") {
    // saturate one path: many sources below the same ancestors
    RequestSet rs;
    rs.requests.push_back({1, 31, 0});
    rs.requests.push_back({3, 30, 0});
    rs.requests.push_back({5, 28, 0});
    SimConfig cfg = config(31);
    RunResult res = run_simulation(cfg, rs);
    CHECK(res.termination == Termination::Completed);
    CHECK(res.commit_aborts == 0);
    for (std::size_t i = 0; i < res.ledger.splays.size(); ++i)
        CHECK(res.ledger.splays[i].completed_slot.has_value());
}

TEST_CASE("messages travel one tree hop") {
    RunResult res = run_simulation(config(31), single(3, 29));
    CHECK(res.locality_violations == 0);
}

TEST_CASE("buffer never exceeds fifteen entries") {
    SimConfig cfg = config(63);
    cfg.workload = WorkloadSpec::parse("uniform", 31);
    RunResult res = run_simulation(cfg);
    CHECK(res.termination == Termination::Completed);
    CHECK(res.ledger.max_buffer_len <= 15);
}
