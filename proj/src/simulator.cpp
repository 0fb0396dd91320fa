#include "splaynet/simulator.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace splaynet {

const char* to_string(Termination t) {
    switch (t) {
        case Termination::Completed: return "completed";
        case Termination::Timeout: return "timeout";
        case Termination::DetectorFired: return "detector_fired";
    }
    return "?";
}

std::string EventLog::to_lines() const {
    std::ostringstream os;
    for (const EventRecord& r : records)
        os << r.slot << ',' << r.node << ',' << r.kind << ',' << r.detail << '\n';
    return os.str();
}

std::uint64_t SimConfig::effective_max_timeslots(std::size_t m) const {
    if (max_timeslots > 0) return max_timeslots;
    double lg_n = std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(n, 2))));
    double lg_m = std::ceil(std::log2(static_cast<double>(m) + 1.0));
    return 10000 + static_cast<std::uint64_t>(200.0 * static_cast<double>(m) * lg_n * lg_m);
}

Simulator::Simulator(const SimConfig& cfg, RequestSet requests)
    : cfg_(cfg), base_requests_(std::move(requests)) {
    if (cfg_.n < 1) throw std::invalid_argument("n must be >= 1");
    ids_.resize(cfg_.n);
    std::iota(ids_.begin(), ids_.end(), NodeId{1});
    tree_ = Tree::build_balanced(ids_);
    states_.resize(cfg_.n);
    for (std::size_t i = 0; i < cfg_.n; ++i) {
        states_[i].id = ids_[i];
        states_[i].buffer = Buffer(ids_[i]);
        sync_links(states_[i], tree_);
        if (ids_[i] == cfg_.fault_invert_priority_at) states_[i].fault_invert_priority = true;
    }
    endpoint_busy_.assign(cfg_.n, false);

    m_ = base_requests_.requests.size();
    tasks_.reserve(m_ * cfg_.super_rounds);
    for (const SplayRequest& r : base_requests_.requests) {
        SplayTask task;
        task.req = r;
        task.record = ledger_.splays.size();
        SplayRecord rec;
        rec.src = r.src;
        rec.dst = r.dst;
        rec.arrival_slot = r.arrival_slot;
        ledger_.splays.push_back(rec);
        tasks_.push_back(task);
    }
    src_round_dist_.resize(tasks_.size());
    dst_round_dist_.resize(tasks_.size());
    current_super_round_ = 1;

    RankSnapshot snap = snapshot_ranks(tree_);
    total_rank_ = snap.total;
    ledger_.initial_total_rank = snap.total;
}

std::size_t Simulator::state_index(NodeId id) const {
    assert(id >= 1 && id <= cfg_.n);
    return static_cast<std::size_t>(id - 1);
}

NodeState& Simulator::state(NodeId id) { return states_[state_index(id)]; }

void Simulator::log_event(NodeId node, const std::string& kind, const std::string& detail) {
    if (cfg_.log_events) log_.append(slot_, node, kind, detail);
}

void Simulator::fire(const std::string& which, const std::string& detail) {
    detector_ = DetectorReport{which, detail, slot_};
    termination_ = Termination::DetectorFired;
    log_event(kNoNode, "detector_" + which, detail);
}

void Simulator::issue_arrivals() {
    // collect newly arrived tasks, then retry the waiting queue in FIFO order
    while (next_arrival_ < tasks_.size() && tasks_[next_arrival_].req.arrival_slot <= slot_ &&
           ledger_.splays[tasks_[next_arrival_].record].arrival_slot <= slot_) {
        waiting_.push_back(&tasks_[next_arrival_]);
        ++next_arrival_;
    }
    std::size_t tries = waiting_.size();
    for (std::size_t i = 0; i < tries; ++i) {
        SplayTask* task = waiting_.front();
        waiting_.pop_front();
        std::size_t si = state_index(task->req.src);
        std::size_t di = state_index(task->req.dst);
        if (endpoint_busy_[si] || endpoint_busy_[di]) {
            waiting_.push_back(task);
            continue;
        }
        endpoint_busy_[si] = true;
        endpoint_busy_[di] = true;
        task->issued = true;
        ++issued_splays_;
        SplayRecord& rec = ledger_.splays[task->record];
        rec.issue_slot = slot_;
        rec.max_distance = tree_.distance(task->req.src, task->req.dst);
        last_progress_slot_ = slot_;
        log_event(task->req.src, "issue",
                  "dst=" + std::to_string(task->req.dst) + " splay=" + std::to_string(task->record));

        ProtocolContext ctx;
        ctx.tree = &tree_;
        ctx.slot = slot_;
        ctx.outbox = &in_flight_;
        ctx.log = [this](NodeId n, const std::string& k, const std::string& d) {
            log_event(n, k, d);
        };
        NodeState& src = state(task->req.src);
        std::size_t before = in_flight_.size();
        start_splay(src, task->req.dst, task->record, ctx);
        for (std::size_t k = before; k < in_flight_.size(); ++k)
            if (in_flight_[k].type == MsgType::SplayRequest) ++splay_reqs_in_flight_;

        if (tree_.distance(task->req.src, task->req.dst) == 1) {
            rec.completed_slot = slot_;  // objective already met at issue
            task->completed = true;
            ++completed_splays_;
        }
    }
}

void Simulator::node_phase() {
    // deliver: bucket this slot's messages per recipient, preserving order
    std::vector<Message> deliver;
    deliver.swap(in_flight_);
    std::vector<std::vector<Message>> inboxes(states_.size());
    for (Message& m : deliver) {
        if (m.type == MsgType::SplayRequest) --splay_reqs_in_flight_;
        if (m.to == kNoNode) continue;
        inboxes[state_index(m.to)].push_back(std::move(m));
    }

    bool gate = true;
    if (cfg_.lockstep_rounds) gate = lockstep_gate_open() && deliver.empty();

    // active set
    std::vector<std::size_t> active;
    active.reserve(states_.size());
    for (std::size_t i = 0; i < states_.size(); ++i) {
        const NodeState& st = states_[i];
        if (!inboxes[i].empty() || st.splay || st.pending || st.locked || st.links_dirty ||
            !st.buffer.empty() || !st.held_grants.empty() || !st.chain.empty()) {
            active.push_back(i);
        }
    }

    struct PerNode {
        std::vector<Message> outbox;
        std::vector<CommitIntent> commits;
        std::vector<NodeId> resyncs;
        std::vector<EventRecord> events;
    };
    std::vector<PerNode> results(active.size());

    auto work = [&](std::size_t k) {
        std::size_t i = active[k];
        PerNode& out = results[k];
        ProtocolContext ctx;
        ctx.tree = &tree_;
        ctx.slot = slot_;
        ctx.outbox = &out.outbox;
        ctx.commits = &out.commits;
        ctx.mirror_resyncs = &out.resyncs;
        ctx.generation_allowed = gate;
        if (cfg_.log_events) {
            auto* events = &out.events;
            std::uint64_t slot = slot_;
            ctx.log = [events, slot](NodeId n, const std::string& kind, const std::string& d) {
                events->push_back({slot, n, kind, d});
            };
        }
        node_slot(states_[i], inboxes[i], ctx);
    };

    if (cfg_.parallel && active.size() > 1) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
        for (long k = 0; k < static_cast<long>(active.size()); ++k)
            work(static_cast<std::size_t>(k));
#else
        for (std::size_t k = 0; k < active.size(); ++k) work(k);
#endif
    } else {
        for (std::size_t k = 0; k < active.size(); ++k) work(k);
    }

    // deterministic merge in node-id order
    std::vector<CommitIntent> commits;
    std::vector<NodeId> resyncs;
    for (std::size_t k = 0; k < active.size(); ++k) {
        PerNode& out = results[k];
        for (Message& m : out.outbox) {
            if (m.type == MsgType::SplayRequest) ++splay_reqs_in_flight_;
            bool exempt = m.type == MsgType::LockRelease ||
                          (m.type == MsgType::LinkChange && m.new_parent != m.from);
            if (!exempt) {
                const NodeState& sender = states_[active[k]];
                if (!sender.links.is_neighbor(m.to)) ++locality_violations_;
            }
            in_flight_.push_back(std::move(m));
        }
        for (CommitIntent& ci : out.commits) commits.push_back(std::move(ci));
        for (NodeId id : out.resyncs) resyncs.push_back(id);
        if (cfg_.log_events)
            for (EventRecord& ev : out.events) log_.records.push_back(std::move(ev));
        std::size_t blen = states_[active[k]].buffer.size();
        if (blen > ledger_.max_buffer_len) ledger_.max_buffer_len = blen;
    }

    for (NodeId id : resyncs) {
        sync_links(state(id), tree_);
        state(id).links_dirty = true;
    }

    commit_phase(commits);
}

namespace {

struct ExpectedAnnouncement {
    NodeId target;
    NodeId announcer;
};

// reconstruct which link-changes the grant wave announced from the entry
std::vector<ExpectedAnnouncement> wave_announcements(const BufferEntry& e) {
    std::vector<ExpectedAnnouncement> out;
    NodeId u = e.key.level1;
    NodeId v = e.level2;
    NodeId u_inner = (u < v) ? e.u_right : e.u_left;
    if (u_inner != kNoNode) out.push_back({u_inner, v});
    if (e.kind == RotationKind::ZigZig) {
        if (e.v_other != kNoNode) out.push_back({e.v_other, e.level3});
    } else if (e.kind == RotationKind::ZigZag) {
        NodeId w = e.level3;
        NodeId u_outer = (v < w) ? e.u_right : e.u_left;
        if (u_outer != kNoNode) out.push_back({u_outer, w});
    }
    return out;
}

}  // namespace

void Simulator::commit_phase(std::vector<CommitIntent>& intents) {
    if (intents.empty()) return;
    std::stable_sort(intents.begin(), intents.end(),
                     [](const CommitIntent& a, const CommitIntent& b) {
                         return a.requester < b.requester;
                     });
    for (CommitIntent& ci : intents) {
        NodeState& u_state = state(ci.requester);
        if (!u_state.pending || !(u_state.pending->key == ci.entry.key) ||
            u_state.pending->withdrawn) {
            continue;  // swept or withdrawn by an earlier commit this slot
        }
        const BufferEntry& e = ci.entry;
        NodeId u = ci.requester;
        bool is_double = e.kind != RotationKind::Zig;

        // validate the chain against the real tree and the lock states
        bool ok = tree_.node(u).parent == e.level2;
        NodeId v = e.level2;
        NodeId w = kNoNode;
        NodeId top = kNoNode;
        if (ok) {
            NodeState& vs = state(v);
            ok = vs.locked && vs.locked_key == e.key;
            if (is_double) {
                w = tree_.node(v).parent;
                ok = ok && w == e.level3 && w != kNoNode;
                if (ok) {
                    NodeState& ws = state(w);
                    ok = ws.locked && ws.locked_key == e.key;
                    bool same_side = (u < v) == (v < w);
                    ok = ok && ((e.kind == RotationKind::ZigZig) == same_side);
                    top = tree_.node(w).parent;
                }
            } else {
                top = tree_.node(v).parent;
            }
            if (ok && top != kNoNode) {
                NodeState& ts = state(top);
                ok = ok && ts.locked && ts.locked_key == e.key && top == ci.handoff_parent;
            }
            if (ok && top == kNoNode) ok = ci.handoff_parent == kNoNode;
        }

        if (!ok) {
            ++commit_aborts_;
            log_event(u, "commit_abort", "key=" + key_str(e.key));
            for (NodeState& st : states_) {
                if (st.locked && st.locked_key == e.key) {
                    st.locked = false;
                    st.locked_key = EntryKey{};
                    sync_links(st, tree_);
                    st.links_dirty = true;
                }
                st.buffer.remove(e.key);
                st.chain.erase(e.key);
                st.held_grants.erase(
                    std::remove_if(st.held_grants.begin(), st.held_grants.end(),
                                   [&](const Message& m) { return m.entry.key == e.key; }),
                    st.held_grants.end());
            }
            u_state.pending.reset();
            continue;
        }

        std::uint64_t request_slot = u_state.pending->request_slot;

        // rank accounting, incremental: only the participants change size.
        // Node ids are contiguous 1..n, so a subtree size is just its id
        // interval width (check_invariants guards the intervals).
        std::vector<NodeId> participants{u, v};
        if (is_double) participants.push_back(w);
        auto size_of = [&](NodeId id) {
            const TreeNode& n = tree_.node(id);
            return static_cast<std::size_t>(n.hi - n.lo) + 1;
        };
        double rank_before = 0.0;
        double r_u_before = std::log2(static_cast<double>(size_of(u)));
        for (NodeId p : participants)
            rank_before += std::log2(static_cast<double>(size_of(p)));

        RotationEffect effect = apply(tree_, u, e.kind);

        double rank_after = 0.0;
        double r_u_after = std::log2(static_cast<double>(size_of(u)));
        for (NodeId p : participants)
            rank_after += std::log2(static_cast<double>(size_of(p)));
        RotationDelta rd =
            rotation_delta_incremental(r_u_before, r_u_after, rank_before, rank_after, e.kind);
        total_rank_ += rd.delta;
        if (!rd.within_bound) ++ledger_.bound_violations;

        // mirrors of everyone whose links the rotation touched
        for (NodeId p : participants) {
            sync_links(state(p), tree_);
            state(p).links_dirty = true;
        }
        if (top != kNoNode) {
            sync_links(state(top), tree_);
            state(top).links_dirty = true;
        }

        // corrective link-changes where the wave announced stale targets
        std::vector<ExpectedAnnouncement> announced = wave_announcements(e);
        for (const LinkChangeRecord& rec : effect.displaced) {
            if (rec.slot != LinkSlot::Parent) continue;
            NodeId node = rec.node;
            if (std::find(participants.begin(), participants.end(), node) != participants.end())
                continue;
            if (node == top) continue;
            NodeId real_parent = rec.after;
            bool announced_right = false;
            for (const ExpectedAnnouncement& a : announced)
                if (a.target == node && a.announcer == real_parent) announced_right = true;
            if (!announced_right) {
                Message lc;
                lc.type = MsgType::LinkChange;
                lc.from = real_parent;
                lc.to = node;
                lc.new_parent = real_parent;
                lc.seq = static_cast<std::uint32_t>(in_flight_.size());
                in_flight_.push_back(std::move(lc));
                log_event(real_parent, "link_change", "to=" + std::to_string(node) + " corrective");
            }
        }
        for (const ExpectedAnnouncement& a : announced) {
            NodeId real_parent = tree_.node(a.target).parent;
            if (real_parent != a.announcer) {
                Message lc;
                lc.type = MsgType::LinkChange;
                lc.from = real_parent;
                lc.to = a.target;
                lc.new_parent = real_parent;
                lc.seq = static_cast<std::uint32_t>(in_flight_.size());
                in_flight_.push_back(std::move(lc));
                log_event(real_parent, "link_change", "to=" + std::to_string(a.target) + " corrective");
            }
        }

        // the completed request leaves every buffer in the network
        for (NodeState& st : states_) {
            st.buffer.remove(e.key);
            st.chain.erase(e.key);
            st.held_grants.erase(
                std::remove_if(st.held_grants.begin(), st.held_grants.end(),
                               [&](const Message& m) { return m.entry.key == e.key; }),
                st.held_grants.end());
            if (st.locked && st.locked_key == e.key && st.id != v && st.id != w &&
                st.id != top) {
                // duplicate chain from a repaired route; dissolve it
                st.locked = false;
                st.locked_key = EntryKey{};
                sync_links(st, tree_);
                st.links_dirty = true;
            }
        }

        u_state.pending.reset();
        u_state.rotations_completed += 1;

        // release wave: ack down to v (it forwards for doubles), buffer
        // contents to the node we just got handed to
        {
            Message ack;
            ack.type = MsgType::BetaAck;
            ack.from = u;
            ack.to = v;
            ack.has_entry = true;
            ack.entry = e;
            ack.seq = static_cast<std::uint32_t>(in_flight_.size());
            in_flight_.push_back(std::move(ack));
            log_event(u, "beta_ack", "to=" + std::to_string(v) + " key=" + key_str(e.key));
        }
        if (top != kNoNode) {
            Message bc;
            bc.type = MsgType::BufferChange;
            bc.from = u;
            bc.to = top;
            bc.has_entry = true;
            bc.entry = e;
            bc.completion = true;
            bc.entries = u_state.buffer.entries_involving(u);
            bc.seq = static_cast<std::uint32_t>(in_flight_.size());
            in_flight_.push_back(std::move(bc));
            log_event(u, "buffer_change", "to=" + std::to_string(top) + " completion");
        }

        // metrics
        RotationRecord rr;
        rr.request_slot = request_slot;
        rr.commit_slot = slot_;
        rr.finish_slot = slot_ + (is_double ? 2 : 1);
        rr.requester = u;
        rr.kind = e.kind;
        rr.delta = rd.delta;
        rr.bound = rd.bound;
        log_event(u, "commit", std::string("kind=") + to_string(e.kind) +
                                   " key=" + key_str(e.key));
        last_progress_slot_ = slot_;

        if (u_state.splay) {
            std::size_t rec_idx = u_state.splay->splay_index;
            rr.splay_index = rec_idx;
            SplayRecord& rec = ledger_.splays[rec_idx];
            rec.rotations += 1;
            rec.cyber_dollars += cyber_dollars(e.kind);
            int dist = tree_.distance(rec.src, rec.dst);
            if (!rec.completed_slot) {
                auto& window = (u == rec.src) ? src_round_dist_[rec_idx] : dst_round_dist_[rec_idx];
                window.push_back(dist);
            }
        }
        ledger_.rotations.push_back(rr);
    }
}

bool Simulator::lockstep_gate_open() const {
    if (splay_reqs_in_flight_ > 0) return false;
    for (const NodeState& st : states_) {
        if (st.locked) return false;
        if (st.pending && !st.pending->withdrawn) return false;
        if (!st.held_grants.empty()) return false;
    }
    return true;
}

void Simulator::run_detectors() {
    if (!cfg_.detectors || termination_) return;
    if (cfg_.detector_stride == 0 || slot_ % cfg_.detector_stride != 0) return;

    if (auto v = tree_.check_invariants()) {
        fire("invariant", v->what + " at node " + std::to_string(v->node) + " " + v->detail);
        return;
    }
    if (auto r = detect_buffer_inconsistency()) {
        fire(r->which, r->detail);
        return;
    }
    if (auto r = detect_deadlock()) {
        fire(r->which, r->detail);
        return;
    }
    if (auto r = detect_loop()) {
        fire(r->which, r->detail);
        return;
    }
    if (issued_splays_ > completed_splays_ && slot_ > last_progress_slot_ + 9 * 15) {
        fire("liveness", "no rotation committed for " + std::to_string(slot_ - last_progress_slot_) +
                             " slots with splays outstanding");
    }
}

std::optional<DetectorReport> Simulator::detect_buffer_inconsistency() const {
    struct PairOrder {
        NodeId node;
        int sign;
    };
    std::map<std::pair<std::string, std::string>, PairOrder> seen;
    for (const NodeState& st : states_) {
        if (st.buffer.size() < 2) continue;
        std::vector<BufferEntry> order = sorted_entries(st, tree_);
        for (std::size_t i = 0; i < order.size(); ++i) {
            for (std::size_t j = i + 1; j < order.size(); ++j) {
                const EntryKey& a = order[i].key;
                const EntryKey& b = order[j].key;
                std::string ka = key_str(a), kb = key_str(b);
                bool flip = kb < ka;
                auto canon = flip ? std::make_pair(kb, ka) : std::make_pair(ka, kb);
                int sign = flip ? -1 : 1;
                auto it = seen.find(canon);
                if (it == seen.end()) {
                    seen.emplace(canon, PairOrder{st.id, sign});
                } else if (it->second.sign != sign) {
                    return DetectorReport{
                        "buffer_inconsistency",
                        "entries " + canon.first + " and " + canon.second +
                            " ordered oppositely at nodes " + std::to_string(it->second.node) +
                            " and " + std::to_string(st.id),
                        slot_};
                }
            }
        }
    }
    return std::nullopt;
}

std::optional<DetectorReport> Simulator::detect_deadlock() const {
    // wait-for edges between rotation requests
    std::map<EntryKey, std::vector<EntryKey>, EntryKeyLess> edges;
    auto add_edge = [&](const EntryKey& a, const EntryKey& b) {
        if (!(a == b)) edges[a].push_back(b);
    };
    for (const NodeState& st : states_) {
        for (const Message& held : st.held_grants) {
            if (st.locked) add_edge(held.entry.key, st.locked_key);
        }
        const BufferEntry* head = nullptr;
        std::vector<BufferEntry> order;
        if (!st.buffer.empty()) {
            order = sorted_entries(st, tree_);
            head = &order.front();
        }
        for (const auto& [key, cs] : st.chain) {
            if (!cs.top_duty || cs.granted) continue;
            if (st.locked) {
                add_edge(key, st.locked_key);
            } else if (head && !(head->key == key)) {
                add_edge(key, head->key);
            }
        }
    }
    // cycle detection
    std::map<EntryKey, int, EntryKeyLess> color;  // 0 unseen, 1 on stack, 2 done
    std::vector<EntryKey> path;
    std::function<std::optional<std::string>(const EntryKey&)> dfs =
        [&](const EntryKey& k) -> std::optional<std::string> {
        color[k] = 1;
        path.push_back(k);
        auto it = edges.find(k);
        if (it != edges.end()) {
            for (const EntryKey& nxt : it->second) {
                int c = color.count(nxt) ? color[nxt] : 0;
                if (c == 1) {
                    std::string cycle;
                    bool in = false;
                    for (const EntryKey& p : path) {
                        if (p == nxt) in = true;
                        if (in) cycle += key_str(p) + " -> ";
                    }
                    cycle += key_str(nxt);
                    return cycle;
                }
                if (c == 0) {
                    if (auto r = dfs(nxt)) return r;
                }
            }
        }
        path.pop_back();
        color[k] = 2;
        return std::nullopt;
    };
    for (const auto& [k, of] : edges) {
        (void)of;
        if (!color.count(k)) {
            if (auto r = dfs(k)) return DetectorReport{"deadlock", "circular wait: " + *r, slot_};
        }
    }
    return std::nullopt;
}

std::optional<DetectorReport> Simulator::detect_loop() const {
    constexpr std::size_t W = 4;
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
        if (tasks_[i].completed || !tasks_[i].issued) continue;
        for (const auto* window : {&src_round_dist_[i], &dst_round_dist_[i]}) {
            const std::vector<int>& d = *window;
            if (d.size() >= W + 1) {
                std::size_t k = d.size() - 1;
                if (d[k] >= d[k - W]) {
                    return DetectorReport{
                        "loop", "splay " + std::to_string(i) + " endpoint made " +
                                    std::to_string(W) + " rounds without net progress (" +
                                    std::to_string(d[k - W]) + " -> " + std::to_string(d[k]) + ")",
                        slot_};
                }
            }
        }
    }
    return std::nullopt;
}

void Simulator::check_termination() {
    if (termination_) return;
    bool all_done = completed_splays_ == tasks_.size() && next_arrival_ >= tasks_.size() &&
                    waiting_.empty();
    if (all_done && current_super_round_ < cfg_.super_rounds) {
        // chain the next batch of requests
        ++current_super_round_;
        std::uint64_t batch_seed = cfg_.seed + 0x9e3779b9ULL * current_super_round_;
        RequestSet next;
        if (cfg_.workload.kind == WorkloadKind::Trace) {
            next = base_requests_;
        } else {
            next = generate(cfg_.workload, ids_, batch_seed);
        }
        for (const SplayRequest& r : next.requests) {
            SplayTask task;
            task.req = r;
            task.req.arrival_slot = slot_ + 1 + r.arrival_slot;
            task.record = ledger_.splays.size();
            SplayRecord rec;
            rec.src = r.src;
            rec.dst = r.dst;
            rec.arrival_slot = task.req.arrival_slot;
            ledger_.splays.push_back(rec);
            tasks_.push_back(task);
            src_round_dist_.emplace_back();
            dst_round_dist_.emplace_back();
        }
        return;
    }
    if (all_done && in_flight_.empty()) {
        bool quiet = true;
        for (const NodeState& st : states_) {
            if (st.locked || (st.pending && !st.pending->withdrawn)) {
                quiet = false;
                break;
            }
        }
        if (quiet) {
            termination_ = Termination::Completed;
            return;
        }
    }
    if (slot_ >= cfg_.effective_max_timeslots(std::max<std::size_t>(m_, 1))) {
        termination_ = Termination::Timeout;
    }
}

void Simulator::step() {
    if (termination_) return;
    ++slot_;
    issue_arrivals();
    // lazily release endpoint reservations once both sides cleared their state
    for (SplayTask& t : tasks_) {
        if (t.completed && t.issued) {
            std::size_t si = state_index(t.req.src), di = state_index(t.req.dst);
            if ((endpoint_busy_[si] || endpoint_busy_[di]) && !states_[si].splay &&
                !states_[di].splay) {
                endpoint_busy_[si] = false;
                endpoint_busy_[di] = false;
            }
        }
    }
    node_phase();
    // track the largest live distance (splay-cost bound) and catch
    // objectives reached through somebody else's rotation
    for (SplayTask& t : tasks_) {
        if (!t.issued || t.completed) continue;
        SplayRecord& rec = ledger_.splays[t.record];
        int d = tree_.distance(rec.src, rec.dst);
        if (d > rec.max_distance) rec.max_distance = d;
        if (d == 1) {
            rec.completed_slot = slot_;
            t.completed = true;
            ++completed_splays_;
            last_progress_slot_ = slot_;
            log_event(rec.src, "splay_done", "dst=" + std::to_string(rec.dst));
        }
    }
    run_detectors();
    check_termination();
}

RunResult Simulator::run() {
    while (!termination_) step();
    return std::move(*this).result();
}

RunResult Simulator::result() && {
    RunResult out;
    out.config = cfg_;
    out.m = ledger_.splays.size();
    out.final_tree = tree_;
    out.log = std::move(log_);
    ledger_.final_total_rank = total_rank_;
    // entropy over everything issued
    RequestSet all;
    for (const SplayTask& t : tasks_) all.requests.push_back(t.req);
    out.entropy = all.requests.empty() ? EntropyPair{} : empirical_entropy(all);
    out.ledger = std::move(ledger_);
    out.termination = termination_.value_or(Termination::Timeout);
    out.detector = detector_;
    out.timeslots = slot_;
    out.commit_aborts = commit_aborts_;
    out.locality_violations = locality_violations_;
    return out;
}

RunResult run_simulation(const SimConfig& cfg) {
    RequestSet rs = generate(cfg.workload, [&] {
        std::vector<NodeId> ids(cfg.n);
        std::iota(ids.begin(), ids.end(), NodeId{1});
        return ids;
    }(), cfg.seed);
    return run_simulation(cfg, rs);
}

RunResult run_simulation(const SimConfig& cfg, const RequestSet& rs) {
    Simulator sim(cfg, rs);
    return sim.run();
}

}  // namespace splaynet
