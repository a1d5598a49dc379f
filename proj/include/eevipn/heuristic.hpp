#pragma once

#include <optional>
#include <vector>

#include "eevipn/assignment.hpp"
#include "eevipn/instance.hpp"
#include "eevipn/power.hpp"
#include "eevipn/routing.hpp"
#include "eevipn/validate.hpp"

namespace eevipn {

/// The per-candidate serving checks, numbered i..vi:
///   i   the request has not been served already
///   ii  upload traffic fits (requester's request leg, server's result leg)
///   iii download traffic fits (server's request leg, requester's result leg)
///   iv  upload slots available (requester always, object servers too)
///   v   a VM is open on the relay or the budget allows opening one
///   vi  the server's processor can take the workload
enum class CheckId { i = 1, ii, iii, iv, v, vi };

inline const char* to_string(CheckId c) {
  switch (c) {
    case CheckId::i: return "i";
    case CheckId::ii: return "ii";
    case CheckId::iii: return "iii";
    case CheckId::iv: return "iv";
    case CheckId::v: return "v";
    case CheckId::vi: return "vi";
  }
  return "?";
}

struct ServingCheck {
  CheckId id = CheckId::i;
  bool pass = true;
  double measured = 0;  // what the candidate would add or hold
  double bound = 0;     // the remaining headroom or限 it is checked against
};

enum class CandidateResult { accepted, rejected, no_reciprocal };

struct CandidateRecord {
  PeerRef peer;
  bool internal = false;
  std::vector<ServingCheck> checks;  // in evaluation order, ends at first fail
  CandidateResult result = CandidateResult::rejected;
  int paired_task = -1;  // reciprocal task committed alongside (object pairs)
};

enum class RequestOutcome { served, blocked, already_served };

struct RequestDecision {
  int requester = 0;
  int task = 0;
  RequestOutcome outcome = RequestOutcome::blocked;
  PeerRef server;         // meaningful when served
  int paired_task = -1;   // set when this serve was one half of an exchange
  std::optional<ServingCheck> blocking_check;  // first failing check seen
  int candidates_considered = 0;
  std::vector<CandidateRecord> candidates;
};

struct HeuristicResult {
  Assignment assignment;
  FlowSet flows;
  std::vector<RequestDecision> trace;
};

/// Default arrival order: ascending (object, task).
inline std::vector<std::pair<int, int>> ascending_order(const Instance& ins) {
  return ins.requests.pairs();
}

/// Seeded shuffle of the arrival order, for sensitivity runs.
inline std::vector<std::pair<int, int>> shuffled_order(const Instance& ins,
                                                       std::uint64_t seed) {
  auto order = ins.requests.pairs();
  SplitMix64 rng(seed);
  rng.shuffle(order);
  return order;
}

namespace heur {

struct State {
  const Instance& ins;
  std::vector<double> ul_req, ul_res, dl_req, dl_res, load_obj;
  std::vector<double> rel_load, rel_dl, rel_ul;
  std::vector<int> slots_out, slots_srv;
  std::vector<char> served;  // by request index (i * n_tasks + t)
  std::vector<char> vm_open;
  int vm_count = 0;
  std::vector<ServeTriple> serves;

  explicit State(const Instance& instance) : ins(instance) {
    ul_req.assign(ins.n_objects(), 0);
    ul_res.assign(ins.n_objects(), 0);
    dl_req.assign(ins.n_objects(), 0);
    dl_res.assign(ins.n_objects(), 0);
    load_obj.assign(ins.n_objects(), 0);
    rel_load.assign(ins.n_relays(), 0);
    rel_dl.assign(ins.n_relays(), 0);
    rel_ul.assign(ins.n_relays(), 0);
    slots_out.assign(ins.n_objects(), 0);
    slots_srv.assign(ins.n_objects(), 0);
    served.assign(static_cast<std::size_t>(ins.n_objects()) * ins.n_tasks(), 0);
    vm_open.assign(ins.n_relays(), 0);
  }

  bool is_served(int i, int t) const {
    return served[static_cast<std::size_t>(i) * ins.n_tasks() + t] != 0;
  }
  void mark_served(int i, int t, bool v) {
    served[static_cast<std::size_t>(i) * ins.n_tasks() + t] = v ? 1 : 0;
  }

  // Evaluates the checks for `srv` taking (i, t); appends to `checks` in
  // order and stops at the first failure. Returns pass/fail overall.
  bool check_candidate(int i, PeerRef srv, int t, std::vector<ServingCheck>& checks) const {
    const TaskType& k = ins.tasks[t];
    const RateLimits& L = ins.params.limits;
    const double tol = 1 + kFeasTol;
    auto push = [&](CheckId id, bool pass, double measured, double bound) {
      checks.push_back({id, pass, measured, bound});
      return pass;
    };

    const bool internal = srv.is_object() && srv.id == i;
    if (!internal) {
      // ii: uploads. The requester sends the raw request, the server sends
      // the reduced result.
      const double up_room = L.ul_object_bps - ul_req[i];
      if (!push(CheckId::ii, k.request_bps <= up_room * tol, k.request_bps, up_room))
        return false;
      const double srv_up_room = srv.is_relay() ? L.ul_relay_bps - rel_ul[srv.id]
                                                : L.ul_object_bps - ul_res[srv.id];
      if (!push(CheckId::ii, k.result_bps <= srv_up_room * tol, k.result_bps,
                srv_up_room))
        return false;
      // iii: downloads.
      const double srv_dl_room = srv.is_relay() ? L.dl_relay_bps - rel_dl[srv.id]
                                                : L.dl_object_bps - dl_req[srv.id];
      if (!push(CheckId::iii, k.request_bps <= srv_dl_room * tol, k.request_bps,
                srv_dl_room))
        return false;
      const double dl_room = L.dl_object_bps - dl_res[i];
      if (!push(CheckId::iii, k.result_bps <= dl_room * tol, k.result_bps, dl_room))
        return false;
      // iv: upload slots.
      if (!push(CheckId::iv, slots_out[i] < ins.params.upload_slots, slots_out[i] + 1,
                ins.params.upload_slots))
        return false;
      if (srv.is_object() &&
          !push(CheckId::iv, slots_srv[srv.id] < ins.params.upload_slots,
                slots_srv[srv.id] + 1, ins.params.upload_slots))
        return false;
      // v: VM budget, relays only.
      if (srv.is_relay()) {
        const bool ok = vm_open[srv.id] || vm_count < ins.params.vm_budget;
        if (!push(CheckId::v, ok, vm_open[srv.id] ? vm_count : vm_count + 1,
                  ins.params.vm_budget))
          return false;
      }
    }
    // vi: processor capacity.
    const double load = srv.is_relay() ? rel_load[srv.id] : load_obj[srv.id];
    const double cap = srv.is_relay() ? ins.topology.relays[srv.id].cpu_capacity_ghz
                                      : ins.topology.objects[srv.id].cpu_capacity_ghz;
    return push(CheckId::vi, load + k.workload_ghz <= cap * tol, load + k.workload_ghz,
                cap);
  }

  void commit(int i, PeerRef srv, int t) {
    const TaskType& k = ins.tasks[t];
    serves.push_back({i, srv, t});
    mark_served(i, t, true);
    if (srv.is_object() && srv.id == i) {
      load_obj[i] += k.workload_ghz;
      return;
    }
    ul_req[i] += k.request_bps;
    dl_res[i] += k.result_bps;
    ++slots_out[i];
    if (srv.is_relay()) {
      rel_load[srv.id] += k.workload_ghz;
      rel_dl[srv.id] += k.request_bps;
      rel_ul[srv.id] += k.result_bps;
      if (!vm_open[srv.id]) {
        vm_open[srv.id] = 1;
        ++vm_count;
      }
    } else {
      load_obj[srv.id] += k.workload_ghz;
      dl_req[srv.id] += k.request_bps;
      ul_res[srv.id] += k.result_bps;
      ++slots_srv[srv.id];
    }
  }

  void rollback(int i, PeerRef srv, int t, bool vm_was_open) {
    const TaskType& k = ins.tasks[t];
    serves.pop_back();
    mark_served(i, t, false);
    if (srv.is_object() && srv.id == i) {
      load_obj[i] -= k.workload_ghz;
      return;
    }
    ul_req[i] -= k.request_bps;
    dl_res[i] -= k.result_bps;
    --slots_out[i];
    if (srv.is_relay()) {
      rel_load[srv.id] -= k.workload_ghz;
      rel_dl[srv.id] -= k.request_bps;
      rel_ul[srv.id] -= k.result_bps;
      if (!vm_was_open) {
        vm_open[srv.id] = 0;
        --vm_count;
      }
    } else {
      load_obj[srv.id] -= k.workload_ghz;
      dl_req[srv.id] -= k.request_bps;
      ul_res[srv.id] -= k.result_bps;
      --slots_srv[srv.id];
    }
  }
};

}  // namespace heur

/// The greedy real-time assignment pass. For each request in arrival order it
/// first scans VM relays nearest-by-hops-first (opening VMs on demand within
/// the budget), then internal processing, then capable objects nearest-first
/// with reciprocity kept exact by committing exchanges in pairs. Blocking is
/// an outcome, not an error; every decision lands in the trace.
inline HeuristicResult run_heuristic(const Instance& ins,
                                     const std::vector<std::pair<int, int>>& order) {
  heur::State st(ins);
  std::vector<RequestDecision> trace;
  trace.reserve(order.size());
  const auto hops = hop_distance_matrix(ins.topology);

  // Relay candidates per home relay, nearest by hop count, ties by id.
  const std::vector<int> eligible = ins.vm_eligible_relays();
  std::vector<std::vector<int>> relay_rank(ins.n_relays());
  for (int home = 0; home < ins.n_relays(); ++home) {
    std::vector<int> rank = eligible;
    std::stable_sort(rank.begin(), rank.end(), [&](int a, int b) {
      return std::pair(hops[home][a], a) < std::pair(hops[home][b], b);
    });
    relay_rank[home] = std::move(rank);
  }

  for (auto [i, t] : order) {
    if (!ins.requests.at(i, t))
      throw StructuralError("arrival order names a request that does not exist: (i" +
                            format_int(i) + ", k" + format_int(t + 1) + ")");
    RequestDecision dec;
    dec.requester = i;
    dec.task = t;

    if (st.is_served(i, t)) {
      dec.outcome = RequestOutcome::already_served;
      dec.blocking_check = ServingCheck{CheckId::i, false, 1, 0};
      trace.push_back(std::move(dec));
      continue;
    }

    bool served = false;

    // Phase 1: relays hosting (or able to open) a VM.
    if (ins.scenario != Scenario::objects_only) {
      for (int r : relay_rank[ins.topology.home_relay[i]]) {
        CandidateRecord cand;
        cand.peer = PeerRef::relay(r);
        const bool ok = st.check_candidate(i, cand.peer, t, cand.checks);
        cand.result = ok ? CandidateResult::accepted : CandidateResult::rejected;
        dec.candidates.push_back(cand);
        if (ok) {
          st.commit(i, cand.peer, t);
          dec.outcome = RequestOutcome::served;
          dec.server = cand.peer;
          served = true;
          break;
        }
      }
    }

    // Phase 2: internal processing, then peer objects with reciprocity.
    if (!served && ins.scenario != Scenario::relays_only) {
      if (ins.capability.object_can(i, t)) {
        CandidateRecord cand;
        cand.peer = PeerRef::object(i);
        cand.internal = true;
        const bool ok = st.check_candidate(i, cand.peer, t, cand.checks);
        cand.result = ok ? CandidateResult::accepted : CandidateResult::rejected;
        dec.candidates.push_back(cand);
        if (ok) {
          st.commit(i, cand.peer, t);
          dec.outcome = RequestOutcome::served;
          dec.server = cand.peer;
          served = true;
        }
      }
      if (!served) {
        // Capable peer objects, nearest first, ties to the lowest id.
        std::vector<int> peers;
        for (int j = 0; j < ins.n_objects(); ++j)
          if (j != i && ins.capability.object_can(j, t)) peers.push_back(j);
        std::stable_sort(peers.begin(), peers.end(), [&](int a, int b) {
          return std::pair(ins.topology.object_distance(i, a), a) <
                 std::pair(ins.topology.object_distance(i, b), b);
        });
        for (int j : peers) {
          CandidateRecord cand;
          cand.peer = PeerRef::object(j);
          if (!st.check_candidate(i, cand.peer, t, cand.checks)) {
            cand.result = CandidateResult::rejected;
            dec.candidates.push_back(cand);
            continue;
          }
          // Reciprocity: the exchange commits atomically or not at all.
          st.commit(i, cand.peer, t);
          int paired = -1;
          for (int t2 = 0; t2 < ins.n_tasks() && paired < 0; ++t2) {
            if (!ins.requests.at(j, t2) || st.is_served(j, t2)) continue;
            if (!ins.capability.object_can(i, t2)) continue;
            std::vector<ServingCheck> back_checks;
            if (st.check_candidate(j, PeerRef::object(i), t2, back_checks))
              paired = t2;
          }
          if (paired < 0) {
            st.rollback(i, cand.peer, t, /*vm_was_open=*/true);
            cand.result = CandidateResult::no_reciprocal;
            dec.candidates.push_back(cand);
            continue;
          }
          st.commit(j, PeerRef::object(i), paired);
          cand.result = CandidateResult::accepted;
          cand.paired_task = paired;
          dec.candidates.push_back(cand);
          dec.outcome = RequestOutcome::served;
          dec.server = cand.peer;
          dec.paired_task = paired;
          served = true;
          break;
        }
      }
    }

    if (!served) {
      dec.outcome = RequestOutcome::blocked;
      for (const CandidateRecord& cand : dec.candidates)
        if (!cand.checks.empty() && !cand.checks.back().pass) {
          dec.blocking_check = cand.checks.back();
          break;
        }
    }
    dec.candidates_considered = static_cast<int>(dec.candidates.size());
    trace.push_back(std::move(dec));
  }

  HeuristicResult out;
  out.assignment.serves = st.serves;
  for (int r = 0; r < ins.n_relays(); ++r)
    if (st.vm_open[r]) out.assignment.open_vms.push_back(r);
  // The VM budget is an exact count; fill the remainder with the lowest-id
  // eligible relays (an open, idle VM draws no power in this model).
  if (ins.scenario != Scenario::objects_only)
    for (int r : eligible) {
      if (static_cast<int>(out.assignment.open_vms.size()) >= ins.params.vm_budget)
        break;
      if (!st.vm_open[r]) out.assignment.open_vms.push_back(r);
    }
  out.assignment.normalize();
  out.flows = build_flows(ins, out.assignment);
  out.trace = std::move(trace);
  return out;
}

inline HeuristicResult run_heuristic(const Instance& ins) {
  return run_heuristic(ins, ascending_order(ins));
}

struct Score {
  long served = 0;
  double total_power_w = 0;
};

/// Served count and total power for a feasible assignment; refuses (with the
/// full violation report) anything the validator rejects.
inline Score score(const Instance& ins, const Assignment& a, const FlowSet& f) {
  ViolationReport rep = validate(ins, a);
  if (!rep.empty())
    throw ValidationError("score: assignment is infeasible", std::move(rep));
  const PowerReport power = total_power(ins, a, f);
  return {static_cast<long>(a.serves.size()), power.total_w()};
}

}  // namespace eevipn
