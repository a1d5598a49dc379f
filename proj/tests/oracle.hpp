#pragma once

// Exhaustive-enumeration oracle for tiny instances. Independent of the
// production solver path on purpose: it walks every server choice per
// request, checks feasibility with its own counters, and prices traffic via
// its own Dijkstra over per-bit link costs. Exponential and proud of it.

#include <cmath>
#include <map>
#include <queue>
#include <vector>

#include "eevipn/assignment.hpp"
#include "eevipn/instance.hpp"

namespace oracle {

struct Result {
  bool feasible = false;
  double objective = 0;
  long leaves = 0;
  eevipn::Assignment best;
};

// Per-bit cost of one relay-to-relay hop: sender pays electronics plus the
// amplifier term, receiver pays electronics.
inline std::vector<std::vector<double>> min_cost_matrix(const eevipn::Instance& ins) {
  const auto& topo = ins.topology;
  const double E = ins.params.energy.e_elec_j_per_bit;
  const double eps = ins.params.energy.epsilon_j_per_bit_m2;
  const int R = topo.n_relays();
  std::vector<std::vector<double>> cost(R, std::vector<double>(R, 0.0));
  for (int src = 0; src < R; ++src) {
    std::vector<double> dist(R, 1e300);
    dist[src] = 0;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    pq.push({0.0, src});
    while (!pq.empty()) {
      auto [d, a] = pq.top();
      pq.pop();
      if (d > dist[a]) continue;
      for (int b : topo.relay_neighbors[a]) {
        const double dd = topo.relay_distance(a, b);
        const double w = 2 * E + eps * dd * dd;
        if (d + w < dist[b] - 1e-18) {
          dist[b] = d + w;
          pq.push({dist[b], b});
        }
      }
    }
    cost[src] = dist;
  }
  return cost;
}

struct Enumerator {
  const eevipn::Instance& ins;
  bool count_objective;
  std::vector<std::pair<int, int>> requests;
  std::vector<std::vector<eevipn::PeerRef>> candidates;
  std::vector<std::vector<double>> relay_cost;

  // running state
  std::vector<double> ul_req, ul_res, dl_req, dl_res, load_obj;
  std::vector<double> load_rel, rel_dl, rel_ul;
  std::vector<int> slots_out, slots_srv;
  std::map<std::pair<int, int>, int> pair_balance;  // (lo,hi): lo-serves-hi minus hi-serves-lo
  std::vector<eevipn::ServeTriple> chosen;
  double power = 0;
  long relay_servers = 0;
  std::vector<int> relay_serve_count;

  Result out;

  explicit Enumerator(const eevipn::Instance& instance, bool count_obj)
      : ins(instance), count_objective(count_obj) {
    requests = ins.requests.pairs();
    relay_cost = min_cost_matrix(ins);
    for (auto [i, t] : requests) {
      std::vector<eevipn::PeerRef> cands;
      if (ins.scenario != eevipn::Scenario::relays_only)
        for (int j = 0; j < ins.n_objects(); ++j)
          if (ins.capability.object_can(j, t)) cands.push_back(eevipn::PeerRef::object(j));
      if (ins.scenario != eevipn::Scenario::objects_only)
        for (int r : ins.vm_eligible_relays()) cands.push_back(eevipn::PeerRef::relay(r));
      candidates.push_back(std::move(cands));
    }
    ul_req.assign(ins.n_objects(), 0);
    ul_res.assign(ins.n_objects(), 0);
    dl_req.assign(ins.n_objects(), 0);
    dl_res.assign(ins.n_objects(), 0);
    load_obj.assign(ins.n_objects(), 0);
    load_rel.assign(ins.n_relays(), 0);
    rel_dl.assign(ins.n_relays(), 0);
    rel_ul.assign(ins.n_relays(), 0);
    slots_out.assign(ins.n_objects(), 0);
    slots_srv.assign(ins.n_objects(), 0);
    relay_serve_count.assign(ins.n_relays(), 0);
  }

  double triple_power(int i, eevipn::PeerRef srv, int t) const {
    const auto& topo = ins.topology;
    const eevipn::TaskType& k = ins.tasks[t];
    const double E = ins.params.energy.e_elec_j_per_bit;
    const double eps = ins.params.energy.epsilon_j_per_bit_m2;
    const double w_proc = srv.is_object()
                              ? k.workload_ghz / topo.objects[srv.id].cpu_capacity_ghz *
                                    topo.objects[srv.id].cpu_max_power_w
                              : k.workload_ghz / topo.relays[srv.id].cpu_capacity_ghz *
                                    topo.relays[srv.id].cpu_max_power_w;
    if (srv.is_object() && srv.id == i) return w_proc;  // internal: no radio
    auto link = [&](double d) { return 2 * E + eps * d * d; };
    double unit = link(topo.object_home_distance(i));
    const int x = topo.home_relay[i];
    const int y = srv.is_relay() ? srv.id : topo.home_relay[srv.id];
    unit += relay_cost[x][y];
    if (srv.is_object()) unit += link(topo.object_home_distance(srv.id));
    return w_proc + (k.request_bps + k.result_bps) * unit;
  }

  bool try_add(int i, eevipn::PeerRef srv, int t) {
    const eevipn::TaskType& k = ins.tasks[t];
    const auto& L = ins.params.limits;
    const double tol = 1 + 1e-12;
    if (srv.is_object()) {
      if (load_obj[srv.id] + k.workload_ghz >
          ins.topology.objects[srv.id].cpu_capacity_ghz * tol)
        return false;
      if (srv.id == i) return true;  // internal: processor check only
      if (ul_req[i] + k.request_bps > L.ul_object_bps * tol) return false;
      if (ul_res[srv.id] + k.result_bps > L.ul_object_bps * tol) return false;
      if (dl_req[srv.id] + k.request_bps > L.dl_object_bps * tol) return false;
      if (dl_res[i] + k.result_bps > L.dl_object_bps * tol) return false;
      if (slots_out[i] + 1 > ins.params.upload_slots) return false;
      if (slots_srv[srv.id] + 1 > ins.params.upload_slots) return false;
      return true;
    }
    if (load_rel[srv.id] + k.workload_ghz >
        ins.topology.relays[srv.id].cpu_capacity_ghz * tol)
      return false;
    if (ul_req[i] + k.request_bps > L.ul_object_bps * tol) return false;
    if (rel_ul[srv.id] + k.result_bps > L.ul_relay_bps * tol) return false;
    if (rel_dl[srv.id] + k.request_bps > L.dl_relay_bps * tol) return false;
    if (dl_res[i] + k.result_bps > L.dl_object_bps * tol) return false;
    if (slots_out[i] + 1 > ins.params.upload_slots) return false;
    if (relay_serve_count[srv.id] == 0 &&
        relay_servers + 1 > ins.params.vm_budget)
      return false;
    return true;
  }

  void apply(int i, eevipn::PeerRef srv, int t, int sign) {
    const eevipn::TaskType& k = ins.tasks[t];
    if (srv.is_object()) {
      load_obj[srv.id] += sign * k.workload_ghz;
      if (srv.id != i) {
        ul_req[i] += sign * k.request_bps;
        ul_res[srv.id] += sign * k.result_bps;
        dl_req[srv.id] += sign * k.request_bps;
        dl_res[i] += sign * k.result_bps;
        slots_out[i] += sign;
        slots_srv[srv.id] += sign;
        const int lo = std::min(i, srv.id), hi = std::max(i, srv.id);
        pair_balance[{lo, hi}] += sign * (srv.id == lo ? 1 : -1);
      }
    } else {
      load_rel[srv.id] += sign * k.workload_ghz;
      ul_req[i] += sign * k.request_bps;
      rel_ul[srv.id] += sign * k.result_bps;
      rel_dl[srv.id] += sign * k.request_bps;
      dl_res[i] += sign * k.result_bps;
      slots_out[i] += sign;
      if (sign > 0) {
        if (relay_serve_count[srv.id]++ == 0) ++relay_servers;
      } else {
        if (--relay_serve_count[srv.id] == 0) --relay_servers;
      }
    }
    power += sign * triple_power(i, srv, t);
  }

  void leaf() {
    ++out.leaves;
    for (const auto& [pr, bal] : pair_balance)
      if (bal != 0) return;  // unfair
    const double objective =
        count_objective ? static_cast<double>(chosen.size())
                        : ins.params.task_weight * static_cast<double>(chosen.size()) -
                              power;
    eevipn::Assignment a;
    a.serves = chosen;
    for (int r = 0; r < ins.n_relays(); ++r)
      if (relay_serve_count[r] > 0) a.open_vms.push_back(r);
    if (ins.scenario != eevipn::Scenario::objects_only)
      for (int r : ins.vm_eligible_relays()) {
        if (static_cast<int>(a.open_vms.size()) >= ins.params.vm_budget) break;
        if (relay_serve_count[r] == 0) a.open_vms.push_back(r);
      }
    a.normalize();
    if (!out.feasible || objective > out.objective + 1e-12 ||
        (std::abs(objective - out.objective) <= 1e-12 && a < out.best)) {
      out.feasible = true;
      out.objective = objective;
      out.best = std::move(a);
    }
  }

  void walk(std::size_t idx) {
    if (idx == requests.size()) {
      leaf();
      return;
    }
    const auto [i, t] = requests[idx];
    walk(idx + 1);  // leave the request unserved
    for (const eevipn::PeerRef& srv : candidates[idx]) {
      if (!try_add(i, srv, t)) continue;
      apply(i, srv, t, +1);
      chosen.push_back({i, srv, t});
      walk(idx + 1);
      chosen.pop_back();
      apply(i, srv, t, -1);
    }
  }
};

inline Result optimum(const eevipn::Instance& ins, bool count_objective = false) {
  Enumerator e(ins, count_objective);
  e.walk(0);
  return e.out;
}

}  // namespace oracle
