#pragma once

#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "eevipn/assignment.hpp"
#include "eevipn/instance.hpp"
#include "eevipn/power.hpp"

namespace eevipn {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct LinTerm {
  int var = 0;
  double coeff = 0;
};

struct MilpVar {
  std::string name;
  double lo = 0;
  double up = kInf;
  bool is_binary = false;
  double obj = 0;
};

/// lo == up is an equality row; one side may be infinite.
struct MilpRow {
  std::string name;
  std::vector<LinTerm> terms;
  double lo = -kInf;
  double up = kInf;
};

struct UVarMeta {
  int requester = 0;
  PeerRef server;
  int task = 0;
  int var = 0;
};

struct DemandVarMeta {
  bool result = false;  // false: request traffic, true: result traffic
  int x = 0, y = 0;     // relay ids
  int var = 0;
};

struct FlowVarMeta {
  bool result = false;
  int x = 0, y = 0, a = 0, b = 0;  // commodity (x,y), directed link (a,b)
  int var = 0;
};

/// The abstract mixed-integer model: binary serve/VM indicators, continuous
/// rates and relay flows, and the linear objective. Constraint names carry
/// the constraint numbers documented in docs/model.md (c6_..., c15_...), so
/// exports and violation reports speak the same language.
struct MilpModel {
  bool maximize = true;
  std::vector<MilpVar> vars;
  std::vector<MilpRow> rows;
  std::vector<std::string> warnings;

  // Binding back to the originating instance. Present on built models;
  // models reconstructed from an LP file have no binding.
  bool has_binding = false;
  std::vector<UVarMeta> u_vars;
  std::vector<std::pair<int, int>> v_vars;  // (relay id, var)
  std::vector<DemandVarMeta> demand_vars;
  std::vector<FlowVarMeta> flow_vars;

  int add_var(std::string name, double lo, double up, bool is_binary, double obj) {
    vars.push_back({std::move(name), lo, up, is_binary, obj});
    return static_cast<int>(vars.size()) - 1;
  }
  void add_row(std::string name, std::vector<LinTerm> terms, double lo, double up) {
    rows.push_back({std::move(name), std::move(terms), lo, up});
  }
};

/// Builds the full optimization model for an instance: serve indicators over
/// the sparse candidate set (requests that exist, servers that are capable),
/// VM indicators, rate definitions and limits, relay flow conservation, the
/// scenario restriction, and the served-tasks-minus-power objective.
inline MilpModel build_milp(const Instance& ins) {
  const Topology& topo = ins.topology;
  const InstanceParams& P = ins.params;
  const double E = P.energy.e_elec_j_per_bit;
  const double eps = P.energy.epsilon_j_per_bit_m2;
  MilpModel m;
  m.has_binding = true;

  auto uid_name = [&](int uid) { return format_int(uid); };
  auto peer_uid = [&](const PeerRef& p) {
    return p.is_object() ? topo.object_uid(p.id) : topo.relay_uid(p.id);
  };
  // Radio cost of one bit crossing the object<->home-relay link (tx + rx).
  auto object_link_cost = [&](int i) {
    const double d = topo.object_home_distance(i);
    return 2 * E + eps * d * d;
  };

  const std::vector<int> eligible = ins.vm_eligible_relays();
  const auto request_pairs = ins.requests.pairs();

  // --- serve indicators -----------------------------------------------------
  // Candidate servers for (i, task): capable objects in every scenario
  // (relays_only pins them to zero via c31), VM-eligible relays except in
  // objects_only where those variables are dropped entirely.
  std::map<std::pair<int, int>, std::vector<int>> u_by_request;  // (i,t) -> var
  std::map<int, std::vector<int>> u_by_object_server, u_by_relay_server;
  for (auto [i, t] : request_pairs) {
    std::vector<int>& vars_here = u_by_request[{i, t}];
    for (int j = 0; j < ins.n_objects(); ++j) {
      if (!ins.capability.object_can(j, t)) continue;
      const Node& srv = topo.objects[j];
      const double proc = ins.tasks[t].workload_ghz / srv.cpu_capacity_ghz *
                          srv.cpu_max_power_w;
      const int v = m.add_var("U_i" + format_int(i) + "_j" + uid_name(topo.object_uid(j)) +
                                  "_k" + format_int(t + 1),
                              0, 1, true, P.task_weight - proc);
      m.u_vars.push_back({i, PeerRef::object(j), t, v});
      vars_here.push_back(v);
      u_by_object_server[j].push_back(v);
    }
    if (ins.scenario != Scenario::objects_only) {
      for (int r : eligible) {
        const Node& srv = topo.relays[r];
        const double proc = ins.tasks[t].workload_ghz / srv.cpu_capacity_ghz *
                            srv.cpu_max_power_w;
        const int v = m.add_var("U_i" + format_int(i) + "_j" + uid_name(topo.relay_uid(r)) +
                                    "_k" + format_int(t + 1),
                                0, 1, true, P.task_weight - proc);
        m.u_vars.push_back({i, PeerRef::relay(r), t, v});
        vars_here.push_back(v);
        u_by_relay_server[r].push_back(v);
      }
    }
  }

  if (P.big_m < static_cast<double>(request_pairs.size()))
    m.warnings.push_back("big_m " + format_double(P.big_m) +
                         " is below the total request count " +
                         format_int(request_pairs.size()) +
                         "; the VM linking constraint may cut off solutions");

  // --- VM indicators ----------------------------------------------------------
  for (int r : eligible)
    m.v_vars.emplace_back(
        r, m.add_var("V_j" + uid_name(topo.relay_uid(r)), 0, 1, true, 0));

  // --- rate variables ---------------------------------------------------------
  std::vector<int> idm(ins.n_peers()), iuc(ins.n_peers());
  std::vector<int> idc(ins.n_objects()), ium(ins.n_objects());
  for (int u = 0; u < ins.n_peers(); ++u) {
    const bool is_obj = u < ins.n_objects();
    idm[u] = m.add_var("IDM_j" + uid_name(u), 0, kInf, false,
                       is_obj ? -object_link_cost(u) : 0.0);
  }
  for (int i = 0; i < ins.n_objects(); ++i)
    idc[i] = m.add_var("IDC_i" + uid_name(i), 0, kInf, false, -object_link_cost(i));
  for (int i = 0; i < ins.n_objects(); ++i)
    ium[i] = m.add_var("IUM_i" + uid_name(i), 0, kInf, false, -object_link_cost(i));
  for (int u = 0; u < ins.n_peers(); ++u) {
    const bool is_obj = u < ins.n_objects();
    iuc[u] = m.add_var("IUC_j" + uid_name(u), 0, kInf, false,
                       is_obj ? -object_link_cost(u) : 0.0);
  }

  // --- flow variables ---------------------------------------------------------
  // Commodities restricted to relay pairs some candidate could actually load.
  std::set<std::pair<int, int>> dq;
  for (const UVarMeta& u : m.u_vars) {
    const int x = topo.home_relay[u.requester];
    const int y = u.server.is_relay() ? u.server.id : topo.home_relay[u.server.id];
    if (x != y) dq.insert({x, y});
  }
  std::vector<std::pair<int, int>> links;  // directed adjacent relay pairs
  for (int a = 0; a < topo.n_relays(); ++a)
    for (int b : topo.relay_neighbors[a]) links.emplace_back(a, b);
  std::sort(links.begin(), links.end());

  std::map<std::pair<int, int>, int> dem_q, dem_s;
  for (auto [x, y] : dq) {
    dem_q[{x, y}] = m.add_var("lamQ_x" + uid_name(topo.relay_uid(x)) + "_y" +
                                  uid_name(topo.relay_uid(y)),
                              0, kInf, false, 0);
    m.demand_vars.push_back({false, x, y, dem_q[{x, y}]});
  }
  for (auto [x, y] : dq) {
    dem_s[{y, x}] = m.add_var("lamS_x" + uid_name(topo.relay_uid(y)) + "_y" +
                                  uid_name(topo.relay_uid(x)),
                              0, kInf, false, 0);
    m.demand_vars.push_back({true, y, x, dem_s[{y, x}]});
  }
  std::map<std::tuple<int, int, int, int>, int> link_q, link_s;
  for (auto [x, y] : dq)
    for (auto [a, b] : links) {
      link_q[{x, y, a, b}] =
          m.add_var("lamQf_x" + uid_name(topo.relay_uid(x)) + "_y" +
                        uid_name(topo.relay_uid(y)) + "_a" + uid_name(topo.relay_uid(a)) +
                        "_b" + uid_name(topo.relay_uid(b)),
                    0, kInf, false, 0);
      m.flow_vars.push_back({false, x, y, a, b, link_q[{x, y, a, b}]});
    }
  for (auto [x, y] : dq)
    for (auto [a, b] : links) {
      link_s[{y, x, a, b}] =
          m.add_var("lamSf_x" + uid_name(topo.relay_uid(y)) + "_y" +
                        uid_name(topo.relay_uid(x)) + "_a" + uid_name(topo.relay_uid(a)) +
                        "_b" + uid_name(topo.relay_uid(b)),
                    0, kInf, false, 0);
      m.flow_vars.push_back({true, y, x, a, b, link_s[{y, x, a, b}]});
    }
  std::map<std::pair<int, int>, int> agg_q, agg_s;
  for (auto [a, b] : links) {
    const double d = topo.relay_distance(a, b);
    agg_q[{a, b}] = m.add_var("lamQa_a" + uid_name(topo.relay_uid(a)) + "_b" +
                                  uid_name(topo.relay_uid(b)),
                              0, kInf, false, -(2 * E + eps * d * d));
  }
  for (auto [a, b] : links) {
    const double d = topo.relay_distance(a, b);
    agg_s[{a, b}] = m.add_var("lamSa_a" + uid_name(topo.relay_uid(a)) + "_b" +
                                  uid_name(topo.relay_uid(b)),
                              0, kInf, false, -(2 * E + eps * d * d));
  }

  // --- rows -------------------------------------------------------------------
  // (6) at most one server per request.
  for (auto [i, t] : request_pairs) {
    const auto& vars_here = u_by_request[{i, t}];
    if (vars_here.empty()) continue;
    std::vector<LinTerm> terms;
    for (int v : vars_here) terms.push_back({v, 1});
    m.add_row("c6_i" + format_int(i) + "_k" + format_int(t + 1), std::move(terms),
              -kInf, 1);
  }

  // (7) fairness between every object pair.
  for (int i = 0; i < ins.n_objects(); ++i)
    for (int j = i + 1; j < ins.n_objects(); ++j) {
      std::vector<LinTerm> terms;
      for (const UVarMeta& u : m.u_vars) {
        if (!u.server.is_object()) continue;
        if (u.requester == i && u.server.id == j)
          terms.push_back({u.var, 1});  // j serves i
        else if (u.requester == j && u.server.id == i)
          terms.push_back({u.var, -1});  // i serves j
      }
      if (terms.empty()) continue;
      m.add_row("c7_i" + format_int(i) + "_j" + format_int(j), std::move(terms), 0, 0);
    }

  // (9) relays serve only with an open VM.
  if (ins.scenario != Scenario::objects_only) {
    for (int r : eligible) {
      auto it = u_by_relay_server.find(r);
      if (it == u_by_relay_server.end()) continue;
      std::vector<LinTerm> terms;
      for (int v : it->second) terms.push_back({v, 1});
      for (auto [relay, vv] : m.v_vars)
        if (relay == r) terms.push_back({vv, -P.big_m});
      m.add_row("c9_j" + uid_name(topo.relay_uid(r)), std::move(terms), -kInf, 0);
    }
  }

  // (10) exact VM budget, or (32) no VMs at all in objects_only.
  {
    std::vector<LinTerm> terms;
    for (auto [relay, vv] : m.v_vars) terms.push_back({vv, 1});
    if (ins.scenario == Scenario::objects_only)
      m.add_row("c32", std::move(terms), 0, 0);
    else
      m.add_row("c10", std::move(terms), P.vm_budget, P.vm_budget);
  }

  // (11)/(12) processor capacity.
  for (int j = 0; j < ins.n_objects(); ++j) {
    auto it = u_by_object_server.find(j);
    if (it == u_by_object_server.end()) continue;
    std::vector<LinTerm> terms;
    for (int v : it->second) {
      const UVarMeta& u = m.u_vars[v];  // u_vars are created first, index == var
      terms.push_back({v, ins.tasks[u.task].workload_ghz});
    }
    m.add_row("c11_j" + uid_name(j), std::move(terms), -kInf,
              topo.objects[j].cpu_capacity_ghz);
  }
  if (ins.scenario != Scenario::objects_only) {
    for (int r : eligible) {
      auto it = u_by_relay_server.find(r);
      if (it == u_by_relay_server.end()) continue;
      std::vector<LinTerm> terms;
      for (int v : it->second)
        terms.push_back({v, ins.tasks[m.u_vars[v].task].workload_ghz});
      m.add_row("c12_j" + uid_name(topo.relay_uid(r)), std::move(terms), -kInf,
                topo.relays[r].cpu_capacity_ghz);
    }
  }

  // (13)/(14) demand definitions.
  for (auto [key, dvar] : dem_q) {
    const auto [x, y] = key;
    std::vector<LinTerm> terms{{dvar, 1}};
    for (const UVarMeta& u : m.u_vars) {
      const int ux = topo.home_relay[u.requester];
      const int uy = u.server.is_relay() ? u.server.id : topo.home_relay[u.server.id];
      if (ux == x && uy == y) terms.push_back({u.var, -ins.tasks[u.task].request_bps});
    }
    m.add_row("c13_x" + uid_name(topo.relay_uid(x)) + "_y" + uid_name(topo.relay_uid(y)),
              std::move(terms), 0, 0);
  }
  for (auto [key, dvar] : dem_s) {
    const auto [y, x] = key;  // result source y, sink x
    std::vector<LinTerm> terms{{dvar, 1}};
    for (const UVarMeta& u : m.u_vars) {
      const int ux = topo.home_relay[u.requester];
      const int uy = u.server.is_relay() ? u.server.id : topo.home_relay[u.server.id];
      if (ux == x && uy == y) terms.push_back({u.var, -ins.tasks[u.task].result_bps});
    }
    m.add_row("c14_x" + uid_name(topo.relay_uid(y)) + "_y" + uid_name(topo.relay_uid(x)),
              std::move(terms), 0, 0);
  }

  // (15)/(16) flow conservation per commodity at every relay.
  auto conservation = [&](const std::map<std::pair<int, int>, int>& demands,
                          const std::map<std::tuple<int, int, int, int>, int>& flow,
                          const char* cname) {
    for (const auto& [key, dvar] : demands) {
      const auto [x, y] = key;
      for (int a = 0; a < topo.n_relays(); ++a) {
        std::vector<LinTerm> terms;
        for (int b : topo.relay_neighbors[a]) {
          terms.push_back({flow.at({x, y, a, b}), 1});
          terms.push_back({flow.at({x, y, b, a}), -1});
        }
        if (a == x)
          terms.push_back({dvar, -1});
        else if (a == y)
          terms.push_back({dvar, 1});
        if (terms.empty()) continue;
        m.add_row(std::string(cname) + "_x" + uid_name(topo.relay_uid(x)) + "_y" +
                      uid_name(topo.relay_uid(y)) + "_a" + uid_name(topo.relay_uid(a)),
                  std::move(terms), 0, 0);
      }
    }
  };
  conservation(dem_q, link_q, "c15");
  conservation(dem_s, link_s, "c16");

  // (17)/(18) per-link aggregates.
  for (auto [key, avar] : agg_q) {
    const auto [a, b] = key;
    std::vector<LinTerm> terms{{avar, 1}};
    for (const auto& [k4, lvar] : link_q)
      if (std::get<2>(k4) == a && std::get<3>(k4) == b) terms.push_back({lvar, -1});
    m.add_row("c17_a" + uid_name(topo.relay_uid(a)) + "_b" + uid_name(topo.relay_uid(b)),
              std::move(terms), 0, 0);
  }
  for (auto [key, avar] : agg_s) {
    const auto [a, b] = key;
    std::vector<LinTerm> terms{{avar, 1}};
    for (const auto& [k4, lvar] : link_s)
      if (std::get<2>(k4) == a && std::get<3>(k4) == b) terms.push_back({lvar, -1});
    m.add_row("c18_a" + uid_name(topo.relay_uid(a)) + "_b" + uid_name(topo.relay_uid(b)),
              std::move(terms), 0, 0);
  }

  // (19)/(20)/(24)/(25) rate definitions over external serves.
  for (int u = 0; u < ins.n_peers(); ++u) {
    std::vector<LinTerm> terms{{idm[u], 1}};
    for (const UVarMeta& uv : m.u_vars)
      if (peer_uid(uv.server) == u && !(uv.server.is_object() && uv.server.id == uv.requester))
        terms.push_back({uv.var, -ins.tasks[uv.task].request_bps});
    m.add_row("c19_j" + uid_name(u), std::move(terms), 0, 0);
  }
  for (int i = 0; i < ins.n_objects(); ++i) {
    std::vector<LinTerm> terms{{idc[i], 1}};
    for (const UVarMeta& uv : m.u_vars)
      if (uv.requester == i && !(uv.server.is_object() && uv.server.id == i))
        terms.push_back({uv.var, -ins.tasks[uv.task].result_bps});
    m.add_row("c20_i" + uid_name(i), std::move(terms), 0, 0);
  }
  for (int i = 0; i < ins.n_objects(); ++i) {
    std::vector<LinTerm> terms{{ium[i], 1}};
    for (const UVarMeta& uv : m.u_vars)
      if (uv.requester == i && !(uv.server.is_object() && uv.server.id == i))
        terms.push_back({uv.var, -ins.tasks[uv.task].request_bps});
    m.add_row("c24_i" + uid_name(i), std::move(terms), 0, 0);
  }
  for (int u = 0; u < ins.n_peers(); ++u) {
    std::vector<LinTerm> terms{{iuc[u], 1}};
    for (const UVarMeta& uv : m.u_vars)
      if (peer_uid(uv.server) == u && !(uv.server.is_object() && uv.server.id == uv.requester))
        terms.push_back({uv.var, -ins.tasks[uv.task].result_bps});
    m.add_row("c25_j" + uid_name(u), std::move(terms), 0, 0);
  }

  // (21)..(23), (26)..(28) rate limits.
  for (int j = 0; j < ins.n_objects(); ++j)
    m.add_row("c21_j" + uid_name(j), {{idm[j], 1}}, -kInf, P.limits.dl_object_bps);
  for (int i = 0; i < ins.n_objects(); ++i)
    m.add_row("c22_i" + uid_name(i), {{idc[i], 1}}, -kInf, P.limits.dl_object_bps);
  for (int r = 0; r < ins.n_relays(); ++r)
    m.add_row("c23_j" + uid_name(topo.relay_uid(r)), {{idm[topo.relay_uid(r)], 1}},
              -kInf, P.limits.dl_relay_bps);
  for (int i = 0; i < ins.n_objects(); ++i)
    m.add_row("c26_i" + uid_name(i), {{ium[i], 1}}, -kInf, P.limits.ul_object_bps);
  for (int j = 0; j < ins.n_objects(); ++j)
    m.add_row("c27_j" + uid_name(j), {{iuc[j], 1}}, -kInf, P.limits.ul_object_bps);
  for (int r = 0; r < ins.n_relays(); ++r)
    m.add_row("c28_j" + uid_name(topo.relay_uid(r)), {{iuc[topo.relay_uid(r)], 1}},
              -kInf, P.limits.ul_relay_bps);

  // (29)/(30) upload slots; internal serving uses none.
  for (int i = 0; i < ins.n_objects(); ++i) {
    std::vector<LinTerm> terms;
    for (const UVarMeta& uv : m.u_vars)
      if (uv.requester == i && !(uv.server.is_object() && uv.server.id == i))
        terms.push_back({uv.var, 1});
    if (terms.empty()) continue;
    m.add_row("c29_i" + uid_name(i), std::move(terms), -kInf, P.upload_slots);
  }
  for (int j = 0; j < ins.n_objects(); ++j) {
    std::vector<LinTerm> terms;
    for (const UVarMeta& uv : m.u_vars)
      if (uv.server.is_object() && uv.server.id == j && uv.requester != j)
        terms.push_back({uv.var, 1});
    if (terms.empty()) continue;
    m.add_row("c30_j" + uid_name(j), std::move(terms), -kInf, P.upload_slots);
  }

  // (31) relays_only: objects serve nothing (not even themselves).
  if (ins.scenario == Scenario::relays_only) {
    for (int i = 0; i < ins.n_objects(); ++i) {
      std::vector<LinTerm> terms;
      for (const UVarMeta& uv : m.u_vars)
        if (uv.requester == i && uv.server.is_object()) terms.push_back({uv.var, 1});
      if (terms.empty()) continue;
      m.add_row("c31_i" + uid_name(i), std::move(terms), 0, 0);
    }
  }

  return m;
}

}  // namespace eevipn
