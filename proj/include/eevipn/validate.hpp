#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "eevipn/assignment.hpp"
#include "eevipn/instance.hpp"

namespace eevipn {

// Feasibility slack for floating-point accumulation (relative).
inline constexpr double kFeasTol = 1e-9;

/// One violated model constraint. `constraint_id` is the constraint number
/// of the optimization model documented in docs/model.md (6..32).
struct Violation {
  int constraint_id = 0;
  std::string where;
  double lhs = 0;
  double bound = 0;
};

using ViolationReport = std::vector<Violation>;

inline bool report_has(const ViolationReport& rep, int constraint_id) {
  for (const Violation& v : rep)
    if (v.constraint_id == constraint_id) return true;
  return false;
}

/// Checks an assignment against every model constraint for its instance and
/// scenario. Violations are data, not errors: the report lists every failed
/// constraint with the offending indices and both sides of the comparison.
inline ViolationReport validate(const Instance& ins, const Assignment& a) {
  ViolationReport rep;
  const InstanceParams& p = ins.params;

  // Structural screen; malformed triples are reported under (6) and excluded
  // from the arithmetic below.
  std::vector<ServeTriple> serves;
  serves.reserve(a.serves.size());
  for (const ServeTriple& s : a.serves) {
    const bool bad_requester = s.requester < 0 || s.requester >= ins.n_objects();
    const bool bad_task = s.task < 0 || s.task >= ins.n_tasks();
    const bool bad_server =
        s.server.id < 0 ||
        s.server.id >= (s.server.is_object() ? ins.n_objects() : ins.n_relays());
    if (bad_requester || bad_task || bad_server) {
      rep.push_back({6, "malformed triple " + s.str(), 1, 0});
      continue;
    }
    serves.push_back(s);
  }
  std::sort(serves.begin(), serves.end());

  // (6) one server per request, requests must exist, servers must be capable.
  for (std::size_t i = 1; i < serves.size(); ++i)
    if (serves[i] == serves[i - 1])
      rep.push_back({6, "duplicate triple " + serves[i].str(), 2, 1});
  {
    std::map<std::pair<int, int>, int> per_request;
    for (const ServeTriple& s : serves) ++per_request[{s.requester, s.task}];
    for (const auto& [key, count] : per_request)
      if (count > 1)
        rep.push_back({6,
                       "request (i" + format_int(key.first) + ", k" +
                           format_int(key.second + 1) + ") has multiple servers",
                       static_cast<double>(count), 1});
  }
  for (const ServeTriple& s : serves) {
    if (!ins.requests.at(s.requester, s.task))
      rep.push_back({6, "triple " + s.str() + " serves a request that was never made",
                     1, 0});
    if (s.server.is_object() && !ins.capability.object_can(s.server.id, s.task))
      rep.push_back(
          {6, "triple " + s.str() + " server is not capable of the task", 1, 0});
  }

  // (7) fairness: per object pair, mutual serve counts must match.
  {
    std::map<std::pair<int, int>, int> served_for;  // (requester, object server)
    for (const ServeTriple& s : serves)
      if (s.server.is_object() && !s.internal())
        ++served_for[{s.requester, s.server.id}];
    std::map<std::pair<int, int>, std::pair<int, int>> pairs;
    for (const auto& [key, count] : served_for) {
      const int lo = std::min(key.first, key.second);
      const int hi = std::max(key.first, key.second);
      auto& entry = pairs[{lo, hi}];
      if (key.second == lo)
        entry.first = count;  // lo serves hi's requests
      else
        entry.second = count;  // hi serves lo's requests
    }
    for (const auto& [pr, counts] : pairs)
      if (counts.first != counts.second)
        rep.push_back({7,
                       "objects {" + format_int(pr.first) + ", " +
                           format_int(pr.second) + "} serve each other unequally",
                       static_cast<double>(std::max(counts.first, counts.second)),
                       static_cast<double>(std::min(counts.first, counts.second))});
  }

  // (9) a relay may serve only with an open VM, at most big_m tasks.
  std::vector<int> relay_served(ins.n_relays(), 0);
  for (const ServeTriple& s : serves)
    if (s.server.is_relay()) ++relay_served[s.server.id];
  for (int r = 0; r < ins.n_relays(); ++r) {
    const double cap = a.vm_open(r) ? p.big_m : 0.0;
    if (relay_served[r] > cap)
      rep.push_back({9,
                     a.vm_open(r) ? "relay " + format_int(r) + " exceeds the VM link bound"
                                  : "relay " + format_int(r) + " serves without an open VM",
                     static_cast<double>(relay_served[r]), cap});
  }

  // (10) exact VM budget on eligible relays (replaced by (32) in objects_only).
  if (ins.scenario != Scenario::objects_only) {
    if (static_cast<int>(a.open_vms.size()) != p.vm_budget)
      rep.push_back({10, "open VM count", static_cast<double>(a.open_vms.size()),
                     static_cast<double>(p.vm_budget)});
    for (int r : a.open_vms)
      if (r < 0 || r >= ins.n_relays() || !ins.topology.relays[r].can_host_vm)
        rep.push_back({10, "relay " + format_int(r) + " is not VM-eligible", 1, 0});
  }

  // (11)/(12) processor capacity.
  {
    std::vector<double> load_obj(ins.n_objects(), 0.0), load_rel(ins.n_relays(), 0.0);
    for (const ServeTriple& s : serves) {
      const double w = ins.tasks[s.task].workload_ghz;
      if (s.server.is_object())
        load_obj[s.server.id] += w;
      else
        load_rel[s.server.id] += w;
    }
    for (int j = 0; j < ins.n_objects(); ++j) {
      const double cap = ins.topology.objects[j].cpu_capacity_ghz;
      if (load_obj[j] > cap * (1 + kFeasTol))
        rep.push_back({11, "object " + format_int(j), load_obj[j], cap});
    }
    for (int r = 0; r < ins.n_relays(); ++r) {
      const double cap = ins.topology.relays[r].cpu_capacity_ghz;
      if (load_rel[r] > cap * (1 + kFeasTol))
        rep.push_back({12, "relay " + format_int(r), load_rel[r], cap});
    }
  }

  // (21)..(28) rate limits per node kind.
  {
    Assignment clean;
    clean.serves = serves;
    clean.open_vms = a.open_vms;
    const RateSet r = derive_rates(ins, clean);
    const RateLimits& L = p.limits;
    for (int j = 0; j < ins.n_objects(); ++j)
      if (r.dl_request_bps[j] > L.dl_object_bps * (1 + kFeasTol))
        rep.push_back({21, "object " + format_int(j), r.dl_request_bps[j],
                       L.dl_object_bps});
    for (int i = 0; i < ins.n_objects(); ++i)
      if (r.dl_result_bps[i] > L.dl_object_bps * (1 + kFeasTol))
        rep.push_back({22, "object " + format_int(i), r.dl_result_bps[i],
                       L.dl_object_bps});
    for (int rl = 0; rl < ins.n_relays(); ++rl) {
      const double v = r.dl_request_bps[ins.topology.relay_uid(rl)];
      if (v > L.dl_relay_bps * (1 + kFeasTol))
        rep.push_back({23, "relay " + format_int(rl), v, L.dl_relay_bps});
    }
    for (int i = 0; i < ins.n_objects(); ++i)
      if (r.ul_request_bps[i] > L.ul_object_bps * (1 + kFeasTol))
        rep.push_back({26, "object " + format_int(i), r.ul_request_bps[i],
                       L.ul_object_bps});
    for (int j = 0; j < ins.n_objects(); ++j)
      if (r.ul_result_bps[j] > L.ul_object_bps * (1 + kFeasTol))
        rep.push_back({27, "object " + format_int(j), r.ul_result_bps[j],
                       L.ul_object_bps});
    for (int rl = 0; rl < ins.n_relays(); ++rl) {
      const double v = r.ul_result_bps[ins.topology.relay_uid(rl)];
      if (v > L.ul_relay_bps * (1 + kFeasTol))
        rep.push_back({28, "relay " + format_int(rl), v, L.ul_relay_bps});
    }
  }

  // (29)/(30) upload slots; internal triples use no slot.
  {
    std::vector<int> sent(ins.n_objects(), 0), served(ins.n_objects(), 0);
    for (const ServeTriple& s : serves) {
      if (s.internal()) continue;
      ++sent[s.requester];
      if (s.server.is_object()) ++served[s.server.id];
    }
    for (int i = 0; i < ins.n_objects(); ++i) {
      if (sent[i] > p.upload_slots)
        rep.push_back({29, "object " + format_int(i) + " external requests",
                       static_cast<double>(sent[i]),
                       static_cast<double>(p.upload_slots)});
      if (served[i] > p.upload_slots)
        rep.push_back({30, "object " + format_int(i) + " external serves",
                       static_cast<double>(served[i]),
                       static_cast<double>(p.upload_slots)});
    }
  }

  // Scenario restrictions.
  if (ins.scenario == Scenario::relays_only) {
    std::vector<int> object_served(ins.n_objects(), 0);
    for (const ServeTriple& s : serves)
      if (s.server.is_object()) ++object_served[s.requester];
    for (int i = 0; i < ins.n_objects(); ++i)
      if (object_served[i] > 0)
        rep.push_back({31, "object " + format_int(i) + " served by objects",
                       static_cast<double>(object_served[i]), 0});
  } else if (ins.scenario == Scenario::objects_only) {
    if (!a.open_vms.empty())
      rep.push_back({32, "open VM count",
                     static_cast<double>(a.open_vms.size()), 0});
    long relay_serves = 0;
    for (const ServeTriple& s : serves)
      if (s.server.is_relay()) ++relay_serves;
    if (relay_serves > 0)
      rep.push_back({32, "tasks served by relays",
                     static_cast<double>(relay_serves), 0});
  }

  return rep;
}

/// Thrown by operations that require a feasible assignment.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string msg, ViolationReport rep)
      : std::runtime_error(std::move(msg)), report(std::move(rep)) {}
  ViolationReport report;
};

}  // namespace eevipn
