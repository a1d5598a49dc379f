#pragma once

#include <json.hpp>
#include <ostream>
#include <string>

#include "eevipn/heuristic.hpp"
#include "eevipn/instance.hpp"
#include "eevipn/validate.hpp"

namespace eevipn {

using Json = nlohmann::json;

// Instance and assignment documents use alphabetically ordered keys (the
// library default), 1-based task ids, and "o<N>"/"r<N>" peer tags, so
// serialized files are diff-stable. docs/formats.md holds the schema.

inline Json instance_to_json(const Instance& ins) {
  Json j;
  j["area_side_m"] = ins.topology.area_side_m;
  j["scenario"] = to_string(ins.scenario);

  Json catalog = Json::array();
  for (const TaskType& t : ins.tasks)
    catalog.push_back({{"id", t.id},
                       {"workload_ghz", t.workload_ghz},
                       {"request_bps", t.request_bps},
                       {"result_bps", t.result_bps}});
  j["catalog"] = std::move(catalog);

  Json objects = Json::array();
  for (const Node& n : ins.topology.objects)
    objects.push_back({{"id", n.id},
                       {"x", n.x},
                       {"y", n.y},
                       {"cpu_ghz", n.cpu_capacity_ghz},
                       {"cpu_max_w", n.cpu_max_power_w}});
  j["objects"] = std::move(objects);

  Json relays = Json::array();
  for (const Node& n : ins.topology.relays)
    relays.push_back({{"id", n.id},
                      {"x", n.x},
                      {"y", n.y},
                      {"cpu_ghz", n.cpu_capacity_ghz},
                      {"cpu_max_w", n.cpu_max_power_w},
                      {"vm_host", n.can_host_vm}});
  j["relays"] = std::move(relays);

  Json adjacency = Json::array();
  for (int a = 0; a < ins.topology.n_relays(); ++a)
    for (int b : ins.topology.relay_neighbors[a])
      if (a < b) adjacency.push_back({a, b});
  j["relay_adjacency"] = std::move(adjacency);

  Json requests = Json::array();
  for (auto [i, t] : ins.requests.pairs()) requests.push_back({i, t + 1});
  j["requests"] = std::move(requests);

  Json caps = Json::array();
  for (const auto& ks : ins.capability.object_tasks) {
    Json row = Json::array();
    for (int k : ks) row.push_back(k + 1);
    caps.push_back(std::move(row));
  }
  j["capability"] = std::move(caps);

  const InstanceParams& p = ins.params;
  j["params"] = {{"e_elec_j_per_bit", p.energy.e_elec_j_per_bit},
                 {"epsilon_j_per_bit_m2", p.energy.epsilon_j_per_bit_m2},
                 {"dl_object_bps", p.limits.dl_object_bps},
                 {"dl_relay_bps", p.limits.dl_relay_bps},
                 {"ul_object_bps", p.limits.ul_object_bps},
                 {"ul_relay_bps", p.limits.ul_relay_bps},
                 {"upload_slots", p.upload_slots},
                 {"vm_budget", p.vm_budget},
                 {"big_m", p.big_m},
                 {"task_weight", p.task_weight}};
  return j;
}

inline Instance instance_from_json(const Json& j) {
  try {
    Topology topo;
    topo.area_side_m = j.at("area_side_m").get<double>();
    for (const Json& n : j.at("objects")) {
      Node node;
      node.id = n.at("id").get<int>();
      node.kind = NodeKind::object;
      node.x = n.at("x").get<double>();
      node.y = n.at("y").get<double>();
      node.cpu_capacity_ghz = n.at("cpu_ghz").get<double>();
      node.cpu_max_power_w = n.at("cpu_max_w").get<double>();
      if (node.id != static_cast<int>(topo.objects.size()))
        throw ConfigError("object ids must be 0..N-1 in order");
      topo.objects.push_back(node);
    }
    for (const Json& n : j.at("relays")) {
      Node node;
      node.id = n.at("id").get<int>();
      node.kind = NodeKind::relay;
      node.x = n.at("x").get<double>();
      node.y = n.at("y").get<double>();
      node.cpu_capacity_ghz = n.at("cpu_ghz").get<double>();
      node.cpu_max_power_w = n.at("cpu_max_w").get<double>();
      node.can_host_vm = n.at("vm_host").get<bool>();
      if (node.id != static_cast<int>(topo.relays.size()))
        throw ConfigError("relay ids must be 0..N-1 in order");
      topo.relays.push_back(node);
    }
    if (topo.objects.empty() || topo.relays.empty())
      throw ConfigError("instance needs at least one object and one relay");

    // Distances and home relays are derived facts; adjacency is stored
    // because the radius that produced it is not.
    detail::fill_distances(topo);
    detail::fill_home_relays(topo);
    topo.relay_neighbors.assign(topo.n_relays(), {});
    for (const Json& pair : j.at("relay_adjacency")) {
      const int a = pair.at(0).get<int>(), b = pair.at(1).get<int>();
      if (a < 0 || b < 0 || a >= topo.n_relays() || b >= topo.n_relays() || a == b)
        throw ConfigError("bad relay adjacency pair");
      topo.relay_neighbors[a].push_back(b);
      topo.relay_neighbors[b].push_back(a);
    }
    for (auto& nb : topo.relay_neighbors) {
      std::sort(nb.begin(), nb.end());
      nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
    if (!detail::relay_graph_connected(topo))
      throw ConfigError("relay graph in instance file is disconnected");

    std::vector<TaskType> tasks;
    for (const Json& t : j.at("catalog"))
      tasks.push_back({t.at("id").get<int>(), t.at("workload_ghz").get<double>(),
                       t.at("request_bps").get<double>(),
                       t.at("result_bps").get<double>()});

    RequestMatrix q(topo.n_objects(), static_cast<int>(tasks.size()));
    for (const Json& pair : j.at("requests")) {
      const int i = pair.at(0).get<int>(), id = pair.at(1).get<int>();
      if (i < 0 || i >= q.n_objects || id < 1 || id > q.n_tasks)
        throw ConfigError("request entry out of range");
      q.set(i, id - 1, true);
    }

    Capabilities caps;
    for (const Json& row : j.at("capability")) {
      std::vector<int> ks;
      for (const Json& id : row) ks.push_back(id.get<int>() - 1);
      std::sort(ks.begin(), ks.end());
      caps.object_tasks.push_back(std::move(ks));
    }

    const Json& p = j.at("params");
    InstanceParams params;
    params.energy.e_elec_j_per_bit = p.at("e_elec_j_per_bit").get<double>();
    params.energy.epsilon_j_per_bit_m2 = p.at("epsilon_j_per_bit_m2").get<double>();
    params.limits.dl_object_bps = p.at("dl_object_bps").get<double>();
    params.limits.dl_relay_bps = p.at("dl_relay_bps").get<double>();
    params.limits.ul_object_bps = p.at("ul_object_bps").get<double>();
    params.limits.ul_relay_bps = p.at("ul_relay_bps").get<double>();
    params.upload_slots = p.at("upload_slots").get<int>();
    params.vm_budget = p.at("vm_budget").get<int>();
    params.big_m = p.at("big_m").get<double>();
    params.task_weight = p.at("task_weight").get<double>();

    return make_instance(std::move(topo), std::move(tasks), std::move(q),
                         std::move(caps), scenario_from_string(j.at("scenario")),
                         params);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad instance document: ") + e.what());
  }
}

inline Json assignment_to_json(const Assignment& a) {
  Assignment sorted = a;
  sorted.normalize();
  Json serves = Json::array();
  for (const ServeTriple& s : sorted.serves)
    serves.push_back({s.requester, s.server.str(), s.task + 1});
  Json j;
  j["serves"] = std::move(serves);
  j["open_vms"] = sorted.open_vms;
  return j;
}

inline PeerRef peer_from_string(const std::string& s) {
  if (s.size() < 2 || (s[0] != 'o' && s[0] != 'r'))
    throw ConfigError("bad peer tag '" + s + "'");
  int id = 0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') throw ConfigError("bad peer tag '" + s + "'");
    id = id * 10 + (s[i] - '0');
  }
  return s[0] == 'o' ? PeerRef::object(id) : PeerRef::relay(id);
}

inline Assignment assignment_from_json(const Json& j) {
  try {
    Assignment a;
    for (const Json& s : j.at("serves"))
      a.serves.push_back({s.at(0).get<int>(), peer_from_string(s.at(1).get<std::string>()),
                          s.at(2).get<int>() - 1});
    for (const Json& v : j.at("open_vms")) a.open_vms.push_back(v.get<int>());
    a.normalize();
    return a;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad assignment document: ") + e.what());
  }
}

inline Json violations_to_json(const ViolationReport& rep) {
  Json arr = Json::array();
  for (const Violation& v : rep)
    arr.push_back({{"constraint", v.constraint_id},
                   {"where", v.where},
                   {"lhs", v.lhs},
                   {"bound", v.bound}});
  return arr;
}

/// Heuristic trace as JSON lines: one decision document per request.
inline void write_trace_jsonl(const std::vector<RequestDecision>& trace,
                              std::ostream& os) {
  auto check_json = [](const ServingCheck& c) {
    return Json{{"id", to_string(c.id)},
                {"pass", c.pass},
                {"measured", c.measured},
                {"bound", c.bound}};
  };
  for (const RequestDecision& d : trace) {
    Json j;
    j["request"] = {{"object", d.requester}, {"task", d.task + 1}};
    j["outcome"] = d.outcome == RequestOutcome::served          ? "served"
                   : d.outcome == RequestOutcome::already_served ? "already_served"
                                                                  : "blocked";
    if (d.outcome == RequestOutcome::served) {
      j["server"] = d.server.str();
      if (d.paired_task >= 0) j["paired_task"] = d.paired_task + 1;
    }
    if (d.blocking_check) j["blocking_check"] = check_json(*d.blocking_check);
    j["candidates_considered"] = d.candidates_considered;
    Json cands = Json::array();
    for (const CandidateRecord& c : d.candidates) {
      Json cj;
      cj["peer"] = c.peer.str();
      cj["internal"] = c.internal;
      cj["result"] = c.result == CandidateResult::accepted        ? "accepted"
                     : c.result == CandidateResult::no_reciprocal ? "no_reciprocal"
                                                                   : "rejected";
      if (c.paired_task >= 0) cj["paired_task"] = c.paired_task + 1;
      Json checks = Json::array();
      for (const ServingCheck& chk : c.checks) checks.push_back(check_json(chk));
      cj["checks"] = std::move(checks);
      cands.push_back(std::move(cj));
    }
    j["candidates"] = std::move(cands);
    os << j.dump() << '\n';
  }
}

}  // namespace eevipn
