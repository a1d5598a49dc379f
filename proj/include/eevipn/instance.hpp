#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eevipn/format.hpp"
#include "eevipn/rng.hpp"
#include "eevipn/tasks.hpp"
#include "eevipn/topology.hpp"

namespace eevipn {

/// Which peers are allowed to serve tasks.
enum class Scenario { hybrid, relays_only, objects_only };

inline const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::hybrid: return "hybrid";
    case Scenario::relays_only: return "relays_only";
    case Scenario::objects_only: return "objects_only";
  }
  return "?";
}

inline Scenario scenario_from_string(const std::string& s) {
  if (s == "hybrid") return Scenario::hybrid;
  if (s == "relays_only") return Scenario::relays_only;
  if (s == "objects_only") return Scenario::objects_only;
  throw ConfigError("unknown scenario '" + s + "'");
}

struct EnergyParams {
  double e_elec_j_per_bit = 50e-9;        // transceiver electronics, per bit
  double epsilon_j_per_bit_m2 = 255e-12;  // transmit amplifier coefficient
};

struct RateLimits {
  double dl_object_bps = 10e3;
  double dl_relay_bps = 25e3;
  double ul_object_bps = 5e3;
  double ul_relay_bps = 25e3;
};

struct InstanceParams {
  EnergyParams energy;
  RateLimits limits;
  int upload_slots = 4;    // per object, each for requests sent and tasks served
  int vm_budget = 10;      // relays that host a VM in hybrid / relays_only
  double big_m = 1e6;      // linking coefficient in the VM-activation constraint
  double task_weight = 0;  // objective weight per served task (F)
};

/// Binary request matrix: which object requests which task type.
struct RequestMatrix {
  int n_objects = 0;
  int n_tasks = 0;
  std::vector<std::uint8_t> q;  // row-major [object][task]

  RequestMatrix() = default;
  RequestMatrix(int objects, int tasks)
      : n_objects(objects), n_tasks(tasks),
        q(static_cast<std::size_t>(objects) * tasks, 0) {}

  bool at(int i, int t) const {
    return q[static_cast<std::size_t>(i) * n_tasks + t] != 0;
  }
  void set(int i, int t, bool v) {
    q[static_cast<std::size_t>(i) * n_tasks + t] = v ? 1 : 0;
  }
  long total() const {
    long s = 0;
    for (auto b : q) s += b;
    return s;
  }
  // All (object, task) pairs with a request, ascending (object, task).
  std::vector<std::pair<int, int>> pairs() const {
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < n_objects; ++i)
      for (int t = 0; t < n_tasks; ++t)
        if (at(i, t)) out.emplace_back(i, t);
    return out;
  }
};

/// Per-object servable task sets (sorted task indices). VM-hosting relays can
/// serve every task type, so only object capabilities are stored.
struct Capabilities {
  std::vector<std::vector<int>> object_tasks;

  bool object_can(int i, int t) const {
    for (int k : object_tasks[i])
      if (k == t) return true;
    return false;
  }
};

/// A complete problem instance. Immutable once built; everything downstream
/// (validation, power accounting, solvers) treats it as shared read-only data.
struct Instance {
  Topology topology;
  std::vector<TaskType> tasks;
  RequestMatrix requests;
  Capabilities capability;
  Scenario scenario = Scenario::hybrid;
  InstanceParams params;

  int n_objects() const { return topology.n_objects(); }
  int n_relays() const { return topology.n_relays(); }
  int n_tasks() const { return static_cast<int>(tasks.size()); }
  int n_peers() const { return n_objects() + n_relays(); }

  std::vector<int> vm_eligible_relays() const {
    std::vector<int> out;
    for (const Node& r : topology.relays)
      if (r.can_host_vm) out.push_back(r.id);
    return out;
  }

  bool relay_can_serve(int /*r*/, int /*t*/) const { return true; }
};

/// Samples, for each task, exactly profile[t] distinct requesting objects.
inline RequestMatrix generate_requests(std::uint64_t seed, const Topology& topo,
                                       const std::vector<TaskType>& tasks,
                                       const std::vector<int>& profile) {
  if (profile.size() != tasks.size())
    throw ConfigError("request profile must have one count per task type");
  RequestMatrix q(topo.n_objects(), static_cast<int>(tasks.size()));
  SplitMix64 rng(seed);
  for (int t = 0; t < q.n_tasks; ++t) {
    const int count = profile[t];
    if (count < 0 || count > topo.n_objects())
      throw ConfigError("request count " + format_int(count) + " for task " +
                        format_int(t + 1) + " exceeds object population " +
                        format_int(topo.n_objects()));
    for (int i : rng.sample_without_replacement(topo.n_objects(), count))
      q.set(i, t, true);
  }
  return q;
}

/// Gives each object a uniformly random fixed-size subset of task types.
/// Only tasks an object processor can actually execute are drawn from: a
/// "capability" for a workload beyond the CPU would be dead weight. When the
/// catalog has fewer executable types than `subset_size`, every object gets
/// all of them.
inline Capabilities generate_capabilities(std::uint64_t seed, const Topology& topo,
                                          const std::vector<TaskType>& tasks,
                                          int subset_size = 3) {
  if (static_cast<int>(tasks.size()) < subset_size)
    throw ConfigError("need at least " + format_int(subset_size) + " task types");
  std::vector<int> feasible;
  const double cap_ghz = topo.n_objects() > 0 ? topo.objects[0].cpu_capacity_ghz
                                              : kObjectCpuGhz;
  for (int t = 0; t < static_cast<int>(tasks.size()); ++t)
    if (tasks[t].workload_ghz <= cap_ghz) feasible.push_back(t);
  const int draw = std::min<int>(subset_size, static_cast<int>(feasible.size()));
  Capabilities caps;
  caps.object_tasks.resize(topo.n_objects());
  SplitMix64 rng(seed);
  for (int i = 0; i < topo.n_objects(); ++i) {
    std::vector<int> picked =
        rng.sample_without_replacement(static_cast<int>(feasible.size()), draw);
    for (int& k : picked) k = feasible[k];
    caps.object_tasks[i] = std::move(picked);
  }
  return caps;
}

/// Per-task request counts of the full-scale experiment (sums to 115).
inline std::vector<int> default_request_profile() {
  return {15, 10, 15, 8, 14, 11, 9, 13, 11, 9};
}

/// The task-weight sweep used by the scenario studies.
inline std::vector<double> task_weight_sweep() {
  return {0.0, 0.1, 0.2, 0.3, 0.6, 0.9, 1.2, 1.5, 1.8};
}

inline void check_instance(const Instance& ins) {
  check_catalog(ins.tasks);
  if (ins.requests.n_objects != ins.n_objects() ||
      ins.requests.n_tasks != ins.n_tasks())
    throw ConfigError("request matrix shape does not match instance");
  if (static_cast<int>(ins.capability.object_tasks.size()) != ins.n_objects())
    throw ConfigError("capability table shape does not match instance");
  for (const auto& ks : ins.capability.object_tasks)
    for (int k : ks)
      if (k < 0 || k >= ins.n_tasks())
        throw ConfigError("capability references unknown task index " + format_int(k));
  const InstanceParams& p = ins.params;
  if (p.energy.e_elec_j_per_bit <= 0 || p.energy.epsilon_j_per_bit_m2 <= 0)
    throw ConfigError("energy parameters must be > 0");
  if (p.limits.dl_object_bps <= 0 || p.limits.dl_relay_bps <= 0 ||
      p.limits.ul_object_bps <= 0 || p.limits.ul_relay_bps <= 0)
    throw ConfigError("rate limits must be > 0");
  if (p.upload_slots < 0) throw ConfigError("upload slots must be >= 0");
  if (p.big_m <= 0) throw ConfigError("big_m must be > 0");
  if (p.task_weight < 0) throw ConfigError("task weight must be >= 0");
  const int eligible = static_cast<int>(ins.vm_eligible_relays().size());
  if (p.vm_budget < 0 || p.vm_budget > eligible)
    throw ConfigError("VM budget " + format_int(p.vm_budget) +
                      " exceeds eligible relay count " + format_int(eligible));
}

/// Assembles and checks an instance from already-built parts.
inline Instance make_instance(Topology topology, std::vector<TaskType> tasks,
                              RequestMatrix requests, Capabilities capability,
                              Scenario scenario, InstanceParams params) {
  Instance ins;
  ins.topology = std::move(topology);
  ins.tasks = std::move(tasks);
  ins.requests = std::move(requests);
  ins.capability = std::move(capability);
  ins.scenario = scenario;
  ins.params = std::move(params);
  check_instance(ins);
  return ins;
}

/// The full-scale default: 25 objects, 5x5 relay grid at 6 m pitch inside a
/// 30 m square, ten-task catalog, per-task request counts summing to 115.
/// Topology, requests and capabilities draw from independent streams of the
/// one master seed.
inline Instance make_default_instance(std::uint64_t seed,
                                      Scenario scenario = Scenario::hybrid,
                                      double task_weight = 1.8) {
  Topology topo = generate_topology(derive_seed(seed, 0), 25, GridSpec{}, 30.0);
  std::vector<TaskType> tasks = default_task_catalog();
  RequestMatrix q = generate_requests(derive_seed(seed, 1), topo, tasks,
                                      default_request_profile());
  Capabilities caps = generate_capabilities(derive_seed(seed, 2), topo, tasks);
  InstanceParams params;
  params.task_weight = task_weight;
  return make_instance(std::move(topo), std::move(tasks), std::move(q),
                       std::move(caps), scenario, params);
}

}  // namespace eevipn
