#pragma once

#include <vector>

#include "eevipn/format.hpp"

namespace eevipn {

/// One task class. A request carries `request_bps` of raw traffic to the
/// serving peer, occupies `workload_ghz` of its processor while assigned, and
/// the reduced result travels back at `result_bps`.
struct TaskType {
  int id = 0;               // 1-based display id; equals position+1 in a catalog
  double workload_ghz = 0;  // processor share the task occupies
  double request_bps = 0;   // raw request traffic
  double result_bps = 0;    // reduced result traffic, <= request_bps
};

/// The ten-task default catalog used by the full-scale experiments.
/// Tasks 5..10 exceed the object processor (0.032 GHz), so only relays can
/// ever serve them; tasks 1..4 fit on objects as well.
inline std::vector<TaskType> default_task_catalog() {
  return {
      {1, 0.010, 250.0, 25.0},
      {2, 0.012, 500.0, 100.0},
      {3, 0.015, 750.0, 225.0},
      {4, 0.020, 1000.0, 400.0},
      {5, 0.050, 1250.0, 625.0},
      {6, 0.100, 1750.0, 1050.0},
      {7, 0.200, 2000.0, 1400.0},
      {8, 0.300, 2250.0, 1800.0},
      {9, 0.400, 2500.0, 2125.0},
      {10, 0.500, 2750.0, 2475.0},
  };
}

inline void check_catalog(const std::vector<TaskType>& tasks) {
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const TaskType& k = tasks[t];
    if (k.id != static_cast<int>(t) + 1)
      throw ConfigError("task catalog ids must be 1..N in order, got id " +
                        format_int(k.id) + " at position " + format_int(t));
    if (k.workload_ghz <= 0) throw ConfigError("task workload must be > 0");
    if (k.request_bps <= 0) throw ConfigError("task request traffic must be > 0");
    if (k.result_bps <= 0 || k.result_bps > k.request_bps)
      throw ConfigError("task result traffic must be in (0, request_bps]");
  }
}

}  // namespace eevipn
