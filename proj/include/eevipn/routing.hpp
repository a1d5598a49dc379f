#pragma once

#include <deque>
#include <map>
#include <ostream>
#include <tuple>
#include <vector>

#include "eevipn/assignment.hpp"
#include "eevipn/instance.hpp"
#include "eevipn/validate.hpp"

namespace eevipn {

/// Relay-to-relay commodity flows. `demand_*` is the end-to-end traffic per
/// ordered relay pair, `link_*` the per-commodity per-link flow, `agg_*` the
/// per-link totals across commodities. Request flows (kind Q) carry raw task
/// traffic; result flows (kind S) carry the reduced traffic back.
struct FlowSet {
  std::map<std::pair<int, int>, double> demand_q, demand_s;
  std::map<std::tuple<int, int, int, int>, double> link_q, link_s;
  std::map<std::pair<int, int>, double> agg_q, agg_s;

  bool empty() const {
    return demand_q.empty() && demand_s.empty() && link_q.empty() &&
           link_s.empty() && agg_q.empty() && agg_s.empty();
  }
};

namespace detail {

inline std::vector<int> hop_distances_from(const Topology& t, int from) {
  std::vector<int> dist(t.n_relays(), -1);
  std::deque<int> queue{from};
  dist[from] = 0;
  while (!queue.empty()) {
    const int a = queue.front();
    queue.pop_front();
    for (int b : t.relay_neighbors[a])
      if (dist[b] < 0) {
        dist[b] = dist[a] + 1;
        queue.push_back(b);
      }
  }
  return dist;
}

}  // namespace detail

/// Hop distance between every relay pair (BFS per relay).
inline std::vector<std::vector<int>> hop_distance_matrix(const Topology& t) {
  std::vector<std::vector<int>> m(t.n_relays());
  for (int r = 0; r < t.n_relays(); ++r) m[r] = detail::hop_distances_from(t, r);
  return m;
}

/// Minimum-hop relay path from `from` to `to`, endpoints included.
/// Returns an empty path when from == to. Among equal-hop paths the walk
/// picks the lowest neighbor id at every step, so the result is the
/// lexicographically smallest shortest path.
inline std::vector<int> min_hop_path(const Topology& t, int from, int to) {
  if (from < 0 || from >= t.n_relays() || to < 0 || to >= t.n_relays())
    throw StructuralError("min_hop_path: relay index out of range");
  if (from == to) return {};
  const std::vector<int> dist = detail::hop_distances_from(t, to);
  if (dist[from] < 0)
    throw StructuralError("min_hop_path: relays " + format_int(from) + " and " +
                          format_int(to) + " are disconnected");
  std::vector<int> path{from};
  int cur = from;
  while (cur != to) {
    int next = -1;
    for (int b : t.relay_neighbors[cur])
      if (dist[b] == dist[cur] - 1) {
        next = b;  // neighbor lists are sorted, first hit is the smallest id
        break;
      }
    path.push_back(next);
    cur = next;
  }
  return path;
}

inline int hop_count(const std::vector<int>& path) {
  return path.empty() ? 0 : static_cast<int>(path.size()) - 1;
}

enum class ResultRouting {
  reverse_of_request,  // results retrace the request path backwards (default)
  independent,         // results routed on their own min-hop path
};

/// Builds the commodity flows for an assignment: each external triple injects
/// its request traffic at the requester's home relay toward the server's home
/// (or hosting) relay, and its result traffic back. Triples whose endpoints
/// share a relay produce no relay-to-relay flow.
inline FlowSet build_flows(const Instance& ins, const Assignment& a,
                           ResultRouting routing = ResultRouting::reverse_of_request) {
  FlowSet f;
  const Topology& topo = ins.topology;

  auto add_path = [](std::map<std::tuple<int, int, int, int>, double>& links,
                     std::map<std::pair<int, int>, double>& agg, int x, int y,
                     const std::vector<int>& path, double bps) {
    for (std::size_t h = 0; h + 1 < path.size(); ++h) {
      links[{x, y, path[h], path[h + 1]}] += bps;
      agg[{path[h], path[h + 1]}] += bps;
    }
  };

  for (const ServeTriple& s : a.serves) {
    detail::check_triple_shape(ins, s);
    if (s.internal()) continue;
    const TaskType& k = ins.tasks[s.task];
    const int x = topo.home_relay[s.requester];
    const int y = s.server.is_relay() ? s.server.id : topo.home_relay[s.server.id];
    if (x == y) continue;
    f.demand_q[{x, y}] += k.request_bps;
    f.demand_s[{y, x}] += k.result_bps;
    const std::vector<int> fwd = min_hop_path(topo, x, y);
    add_path(f.link_q, f.agg_q, x, y, fwd, k.request_bps);
    if (routing == ResultRouting::reverse_of_request) {
      std::vector<int> back(fwd.rbegin(), fwd.rend());
      add_path(f.link_s, f.agg_s, y, x, back, k.result_bps);
    } else {
      add_path(f.link_s, f.agg_s, y, x, min_hop_path(topo, y, x), k.result_bps);
    }
  }
  return f;
}

/// Verifies per-commodity flow conservation: net out-flow is +demand at the
/// source, -demand at the sink and zero elsewhere. Violations carry
/// constraint id 15 (request flows) or 16 (result flows). Flows on
/// non-adjacent relay pairs are reported under the same ids.
inline ViolationReport check_conservation(const Topology& topo, const FlowSet& f) {
  ViolationReport rep;

  auto check_kind = [&](const std::map<std::pair<int, int>, double>& demand,
                        const std::map<std::tuple<int, int, int, int>, double>& links,
                        int constraint_id, const char* kind) {
    // commodity -> node -> signed balance
    std::map<std::pair<int, int>, std::map<int, double>> balance;
    for (const auto& [key, bps] : demand) (void)balance[key];
    for (const auto& [key, bps] : links) {
      const auto [x, y, a, b] = key;
      balance[{x, y}][a] += bps;
      balance[{x, y}][b] -= bps;
      if (!topo.relays_adjacent(a, b))
        rep.push_back({constraint_id,
                       std::string(kind) + " flow (" + format_int(x) + "->" +
                           format_int(y) + ") uses non-adjacent link " +
                           format_int(a) + "-" + format_int(b),
                       bps, 0});
    }
    for (auto& [commodity, nodes] : balance) {
      const auto [x, y] = commodity;
      double d = 0;
      if (auto it = demand.find(commodity); it != demand.end()) d = it->second;
      const double tol = 1e-9 * std::max(1.0, d);
      for (int a = 0; a < topo.n_relays(); ++a) {
        double net = 0;
        if (auto it = nodes.find(a); it != nodes.end()) net = it->second;
        const double expected = a == x ? d : (a == y ? -d : 0.0);
        if (std::abs(net - expected) > tol)
          rep.push_back({constraint_id,
                         std::string(kind) + " commodity (" + format_int(x) +
                             "->" + format_int(y) + ") unbalanced at relay " +
                             format_int(a),
                         net, expected});
      }
    }
  };

  check_kind(f.demand_q, f.link_q, 15, "request");
  check_kind(f.demand_s, f.link_s, 16, "result");
  return rep;
}

/// CSV rows: x,y,a,b,kind,bps for every per-link commodity flow.
inline void write_flows_csv(const FlowSet& f, std::ostream& os) {
  os << "x,y,a,b,kind,bps\n";
  for (const auto& [key, bps] : f.link_q) {
    const auto [x, y, a, b] = key;
    os << x << ',' << y << ',' << a << ',' << b << ",Q," << format_double(bps)
       << '\n';
  }
  for (const auto& [key, bps] : f.link_s) {
    const auto [x, y, a, b] = key;
    os << x << ',' << y << ',' << a << ',' << b << ",S," << format_double(bps)
       << '\n';
  }
}

}  // namespace eevipn
