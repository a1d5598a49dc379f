#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "eevipn/format.hpp"
#include "eevipn/rng.hpp"

namespace eevipn {

// Default hardware profile: constrained end devices and grid relays.
inline constexpr double kObjectCpuGhz = 0.032;
inline constexpr double kObjectCpuMaxW = 0.347;
inline constexpr double kRelayCpuGhz = 1.2;
inline constexpr double kRelayCpuMaxW = 3.7;

enum class NodeKind { object, relay };

struct Node {
  int id = 0;  // index within its kind
  NodeKind kind = NodeKind::object;
  double x = 0, y = 0;  // meters
  double cpu_capacity_ghz = 0;
  double cpu_max_power_w = 0;
  bool can_host_vm = false;  // relays only
};

/// Relay grid layout. Offsets < 0 mean "center the grid inside the area".
/// Relay ids are row-major: id = row * cols + col.
struct GridSpec {
  int rows = 5;
  int cols = 5;
  double pitch_m = 6.0;
  double offset_x_m = -1.0;
  double offset_y_m = -1.0;
  double adjacency_radius_m = 0.0;  // 0 = use pitch (4-neighbor grid)
};

/// Immutable node layout: object/relay positions, the full distance matrix,
/// each object's home relay (nearest, ties to the lowest relay id) and the
/// relay adjacency relation used for relay-to-relay transport.
struct Topology {
  std::vector<Node> objects;
  std::vector<Node> relays;
  std::vector<int> home_relay;                  // per object
  std::vector<std::vector<int>> relay_neighbors;  // sorted adjacency lists
  std::vector<double> distances;                // (n_nodes)^2, unified index
  double area_side_m = 0;

  int n_objects() const { return static_cast<int>(objects.size()); }
  int n_relays() const { return static_cast<int>(relays.size()); }
  int n_nodes() const { return n_objects() + n_relays(); }

  // Unified node index: objects first, then relays. This is also the id
  // space used for canonical variable names in exported models.
  int object_uid(int i) const { (void)this; return i; }
  int relay_uid(int r) const { return n_objects() + r; }

  double distance(int uid_a, int uid_b) const {
    return distances[static_cast<std::size_t>(uid_a) * n_nodes() + uid_b];
  }
  double object_relay_distance(int i, int r) const {
    return distance(object_uid(i), relay_uid(r));
  }
  double relay_distance(int a, int b) const {
    return distance(relay_uid(a), relay_uid(b));
  }
  double object_distance(int i, int j) const { return distance(i, j); }
  double object_home_distance(int i) const {
    return object_relay_distance(i, home_relay[i]);
  }
  bool relays_adjacent(int a, int b) const {
    for (int n : relay_neighbors[a])
      if (n == b) return true;
    return false;
  }
};

namespace detail {

inline double euclid(const Node& a, const Node& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

inline void fill_distances(Topology& t) {
  const int n = t.n_nodes();
  t.distances.assign(static_cast<std::size_t>(n) * n, 0.0);
  auto node_at = [&](int uid) -> const Node& {
    return uid < t.n_objects() ? t.objects[uid] : t.relays[uid - t.n_objects()];
  };
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      const double d = euclid(node_at(a), node_at(b));
      t.distances[static_cast<std::size_t>(a) * n + b] = d;
      t.distances[static_cast<std::size_t>(b) * n + a] = d;
    }
}

inline void fill_home_relays(Topology& t) {
  t.home_relay.assign(t.n_objects(), 0);
  for (int i = 0; i < t.n_objects(); ++i) {
    int best = 0;
    double best_d = t.object_relay_distance(i, 0);
    for (int r = 1; r < t.n_relays(); ++r) {
      const double d = t.object_relay_distance(i, r);
      if (d < best_d) {
        best_d = d;
        best = r;
      }
    }
    t.home_relay[i] = best;
  }
}

inline void fill_relay_adjacency(Topology& t, double radius) {
  t.relay_neighbors.assign(t.n_relays(), {});
  for (int a = 0; a < t.n_relays(); ++a)
    for (int b = a + 1; b < t.n_relays(); ++b)
      if (t.relay_distance(a, b) <= radius + 1e-9) {
        t.relay_neighbors[a].push_back(b);
        t.relay_neighbors[b].push_back(a);
      }
}

inline bool relay_graph_connected(const Topology& t) {
  if (t.n_relays() == 0) return false;
  std::vector<char> seen(t.n_relays(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int a = stack.back();
    stack.pop_back();
    for (int b : t.relay_neighbors[a])
      if (!seen[b]) {
        seen[b] = 1;
        ++count;
        stack.push_back(b);
      }
  }
  return count == t.n_relays();
}

}  // namespace detail

/// Builds a topology: relays on a deterministic grid, objects placed
/// uniformly at random inside the square area from the seeded generator.
/// The same seed always yields a field-identical topology.
inline Topology generate_topology(std::uint64_t seed, int n_objects,
                                  const GridSpec& grid, double area_side_m) {
  if (n_objects < 1) throw ConfigError("need at least one object");
  if (grid.rows < 1 || grid.cols < 1) throw ConfigError("grid must be at least 1x1");
  if (grid.pitch_m <= 0 && (grid.rows > 1 || grid.cols > 1))
    throw ConfigError("grid pitch must be > 0");
  if (area_side_m <= 0) throw ConfigError("area side must be > 0");

  const double extent_x = (grid.cols - 1) * grid.pitch_m;
  const double extent_y = (grid.rows - 1) * grid.pitch_m;
  double off_x = grid.offset_x_m, off_y = grid.offset_y_m;
  if (off_x < 0) off_x = (area_side_m - extent_x) / 2.0;
  if (off_y < 0) off_y = (area_side_m - extent_y) / 2.0;
  const double slack = 1e-9;
  if (extent_x > area_side_m + slack || extent_y > area_side_m + slack ||
      off_x + extent_x > area_side_m + slack || off_y + extent_y > area_side_m + slack)
    throw ConfigError("relay grid does not fit inside the area");

  Topology t;
  t.area_side_m = area_side_m;

  SplitMix64 rng(seed);
  t.objects.reserve(n_objects);
  for (int i = 0; i < n_objects; ++i) {
    Node o;
    o.id = i;
    o.kind = NodeKind::object;
    o.x = rng.uniform(0.0, area_side_m);
    o.y = rng.uniform(0.0, area_side_m);
    o.cpu_capacity_ghz = kObjectCpuGhz;
    o.cpu_max_power_w = kObjectCpuMaxW;
    o.can_host_vm = false;
    t.objects.push_back(o);
  }

  t.relays.reserve(static_cast<std::size_t>(grid.rows) * grid.cols);
  for (int r = 0; r < grid.rows; ++r)
    for (int c = 0; c < grid.cols; ++c) {
      Node n;
      n.id = r * grid.cols + c;
      n.kind = NodeKind::relay;
      n.x = off_x + c * grid.pitch_m;
      n.y = off_y + r * grid.pitch_m;
      n.cpu_capacity_ghz = kRelayCpuGhz;
      n.cpu_max_power_w = kRelayCpuMaxW;
      n.can_host_vm = true;
      t.relays.push_back(n);
    }

  detail::fill_distances(t);
  detail::fill_home_relays(t);
  const double radius =
      grid.adjacency_radius_m > 0 ? grid.adjacency_radius_m : grid.pitch_m;
  detail::fill_relay_adjacency(t, radius);
  if (!detail::relay_graph_connected(t))
    throw ConfigError("relay graph is disconnected at adjacency radius " +
                      format_double(radius));
  return t;
}

}  // namespace eevipn
