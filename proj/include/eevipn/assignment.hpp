#pragma once

#include <algorithm>
#include <compare>
#include <string>
#include <vector>

#include "eevipn/format.hpp"
#include "eevipn/instance.hpp"

namespace eevipn {

/// A serving peer: either an object or a relay (by its own-kind index).
struct PeerRef {
  NodeKind kind = NodeKind::object;
  int id = 0;

  friend auto operator<=>(const PeerRef&, const PeerRef&) = default;

  static PeerRef object(int id) { return {NodeKind::object, id}; }
  static PeerRef relay(int id) { return {NodeKind::relay, id}; }
  bool is_object() const { return kind == NodeKind::object; }
  bool is_relay() const { return kind == NodeKind::relay; }

  std::string str() const {
    return (is_object() ? "o" : "r") + format_int(id);
  }
};

/// requester `i` has its request for task `task` served by `server`.
/// `i == server` (object) is internal processing.
struct ServeTriple {
  int requester = 0;
  PeerRef server;
  int task = 0;  // task index (0-based); display id is task+1

  friend auto operator<=>(const ServeTriple&, const ServeTriple&) = default;

  bool internal() const {
    return server.is_object() && server.id == requester;
  }
  std::string str() const {
    return "(i" + format_int(requester) + ", " + server.str() + ", k" +
           format_int(task + 1) + ")";
  }
};

/// The decision state: the set of serve triples plus the relays whose VM is
/// open. Kept sorted so two equal assignments compare and serialize equal.
struct Assignment {
  std::vector<ServeTriple> serves;
  std::vector<int> open_vms;  // relay ids, sorted ascending

  void normalize() {
    std::sort(serves.begin(), serves.end());
    std::sort(open_vms.begin(), open_vms.end());
    open_vms.erase(std::unique(open_vms.begin(), open_vms.end()), open_vms.end());
  }

  bool vm_open(int relay) const {
    return std::binary_search(open_vms.begin(), open_vms.end(), relay);
  }

  friend auto operator<=>(const Assignment&, const Assignment&) = default;
};

/// Steady-state link rates implied by an assignment (bit/s).
/// Internal triples contribute to no rate.
struct RateSet {
  std::vector<double> dl_request_bps;  // per peer uid: requests it receives to serve
  std::vector<double> dl_result_bps;   // per object: results of its own requests
  std::vector<double> ul_request_bps;  // per object: requests it sends out
  std::vector<double> ul_result_bps;   // per peer uid: results it sends back
};

namespace detail {

inline void check_triple_shape(const Instance& ins, const ServeTriple& s) {
  if (s.requester < 0 || s.requester >= ins.n_objects())
    throw StructuralError("triple " + s.str() + ": requester out of range");
  if (s.task < 0 || s.task >= ins.n_tasks())
    throw StructuralError("triple " + s.str() + ": task out of range");
  const int limit = s.server.is_object() ? ins.n_objects() : ins.n_relays();
  if (s.server.id < 0 || s.server.id >= limit)
    throw StructuralError("triple " + s.str() + ": server out of range");
}

}  // namespace detail

/// Computes the four rate families from an assignment.
inline RateSet derive_rates(const Instance& ins, const Assignment& a) {
  RateSet r;
  r.dl_request_bps.assign(ins.n_peers(), 0.0);
  r.dl_result_bps.assign(ins.n_objects(), 0.0);
  r.ul_request_bps.assign(ins.n_objects(), 0.0);
  r.ul_result_bps.assign(ins.n_peers(), 0.0);
  for (const ServeTriple& s : a.serves) {
    detail::check_triple_shape(ins, s);
    if (s.internal()) continue;
    const TaskType& k = ins.tasks[s.task];
    const int server_uid = s.server.is_object()
                               ? ins.topology.object_uid(s.server.id)
                               : ins.topology.relay_uid(s.server.id);
    r.dl_request_bps[server_uid] += k.request_bps;
    r.ul_result_bps[server_uid] += k.result_bps;
    r.ul_request_bps[s.requester] += k.request_bps;
    r.dl_result_bps[s.requester] += k.result_bps;
  }
  return r;
}

}  // namespace eevipn
