#pragma once

#include <cmath>
#include <numeric>
#include <ostream>
#include <vector>

#include "eevipn/assignment.hpp"
#include "eevipn/instance.hpp"
#include "eevipn/routing.hpp"
#include "eevipn/validate.hpp"

namespace eevipn {

/// Radio energy to transmit one bit over `distance_m`: electronics plus the
/// free-space amplifier term. Receiving a bit costs `e_elec` alone.
inline double tx_energy_per_bit(double distance_m, const EnergyParams& p) {
  if (distance_m < 0)
    throw std::domain_error("tx_energy_per_bit: negative distance");
  return p.e_elec_j_per_bit + p.epsilon_j_per_bit_m2 * distance_m * distance_m;
}

struct ProcessingPower {
  std::vector<double> objects_w;
  std::vector<double> relays_w;
};

/// CPU power of every peer: assigned workload scaled by the processor's
/// max-power-to-capacity ratio. Refuses overloaded peers; the validator is
/// the place where that is reported as a violation.
inline ProcessingPower processing_power(const Instance& ins, const Assignment& a) {
  ProcessingPower pw;
  pw.objects_w.assign(ins.n_objects(), 0.0);
  pw.relays_w.assign(ins.n_relays(), 0.0);
  std::vector<double> load_obj(ins.n_objects(), 0.0), load_rel(ins.n_relays(), 0.0);
  for (const ServeTriple& s : a.serves) {
    detail::check_triple_shape(ins, s);
    const double w = ins.tasks[s.task].workload_ghz;
    if (s.server.is_object())
      load_obj[s.server.id] += w;
    else
      load_rel[s.server.id] += w;
  }
  for (int j = 0; j < ins.n_objects(); ++j) {
    const Node& n = ins.topology.objects[j];
    if (load_obj[j] > n.cpu_capacity_ghz * (1 + kFeasTol))
      throw ValidationError(
          "object " + format_int(j) + " workload exceeds its processor",
          {{11, "object " + format_int(j), load_obj[j], n.cpu_capacity_ghz}});
    pw.objects_w[j] = load_obj[j] / n.cpu_capacity_ghz * n.cpu_max_power_w;
  }
  for (int r = 0; r < ins.n_relays(); ++r) {
    const Node& n = ins.topology.relays[r];
    if (load_rel[r] > n.cpu_capacity_ghz * (1 + kFeasTol))
      throw ValidationError(
          "relay " + format_int(r) + " workload exceeds its processor",
          {{12, "relay " + format_int(r), load_rel[r], n.cpu_capacity_ghz}});
    pw.relays_w[r] = load_rel[r] / n.cpu_capacity_ghz * n.cpu_max_power_w;
  }
  return pw;
}

/// Radio power of each object: requests and results it uploads to its home
/// relay (distance-dependent), requests and results it receives (electronics
/// only). Internal processing contributes nothing.
inline std::vector<double> object_traffic_power(const Instance& ins,
                                                const Assignment& a) {
  const RateSet r = derive_rates(ins, a);
  const EnergyParams& e = ins.params.energy;
  std::vector<double> out(ins.n_objects(), 0.0);
  for (int i = 0; i < ins.n_objects(); ++i) {
    const double up = tx_energy_per_bit(ins.topology.object_home_distance(i), e);
    out[i] = (r.ul_request_bps[i] + r.ul_result_bps[i]) * up +
             (r.dl_request_bps[i] + r.dl_result_bps[i]) * e.e_elec_j_per_bit;
  }
  return out;
}

/// The eight traffic power terms of one relay, kept separate so tests can
/// look at each group. Send terms pay distance, receive terms pay
/// electronics only.
struct RelayTrafficTerms {
  double send_request_relay = 0;   // forwarded request flows to neighbors
  double send_result_relay = 0;    // forwarded result flows to neighbors
  double send_request_object = 0;  // requests delivered to attached serving objects
  double send_result_object = 0;   // results delivered to attached requesters
  double recv_request_relay = 0;   // request flows arriving from neighbors
  double recv_result_relay = 0;    // result flows arriving from neighbors
  double recv_request_object = 0;  // request uploads from attached objects
  double recv_result_object = 0;   // result uploads from attached objects

  double total() const {
    return send_request_relay + send_result_relay + send_request_object +
           send_result_object + recv_request_relay + recv_result_relay +
           recv_request_object + recv_result_object;
  }
};

namespace detail {

inline void check_flow_consistency(const Instance& ins, const Assignment& a,
                                   const FlowSet& f) {
  std::map<std::pair<int, int>, double> want_q, want_s;
  for (const ServeTriple& s : a.serves) {
    if (s.internal()) continue;
    const int x = ins.topology.home_relay[s.requester];
    const int y = s.server.is_relay() ? s.server.id
                                      : ins.topology.home_relay[s.server.id];
    if (x == y) continue;
    want_q[{x, y}] += ins.tasks[s.task].request_bps;
    want_s[{y, x}] += ins.tasks[s.task].result_bps;
  }
  auto compare = [](const std::map<std::pair<int, int>, double>& want,
                    const std::map<std::pair<int, int>, double>& got,
                    const char* kind) {
    auto get = [](const std::map<std::pair<int, int>, double>& m,
                  std::pair<int, int> k) {
      auto it = m.find(k);
      return it == m.end() ? 0.0 : it->second;
    };
    for (const auto& [key, bps] : want)
      if (std::abs(get(got, key) - bps) > 1e-6 * std::max(1.0, bps))
        throw StructuralError(std::string("flow set does not match assignment: ") +
                              kind + " demand (" + format_int(key.first) + "->" +
                              format_int(key.second) + ")");
    for (const auto& [key, bps] : got)
      if (std::abs(get(want, key) - bps) > 1e-6 * std::max(1.0, bps))
        throw StructuralError(std::string("flow set does not match assignment: ") +
                              kind + " demand (" + format_int(key.first) + "->" +
                              format_int(key.second) + ")");
  };
  compare(want_q, f.demand_q, "request");
  compare(want_s, f.demand_s, "result");
}

}  // namespace detail

/// Radio power of each relay from the routed flows plus the up/down legs to
/// its attached objects.
inline std::vector<RelayTrafficTerms> relay_traffic_power(const Instance& ins,
                                                          const Assignment& a,
                                                          const FlowSet& f) {
  detail::check_flow_consistency(ins, a, f);
  const Topology& topo = ins.topology;
  const EnergyParams& e = ins.params.energy;
  const RateSet rates = derive_rates(ins, a);
  std::vector<RelayTrafficTerms> out(ins.n_relays());

  for (const auto& [key, bps] : f.agg_q) {
    const auto [a_, b_] = key;
    out[a_].send_request_relay += bps * tx_energy_per_bit(topo.relay_distance(a_, b_), e);
    out[b_].recv_request_relay += bps * e.e_elec_j_per_bit;
  }
  for (const auto& [key, bps] : f.agg_s) {
    const auto [a_, b_] = key;
    out[a_].send_result_relay += bps * tx_energy_per_bit(topo.relay_distance(a_, b_), e);
    out[b_].recv_result_relay += bps * e.e_elec_j_per_bit;
  }
  for (int i = 0; i < ins.n_objects(); ++i) {
    const int g = topo.home_relay[i];
    const double d = topo.object_relay_distance(i, g);
    out[g].send_request_object += rates.dl_request_bps[i] * tx_energy_per_bit(d, e);
    out[g].send_result_object += rates.dl_result_bps[i] * tx_energy_per_bit(d, e);
    out[g].recv_request_object += rates.ul_request_bps[i] * e.e_elec_j_per_bit;
    out[g].recv_result_object += rates.ul_result_bps[i] * e.e_elec_j_per_bit;
  }
  return out;
}

/// Full power accounting for an assignment and its routed flows.
struct PowerReport {
  Scenario scenario = Scenario::hybrid;
  std::vector<double> object_processing_w;
  std::vector<double> relay_processing_w;
  std::vector<double> object_traffic_w;
  std::vector<RelayTrafficTerms> relay_traffic;

  double processing_objects_w() const {
    return std::accumulate(object_processing_w.begin(), object_processing_w.end(), 0.0);
  }
  double processing_relays_w() const {
    return std::accumulate(relay_processing_w.begin(), relay_processing_w.end(), 0.0);
  }
  double traffic_objects_w() const {
    return std::accumulate(object_traffic_w.begin(), object_traffic_w.end(), 0.0);
  }
  double traffic_relays_w() const {
    double s = 0;
    for (const RelayTrafficTerms& t : relay_traffic) s += t.total();
    return s;
  }
  double total_w() const {
    return processing_objects_w() + processing_relays_w() + traffic_objects_w() +
           traffic_relays_w();
  }
};

inline PowerReport total_power(const Instance& ins, const Assignment& a,
                               const FlowSet& f) {
  PowerReport rep;
  rep.scenario = ins.scenario;
  ProcessingPower proc = processing_power(ins, a);
  rep.object_processing_w = std::move(proc.objects_w);
  rep.relay_processing_w = std::move(proc.relays_w);
  rep.object_traffic_w = object_traffic_power(ins, a);
  rep.relay_traffic = relay_traffic_power(ins, a, f);
  return rep;
}

/// Per-node CSV in microwatts: node,kind,processing_uw,traffic_uw.
inline void write_power_csv(const PowerReport& rep, std::ostream& os) {
  os << "node,kind,processing_uw,traffic_uw\n";
  for (std::size_t i = 0; i < rep.object_processing_w.size(); ++i)
    os << 'o' << i << ",object," << format_double(rep.object_processing_w[i] * 1e6)
       << ',' << format_double(rep.object_traffic_w[i] * 1e6) << '\n';
  for (std::size_t r = 0; r < rep.relay_processing_w.size(); ++r)
    os << 'r' << r << ",relay," << format_double(rep.relay_processing_w[r] * 1e6)
       << ',' << format_double(rep.relay_traffic[r].total() * 1e6) << '\n';
}

}  // namespace eevipn
