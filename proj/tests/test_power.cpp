#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "eevipn/power.hpp"
#include "eevipn/routing.hpp"
#include "test_util.hpp"

using namespace eevipn;

namespace {

constexpr double kRel = 1e-12;

Instance two_relay_instance(double obj0_x, Scenario scenario = Scenario::hybrid) {
  // Relays at x=6 and x=12 (one hop apart), object 0 near relay 0.
  Topology topo = testutil::manual_topology({{obj0_x, 6.0}, {11.0, 6.0}},
                                            GridSpec{1, 2, 6.0, 6.0, 6.0}, 30.0);
  auto tasks = default_task_catalog();
  RequestMatrix q(2, 10);
  for (int i = 0; i < 2; ++i)
    for (int t = 0; t < 10; ++t) q.set(i, t, true);
  InstanceParams p;
  p.vm_budget = 2;
  return make_instance(std::move(topo), std::move(tasks), std::move(q),
                       testutil::caps_all(2, 10), scenario, p);
}

Assignment with_vms(std::vector<ServeTriple> serves, std::vector<int> vms) {
  Assignment a;
  a.serves = std::move(serves);
  a.open_vms = std::move(vms);
  a.normalize();
  return a;
}

}  // namespace

TEST_CASE("tx_energy_per_bit") {
  const EnergyParams e;
  CHECK(tx_energy_per_bit(0.0, e) == 50e-9);
  CHECK(tx_energy_per_bit(6.0, e) ==
        doctest::Approx(50e-9 + 255e-12 * 36.0).epsilon(kRel));
  CHECK(tx_energy_per_bit(30.0, e) ==
        doctest::Approx(50e-9 + 255e-12 * 900.0).epsilon(kRel));
  CHECK_THROWS_AS(tx_energy_per_bit(-1.0, e), std::domain_error);
}

TEST_CASE("processing power: single tasks and exact full load") {
  const Instance ins = two_relay_instance(5.0);

  // Object serving one task-1 request.
  auto pw = processing_power(ins, with_vms({{0, PeerRef::object(0), 0}}, {}));
  CHECK(pw.objects_w[0] == doctest::Approx(0.01 / 0.032 * 0.347).epsilon(kRel));
  CHECK(pw.objects_w[1] == 0.0);
  CHECK(pw.relays_w[0] == 0.0);

  // Relay serving one task-10 request.
  pw = processing_power(ins, with_vms({{0, PeerRef::relay(0), 9}}, {0}));
  CHECK(pw.relays_w[0] == doctest::Approx(0.5 / 1.2 * 3.7).epsilon(kRel));

  // Relay loaded to exactly 1.2 GHz draws its CPU maximum.
  pw = processing_power(ins, with_vms({{0, PeerRef::relay(0), 9},
                                       {0, PeerRef::relay(0), 8},
                                       {1, PeerRef::relay(0), 6},
                                       {1, PeerRef::relay(0), 5}},
                                      {0}));
  CHECK(pw.relays_w[0] == doctest::Approx(3.7).epsilon(1e-9));

  // Overload refuses.
  CHECK_THROWS_AS(processing_power(ins, with_vms({{0, PeerRef::object(0), 4}}, {})),
                  ValidationError);
}

TEST_CASE("object traffic power: request out, result back") {
  // Object 0 at 2 m from its home relay; one external task-1 request.
  const Instance ins = two_relay_instance(4.0);
  REQUIRE(ins.topology.object_home_distance(0) == doctest::Approx(2.0).epsilon(kRel));

  auto otp = object_traffic_power(ins, with_vms({{0, PeerRef::relay(0), 0}}, {0}));
  const double expected = 250.0 * (50e-9 + 255e-12 * 4.0) + 25.0 * 50e-9;
  CHECK(otp[0] == doctest::Approx(expected).epsilon(kRel));
  CHECK(otp[0] == doctest::Approx(14.005e-6).epsilon(1e-9));

  // Pure internal processing: no traffic power at all.
  otp = object_traffic_power(ins, with_vms({{0, PeerRef::object(0), 0}}, {}));
  CHECK(otp[0] == 0.0);
}

TEST_CASE("object traffic power: serving a peer") {
  // Server object at 3 m from its home relay serves one task-2 request
  // (500 b/s in, 100 b/s result out).
  Topology topo = testutil::manual_topology({{9.0, 6.0}, {6.0, 9.0}},
                                            GridSpec{1, 2, 6.0, 6.0, 6.0}, 30.0);
  auto tasks = default_task_catalog();
  RequestMatrix q(2, 10);
  q.set(0, 1, true);
  InstanceParams p;
  p.vm_budget = 0;
  const Instance ins = make_instance(std::move(topo), std::move(tasks), std::move(q),
                                     testutil::caps_all(2, 10), Scenario::hybrid, p);
  REQUIRE(ins.topology.object_home_distance(1) == doctest::Approx(3.0).epsilon(kRel));

  const auto otp = object_traffic_power(ins, with_vms({{0, PeerRef::object(1), 1}}, {}));
  const double expected = 500.0 * 50e-9 + 100.0 * (50e-9 + 255e-12 * 9.0);
  CHECK(otp[1] == doctest::Approx(expected).epsilon(kRel));
  CHECK(otp[1] == doctest::Approx(30.2295e-6).epsilon(1e-9));
}

TEST_CASE("relay traffic power: eight-term trace on a two-relay instance") {
  // Object 0 at 2 m from relay 0; request task 1 served by the VM on the
  // adjacent relay 1 (6 m away).
  const Instance ins = two_relay_instance(4.0);
  const Assignment a = with_vms({{0, PeerRef::relay(1), 0}}, {0, 1});
  const FlowSet f = build_flows(ins, a);

  const auto terms = relay_traffic_power(ins, a, f);
  const RelayTrafficTerms& r0 = terms[0];
  CHECK(r0.recv_request_object == doctest::Approx(250.0 * 50e-9).epsilon(kRel));
  CHECK(r0.send_request_relay ==
        doctest::Approx(250.0 * (50e-9 + 255e-12 * 36.0)).epsilon(kRel));
  CHECK(r0.recv_result_relay == doctest::Approx(25.0 * 50e-9).epsilon(kRel));
  CHECK(r0.send_result_object ==
        doctest::Approx(25.0 * (50e-9 + 255e-12 * 4.0)).epsilon(kRel));
  CHECK(r0.send_request_object == 0.0);
  CHECK(r0.recv_request_relay == 0.0);
  CHECK(r0.send_result_relay == 0.0);
  CHECK(r0.recv_result_object == 0.0);
  CHECK(r0.total() == doctest::Approx(29.8205e-6).epsilon(1e-9));

  // Relay 1 terminates the request and originates the result.
  const RelayTrafficTerms& r1 = terms[1];
  CHECK(r1.recv_request_relay == doctest::Approx(250.0 * 50e-9).epsilon(kRel));
  CHECK(r1.send_result_relay ==
        doctest::Approx(25.0 * (50e-9 + 255e-12 * 36.0)).epsilon(kRel));
  CHECK(r1.recv_request_object == 0.0);
  CHECK(r1.send_result_object == 0.0);
}

TEST_CASE("relay traffic power: home-relay VM needs only the object legs") {
  const Instance ins = two_relay_instance(4.0);
  const Assignment a = with_vms({{0, PeerRef::relay(0), 0}}, {0});
  const FlowSet f = build_flows(ins, a);
  CHECK(f.empty());

  const auto terms = relay_traffic_power(ins, a, f);
  const RelayTrafficTerms& r0 = terms[0];
  CHECK(r0.recv_request_object == doctest::Approx(250.0 * 50e-9).epsilon(kRel));
  CHECK(r0.send_result_object ==
        doctest::Approx(25.0 * (50e-9 + 255e-12 * 4.0)).epsilon(kRel));
  CHECK(r0.send_request_relay == 0.0);
  CHECK(r0.send_request_object == 0.0);
  CHECK(r0.recv_request_relay == 0.0);
  CHECK(r0.recv_result_relay == 0.0);
  CHECK(terms[1].total() == 0.0);
}

TEST_CASE("no assignments, no power") {
  const Instance ins = two_relay_instance(5.0);
  const Assignment a = with_vms({}, {0, 1});
  const PowerReport rep = total_power(ins, a, build_flows(ins, a));
  CHECK(rep.total_w() == 0.0);
}

TEST_CASE("flow set inconsistent with the assignment is refused") {
  const Instance ins = two_relay_instance(4.0);
  const Assignment a = with_vms({{0, PeerRef::relay(1), 0}}, {0, 1});
  FlowSet f = build_flows(ins, a);
  f.demand_q[{0, 1}] += 100.0;
  CHECK_THROWS_AS(relay_traffic_power(ins, a, f), StructuralError);
}

TEST_CASE("power linearity and monotonicity over assignment growth") {
  const Instance ins = two_relay_instance(5.0);
  const Assignment small = with_vms({{0, PeerRef::relay(1), 0}}, {0, 1});
  const Assignment big = with_vms({{0, PeerRef::relay(1), 0},
                                   {1, PeerRef::relay(0), 3},
                                   {0, PeerRef::object(0), 1}},
                                  {0, 1});
  const double p_small = total_power(ins, small, build_flows(ins, small)).total_w();
  const double p_big = total_power(ins, big, build_flows(ins, big)).total_w();
  CHECK(p_big > p_small);

  // Server-disjoint, edge-disjoint pieces add up.
  const Assignment a1 = with_vms({{0, PeerRef::relay(0), 0}}, {0, 1});
  const Assignment a2 = with_vms({{1, PeerRef::relay(1), 3}}, {0, 1});
  Assignment both = a1;
  both.serves.insert(both.serves.end(), a2.serves.begin(), a2.serves.end());
  both.normalize();
  const double p1 = total_power(ins, a1, build_flows(ins, a1)).total_w();
  const double p2 = total_power(ins, a2, build_flows(ins, a2)).total_w();
  const double pb = total_power(ins, both, build_flows(ins, both)).total_w();
  CHECK(pb == doctest::Approx(p1 + p2).epsilon(1e-12));
}

TEST_CASE("all distances zero reduces traffic power to e_elec * bits") {
  Instance ins = two_relay_instance(6.0);
  // Collapse every node onto one point.
  for (Node& n : ins.topology.objects) { n.x = 6.0; n.y = 6.0; }
  for (Node& n : ins.topology.relays) { n.x = 6.0; n.y = 6.0; }
  detail::fill_distances(ins.topology);
  detail::fill_home_relays(ins.topology);
  detail::fill_relay_adjacency(ins.topology, 6.0);

  const Assignment a = with_vms({{0, PeerRef::relay(1), 0},
                                 {1, PeerRef::object(0), 2},
                                 {0, PeerRef::object(1), 3}},
                                {0, 1});
  const FlowSet f = build_flows(ins, a);
  const PowerReport rep = total_power(ins, a, f);

  // Every sent bit is also received; with zero distances each transfer costs
  // 2 * e_elec per bit per hop.
  double bits_hops = 0;
  for (const ServeTriple& s : a.serves) {
    if (s.internal()) continue;
    const TaskType& k = ins.tasks[s.task];
    const int x = ins.topology.home_relay[s.requester];
    const int y = s.server.is_relay() ? s.server.id
                                      : ins.topology.home_relay[s.server.id];
    int hops = 1;  // object -> home relay
    hops += hop_count(min_hop_path(ins.topology, x, y));
    if (s.server.is_object()) hops += 1;  // relay -> serving object
    bits_hops += (k.request_bps + k.result_bps) * hops;
  }
  const double traffic = rep.traffic_objects_w() + rep.traffic_relays_w();
  CHECK(traffic == doctest::Approx(2 * 50e-9 * bits_hops).epsilon(1e-9));
}

TEST_CASE("per-hop tx and rx bit rates match across the relay fleet") {
  const Instance ins = make_default_instance(3);
  Assignment a;
  // A scatter of feasible-looking relay serves (validity is not the point;
  // power accounting is).
  a.serves = {{0, PeerRef::relay(3), 4},
              {5, PeerRef::relay(11), 6},
              {9, PeerRef::relay(20), 9},
              {14, PeerRef::relay(7), 2}};
  a.open_vms = {3, 7, 11, 20};
  a.normalize();
  const FlowSet f = build_flows(ins, a);
  const auto terms = relay_traffic_power(ins, a, f);

  // Sum of link sends at (e_elec + eps d^2) and receives at e_elec must equal
  // an independent tally over every link.
  double want_send = 0, want_recv = 0;
  const EnergyParams& e = ins.params.energy;
  for (const auto& [key, bps] : f.agg_q) {
    want_send += bps * tx_energy_per_bit(ins.topology.relay_distance(key.first, key.second), e);
    want_recv += bps * e.e_elec_j_per_bit;
  }
  for (const auto& [key, bps] : f.agg_s) {
    want_send += bps * tx_energy_per_bit(ins.topology.relay_distance(key.first, key.second), e);
    want_recv += bps * e.e_elec_j_per_bit;
  }
  double got_send = 0, got_recv = 0;
  for (const auto& t : terms) {
    got_send += t.send_request_relay + t.send_result_relay;
    got_recv += t.recv_request_relay + t.recv_result_relay;
  }
  CHECK(got_send == doctest::Approx(want_send).epsilon(1e-12));
  CHECK(got_recv == doctest::Approx(want_recv).epsilon(1e-12));
}

TEST_CASE("power csv is stable and in microwatts") {
  const Instance ins = two_relay_instance(4.0);
  const Assignment a = with_vms({{0, PeerRef::relay(0), 0}}, {0, 1});
  const PowerReport rep = total_power(ins, a, build_flows(ins, a));
  std::ostringstream os;
  write_power_csv(rep, os);
  const std::string csv = os.str();
  CHECK(csv.rfind("node,kind,processing_uw,traffic_uw\n", 0) == 0);
  CHECK(csv.find("r0,relay,30833.33") != std::string::npos);
}
