#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "eevipn/heuristic.hpp"
#include "eevipn/json_io.hpp"
#include "eevipn/metrics.hpp"
#include "test_util.hpp"

using namespace eevipn;

namespace {

MetricsRow bare_row(const std::string& scenario, double f, long served,
                    long total, double total_w) {
  MetricsRow r;
  r.scenario = scenario;
  r.f = f;
  r.seed = 1;
  r.served = served;
  r.total_requests = total;
  r.served_pct = total > 0 ? 100.0 * static_cast<double>(served) / total : 0.0;
  r.total_w = total_w;
  r.served_per_task.assign(10, 0);
  return r;
}

}  // namespace

TEST_CASE("metrics row from a run") {
  const Instance ins = make_default_instance(7, Scenario::hybrid, 1.8);
  const HeuristicResult res = run_heuristic(ins);
  const MetricsRow row = make_metrics_row(ins, res.assignment, res.flows, 7);
  CHECK(row.scenario == "hybrid");
  CHECK(row.total_requests == 115);
  CHECK(row.served == static_cast<long>(res.assignment.serves.size()));
  CHECK(row.served_pct ==
        doctest::Approx(100.0 * row.served / 115.0).epsilon(1e-12));
  long per_task_total = 0;
  for (long v : row.served_per_task) per_task_total += v;
  CHECK(per_task_total == row.served);
  CHECK(row.total_w == doctest::Approx(row.proc_objects_w + row.proc_relays_w +
                                       row.traffic_objects_w + row.traffic_relays_w)
                           .epsilon(1e-12));
  CHECK(row.vm_utilization_pct > 0);
}

TEST_CASE("metrics csv: frozen header, byte-stable, round trips") {
  const Instance ins = make_default_instance(3, Scenario::relays_only, 0.9);
  const HeuristicResult res = run_heuristic(ins);
  const MetricsRow row = make_metrics_row(ins, res.assignment, res.flows, 3);

  std::ostringstream a, b;
  write_metrics_csv({row}, a);
  write_metrics_csv({row}, b);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("scenario,f,seed,served,total_requests,served_pct,"
                      "proc_objects_w,proc_relays_w,traffic_objects_w,"
                      "traffic_relays_w,total_w,vm_utilization_pct,served_k1,",
                      0) == 0);

  std::istringstream in(a.str());
  const std::vector<MetricsRow> back = read_metrics_csv(in);
  REQUIRE(back.size() == 1);
  CHECK(back[0].scenario == row.scenario);
  CHECK(back[0].f == row.f);
  CHECK(back[0].served == row.served);
  CHECK(back[0].total_w == row.total_w);  // shortest round-trip decimals
  CHECK(back[0].served_per_task == row.served_per_task);

  std::istringstream bad("nope,this,is,not\n1,2,3,4\n");
  CHECK_THROWS_AS(read_metrics_csv(bad), ConfigError);
}

TEST_CASE("compare_scenarios: full-scale serving percentages") {
  // Served counts 89 / 86 / 33 out of 115 requests.
  std::vector<MetricsRow> rows{bare_row("hybrid", 1.8, 89, 115, 50.0),
                               bare_row("relays_only", 1.8, 86, 115, 46.0),
                               bare_row("objects_only", 1.8, 33, 115, 19.0)};
  const SavingsTable table = compare_scenarios(rows);
  REQUIRE(table.rows.size() == 2);
  for (const SavingsRow& r : table.rows) {
    CHECK(r.hybrid_served_pct == 100.0 * 89 / 115);
    if (r.scenario == "relays_only") {
      CHECK(r.served_pct == 100.0 * 86 / 115);
      CHECK(std::trunc(r.served_pct) == 74.0);
    } else {
      CHECK(r.served_pct == 100.0 * 33 / 115);
      CHECK(std::trunc(r.served_pct) == 28.0);
    }
    CHECK(std::trunc(r.hybrid_served_pct) == 77.0);
  }
}

TEST_CASE("compare_scenarios: saving arithmetic") {
  // Equal power: zero saving. 100 W vs 38 W: 62% saving.
  std::vector<MetricsRow> rows{bare_row("hybrid", 0.9, 10, 20, 100.0),
                               bare_row("relays_only", 0.9, 10, 20, 100.0),
                               bare_row("objects_only", 0.9, 5, 20, 38.0)};
  const SavingsTable table = compare_scenarios(rows);
  for (const SavingsRow& r : table.rows) {
    if (r.scenario == "relays_only") CHECK(r.power_saving_pct == 0.0);
    if (r.scenario == "objects_only") CHECK(r.power_saving_pct == 62.0);
  }
  CHECK(table.rows[0].served_delta == 0);
  CHECK(table.rows[1].served_delta == -5);
}

TEST_CASE("compare_scenarios: averages across the sweep are row means") {
  std::vector<MetricsRow> rows;
  rows.push_back(bare_row("hybrid", 0.5, 10, 20, 100.0));
  rows.push_back(bare_row("objects_only", 0.5, 4, 20, 60.0));  // 40% saving
  rows.push_back(bare_row("hybrid", 1.0, 10, 20, 100.0));
  rows.push_back(bare_row("objects_only", 1.0, 6, 20, 40.0));  // 60% saving
  const SavingsTable table = compare_scenarios(rows);
  REQUIRE(table.summary.size() == 1);
  CHECK(table.summary[0].scenario == "objects_only");
  CHECK(table.summary[0].runs == 2);
  CHECK(table.summary[0].mean_power_saving_pct == doctest::Approx(50.0));
  CHECK(table.summary[0].mean_served_pct == doctest::Approx(25.0));
}

TEST_CASE("compare_scenarios: missing hybrid baseline is a configuration error") {
  std::vector<MetricsRow> rows{bare_row("relays_only", 1.8, 86, 115, 46.0)};
  CHECK_THROWS_AS(compare_scenarios(rows), ConfigError);
}

TEST_CASE("savings csv shapes") {
  std::vector<MetricsRow> rows{bare_row("hybrid", 1.8, 89, 115, 50.0),
                               bare_row("objects_only", 1.8, 33, 115, 19.0)};
  const SavingsTable table = compare_scenarios(rows);
  std::ostringstream os, sum;
  write_savings_csv(table, os);
  write_savings_summary_csv(table, sum);
  CHECK(os.str().rfind("f,seed,scenario,served,served_pct,total_w,hybrid_served,"
                       "hybrid_served_pct,hybrid_total_w,power_saving_pct,"
                       "served_delta\n",
                       0) == 0);
  CHECK(sum.str().rfind("scenario,runs,mean_power_saving_pct,mean_served_pct,"
                        "mean_hybrid_served_pct\n",
                        0) == 0);
  CHECK(os.str().find("objects_only") != std::string::npos);
}

TEST_CASE("summary csv aggregates over seeds") {
  std::vector<MetricsRow> rows;
  MetricsRow a = bare_row("hybrid", 1.8, 80, 115, 40.0);
  MetricsRow b = bare_row("hybrid", 1.8, 90, 115, 60.0);
  b.seed = 2;
  rows = {a, b};
  std::ostringstream os;
  write_summary_csv(rows, os);
  const std::string text = os.str();
  CHECK(text.find("hybrid,1.8,2,85,5,") != std::string::npos);  // mean 85, std 5
}

TEST_CASE("figure csv bundle") {
  const Instance ins = make_default_instance(2, Scenario::hybrid, 1.2);
  const HeuristicResult res = run_heuristic(ins);
  const auto figs = figure_csvs({make_metrics_row(ins, res.assignment, res.flows, 2)});
  REQUIRE(figs.size() == 9);
  CHECK(figs.count("fig3.csv") == 1);
  CHECK(figs.count("fig12.csv") == 1);
  CHECK(figs.at("fig5.csv").rfind("f,scenario,seed,served_pct\n", 0) == 0);
  CHECK(figs.at("fig11.csv").rfind("served_pct,scenario,seed,vm_utilization_pct\n", 0) == 0);
}

TEST_CASE("instance json round trip") {
  const Instance ins = make_default_instance(42, Scenario::hybrid, 1.8);
  const Json j = instance_to_json(ins);
  const Instance back = instance_from_json(j);
  CHECK(back.n_objects() == ins.n_objects());
  CHECK(back.requests.q == ins.requests.q);
  CHECK(back.capability.object_tasks == ins.capability.object_tasks);
  CHECK(back.topology.home_relay == ins.topology.home_relay);
  CHECK(back.topology.relay_neighbors == ins.topology.relay_neighbors);
  CHECK(back.params.vm_budget == ins.params.vm_budget);
  // Serialized form is canonical: dump(parse(dump)) is identical.
  CHECK(instance_to_json(back).dump(2) == j.dump(2));

  Json corrupt = j;
  corrupt.erase("catalog");
  CHECK_THROWS_AS(instance_from_json(corrupt), ConfigError);
}

TEST_CASE("assignment json round trip") {
  Assignment a;
  a.serves = {{3, PeerRef::relay(7), 2}, {0, PeerRef::object(0), 1}};
  a.open_vms = {7, 2};
  a.normalize();
  const Assignment back = assignment_from_json(assignment_to_json(a));
  CHECK(back == a);
  CHECK(assignment_to_json(a)["serves"][0][1] == "o0");

  CHECK_THROWS_AS(assignment_from_json(Json::parse(
                      R"({"serves": [[0, "x1", 1]], "open_vms": []})")),
                  ConfigError);
  CHECK_THROWS_AS(assignment_from_json(Json::parse(
                      R"({"serves": [[0, "r1x", 1]], "open_vms": []})")),
                  ConfigError);
}

TEST_CASE("trace json lines") {
  const Instance ins = make_default_instance(4, Scenario::hybrid, 1.8);
  const HeuristicResult res = run_heuristic(ins);
  std::ostringstream os;
  write_trace_jsonl(res.trace, os);
  std::istringstream in(os.str());
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    const Json j = Json::parse(line);
    CHECK(j.contains("request"));
    CHECK(j.contains("outcome"));
    CHECK(j.contains("candidates"));
    ++lines;
  }
  CHECK(lines == res.trace.size());
  CHECK(lines == static_cast<std::size_t>(ins.requests.total()));
}
