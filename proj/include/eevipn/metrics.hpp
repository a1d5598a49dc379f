#pragma once

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "eevipn/assignment.hpp"
#include "eevipn/instance.hpp"
#include "eevipn/power.hpp"

namespace eevipn {

/// One evaluated run: scenario, task weight, seed, serving and power totals,
/// per-task served counts, and the mean utilization of open VMs.
struct MetricsRow {
  std::string scenario;
  double f = 0;
  std::uint64_t seed = 0;
  long served = 0;
  long total_requests = 0;
  double served_pct = 0;
  double proc_objects_w = 0;
  double proc_relays_w = 0;
  double traffic_objects_w = 0;
  double traffic_relays_w = 0;
  double total_w = 0;
  double vm_utilization_pct = 0;
  std::vector<long> served_per_task;
};

inline MetricsRow make_metrics_row(const Instance& ins, const Assignment& a,
                                   const FlowSet& flows, std::uint64_t seed) {
  MetricsRow row;
  row.scenario = to_string(ins.scenario);
  row.f = ins.params.task_weight;
  row.seed = seed;
  row.served = static_cast<long>(a.serves.size());
  row.total_requests = ins.requests.total();
  row.served_pct = row.total_requests > 0
                       ? 100.0 * static_cast<double>(row.served) / row.total_requests
                       : 0.0;
  const PowerReport power = total_power(ins, a, flows);
  row.proc_objects_w = power.processing_objects_w();
  row.proc_relays_w = power.processing_relays_w();
  row.traffic_objects_w = power.traffic_objects_w();
  row.traffic_relays_w = power.traffic_relays_w();
  row.total_w = power.total_w();
  row.served_per_task.assign(ins.n_tasks(), 0);
  for (const ServeTriple& s : a.serves) ++row.served_per_task[s.task];
  if (!a.open_vms.empty()) {
    std::vector<double> load(ins.n_relays(), 0.0);
    for (const ServeTriple& s : a.serves)
      if (s.server.is_relay()) load[s.server.id] += ins.tasks[s.task].workload_ghz;
    double util = 0;
    for (int r : a.open_vms)
      util += load[r] / ins.topology.relays[r].cpu_capacity_ghz * 100.0;
    row.vm_utilization_pct = util / static_cast<double>(a.open_vms.size());
  }
  return row;
}

// metrics.csv schema (frozen, one row per run):
//   scenario,f,seed,served,total_requests,served_pct,proc_objects_w,
//   proc_relays_w,traffic_objects_w,traffic_relays_w,total_w,
//   vm_utilization_pct,served_k1,...,served_kN
inline void write_metrics_csv(const std::vector<MetricsRow>& rows, std::ostream& os) {
  const std::size_t n_tasks = rows.empty() ? 0 : rows.front().served_per_task.size();
  os << "scenario,f,seed,served,total_requests,served_pct,proc_objects_w,"
        "proc_relays_w,traffic_objects_w,traffic_relays_w,total_w,vm_utilization_pct";
  for (std::size_t t = 0; t < n_tasks; ++t) os << ",served_k" << (t + 1);
  os << '\n';
  for (const MetricsRow& r : rows) {
    os << r.scenario << ',' << format_double(r.f) << ',' << r.seed << ',' << r.served
       << ',' << r.total_requests << ',' << format_double(r.served_pct) << ','
       << format_double(r.proc_objects_w) << ',' << format_double(r.proc_relays_w)
       << ',' << format_double(r.traffic_objects_w) << ','
       << format_double(r.traffic_relays_w) << ',' << format_double(r.total_w) << ','
       << format_double(r.vm_utilization_pct);
    for (long v : r.served_per_task) os << ',' << v;
    os << '\n';
  }
}

inline std::vector<MetricsRow> read_metrics_csv(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw ConfigError("metrics csv: empty input");
  std::vector<std::string> cols;
  {
    std::istringstream hs(header);
    std::string c;
    while (std::getline(hs, c, ',')) cols.push_back(c);
  }
  const std::vector<std::string> fixed{
      "scenario", "f", "seed", "served", "total_requests", "served_pct",
      "proc_objects_w", "proc_relays_w", "traffic_objects_w", "traffic_relays_w",
      "total_w", "vm_utilization_pct"};
  if (cols.size() < fixed.size())
    throw ConfigError("metrics csv: unexpected header");
  for (std::size_t i = 0; i < fixed.size(); ++i)
    if (cols[i] != fixed[i]) throw ConfigError("metrics csv: unexpected header");

  std::vector<MetricsRow> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<std::string> cells;
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != cols.size())
      throw ConfigError("metrics csv: row width does not match header");
    MetricsRow r;
    r.scenario = cells[0];
    r.f = std::stod(cells[1]);
    r.seed = std::stoull(cells[2]);
    r.served = std::stol(cells[3]);
    r.total_requests = std::stol(cells[4]);
    r.served_pct = std::stod(cells[5]);
    r.proc_objects_w = std::stod(cells[6]);
    r.proc_relays_w = std::stod(cells[7]);
    r.traffic_objects_w = std::stod(cells[8]);
    r.traffic_relays_w = std::stod(cells[9]);
    r.total_w = std::stod(cells[10]);
    r.vm_utilization_pct = std::stod(cells[11]);
    for (std::size_t i = fixed.size(); i < cells.size(); ++i)
      r.served_per_task.push_back(std::stol(cells[i]));
    rows.push_back(std::move(r));
  }
  return rows;
}

/// Power saving and serving deltas of each scenario against the hybrid
/// baseline with the same task weight and seed.
struct SavingsRow {
  double f = 0;
  std::uint64_t seed = 0;
  std::string scenario;
  long served = 0;
  double served_pct = 0;
  double total_w = 0;
  long hybrid_served = 0;
  double hybrid_served_pct = 0;
  double hybrid_total_w = 0;
  double power_saving_pct = 0;
  long served_delta = 0;  // served - hybrid_served
};

struct SavingsSummary {
  std::string scenario;
  long runs = 0;
  double mean_power_saving_pct = 0;
  double mean_served_pct = 0;
  double mean_hybrid_served_pct = 0;
};

struct SavingsTable {
  std::vector<SavingsRow> rows;
  std::vector<SavingsSummary> summary;
};

inline SavingsTable compare_scenarios(const std::vector<MetricsRow>& rows) {
  std::map<std::pair<double, std::uint64_t>, const MetricsRow*> hybrid;
  for (const MetricsRow& r : rows)
    if (r.scenario == "hybrid") hybrid[{r.f, r.seed}] = &r;

  SavingsTable out;
  std::map<std::string, SavingsSummary> agg;
  for (const MetricsRow& r : rows) {
    if (r.scenario == "hybrid") continue;
    auto it = hybrid.find({r.f, r.seed});
    if (it == hybrid.end())
      throw ConfigError("compare: no hybrid baseline for f=" + format_double(r.f) +
                        " seed=" + format_int(static_cast<long long>(r.seed)));
    const MetricsRow& h = *it->second;
    SavingsRow s;
    s.f = r.f;
    s.seed = r.seed;
    s.scenario = r.scenario;
    s.served = r.served;
    s.served_pct = r.total_requests > 0
                       ? 100.0 * static_cast<double>(r.served) / r.total_requests
                       : 0.0;
    s.total_w = r.total_w;
    s.hybrid_served = h.served;
    s.hybrid_served_pct = h.total_requests > 0
                              ? 100.0 * static_cast<double>(h.served) / h.total_requests
                              : 0.0;
    s.hybrid_total_w = h.total_w;
    s.power_saving_pct =
        h.total_w > 0 ? (h.total_w - r.total_w) / h.total_w * 100.0 : 0.0;
    s.served_delta = r.served - h.served;
    out.rows.push_back(s);

    SavingsSummary& a = agg[r.scenario];
    a.scenario = r.scenario;
    ++a.runs;
    a.mean_power_saving_pct += s.power_saving_pct;
    a.mean_served_pct += s.served_pct;
    a.mean_hybrid_served_pct += s.hybrid_served_pct;
  }
  for (auto& [name, a] : agg) {
    a.mean_power_saving_pct /= a.runs;
    a.mean_served_pct /= a.runs;
    a.mean_hybrid_served_pct /= a.runs;
    out.summary.push_back(a);
  }
  return out;
}

inline void write_savings_csv(const SavingsTable& table, std::ostream& os) {
  os << "f,seed,scenario,served,served_pct,total_w,hybrid_served,hybrid_served_pct,"
        "hybrid_total_w,power_saving_pct,served_delta\n";
  for (const SavingsRow& r : table.rows)
    os << format_double(r.f) << ',' << r.seed << ',' << r.scenario << ',' << r.served
       << ',' << format_double(r.served_pct) << ',' << format_double(r.total_w) << ','
       << r.hybrid_served << ',' << format_double(r.hybrid_served_pct) << ','
       << format_double(r.hybrid_total_w) << ',' << format_double(r.power_saving_pct)
       << ',' << r.served_delta << '\n';
}

inline void write_savings_summary_csv(const SavingsTable& table, std::ostream& os) {
  os << "scenario,runs,mean_power_saving_pct,mean_served_pct,mean_hybrid_served_pct\n";
  for (const SavingsSummary& s : table.summary)
    os << s.scenario << ',' << s.runs << ',' << format_double(s.mean_power_saving_pct)
       << ',' << format_double(s.mean_served_pct) << ','
       << format_double(s.mean_hybrid_served_pct) << '\n';
}

/// Per-seed mean/stdev aggregation of the headline metrics per (scenario, f).
inline void write_summary_csv(const std::vector<MetricsRow>& rows, std::ostream& os) {
  struct Acc {
    long n = 0;
    double served = 0, served2 = 0, pct = 0, pct2 = 0, w = 0, w2 = 0;
    double po = 0, pr = 0, to = 0, tr = 0;
  };
  std::map<std::pair<std::string, double>, Acc> acc;
  for (const MetricsRow& r : rows) {
    Acc& a = acc[{r.scenario, r.f}];
    ++a.n;
    a.served += r.served;
    a.served2 += static_cast<double>(r.served) * r.served;
    a.pct += r.served_pct;
    a.pct2 += r.served_pct * r.served_pct;
    a.w += r.total_w;
    a.w2 += r.total_w * r.total_w;
    a.po += r.proc_objects_w;
    a.pr += r.proc_relays_w;
    a.to += r.traffic_objects_w;
    a.tr += r.traffic_relays_w;
  }
  auto stdev = [](double sum, double sum2, long n) {
    if (n < 2) return 0.0;
    const double mean = sum / n;
    return std::sqrt(std::max(0.0, sum2 / n - mean * mean));
  };
  os << "scenario,f,seeds,served_mean,served_std,served_pct_mean,served_pct_std,"
        "proc_objects_w_mean,proc_relays_w_mean,traffic_objects_w_mean,"
        "traffic_relays_w_mean,total_w_mean,total_w_std\n";
  for (const auto& [key, a] : acc) {
    os << key.first << ',' << format_double(key.second) << ',' << a.n << ','
       << format_double(a.served / a.n) << ',' << format_double(stdev(a.served, a.served2, a.n))
       << ',' << format_double(a.pct / a.n) << ',' << format_double(stdev(a.pct, a.pct2, a.n))
       << ',' << format_double(a.po / a.n) << ',' << format_double(a.pr / a.n) << ','
       << format_double(a.to / a.n) << ',' << format_double(a.tr / a.n) << ','
       << format_double(a.w / a.n) << ',' << format_double(stdev(a.w, a.w2, a.n)) << '\n';
  }
}

/// Plot-data emission, one file per figure-style view: power and serving
/// versus task weight (fig3..fig7) and versus served percentage (fig9..fig12).
inline std::map<std::string, std::string> figure_csvs(const std::vector<MetricsRow>& rows) {
  auto emit = [&](const std::string& header, auto cell) {
    std::ostringstream os;
    os << header << '\n';
    for (const MetricsRow& r : rows) cell(os, r);
    return os.str();
  };
  std::map<std::string, std::string> out;
  out["fig3.csv"] = emit("f,scenario,seed,processing_w", [](std::ostream& os, const MetricsRow& r) {
    os << format_double(r.f) << ',' << r.scenario << ',' << r.seed << ','
       << format_double(r.proc_objects_w + r.proc_relays_w) << '\n';
  });
  out["fig4.csv"] = emit("f,scenario,seed,processing_objects_w", [](std::ostream& os, const MetricsRow& r) {
    os << format_double(r.f) << ',' << r.scenario << ',' << r.seed << ','
       << format_double(r.proc_objects_w) << '\n';
  });
  out["fig5.csv"] = emit("f,scenario,seed,served_pct", [](std::ostream& os, const MetricsRow& r) {
    os << format_double(r.f) << ',' << r.scenario << ',' << r.seed << ','
       << format_double(r.served_pct) << '\n';
  });
  out["fig6.csv"] = emit("f,scenario,seed,processing_relays_w", [](std::ostream& os, const MetricsRow& r) {
    os << format_double(r.f) << ',' << r.scenario << ',' << r.seed << ','
       << format_double(r.proc_relays_w) << '\n';
  });
  out["fig7.csv"] = emit("f,scenario,seed,traffic_objects_w,traffic_relays_w",
                         [](std::ostream& os, const MetricsRow& r) {
    os << format_double(r.f) << ',' << r.scenario << ',' << r.seed << ','
       << format_double(r.traffic_objects_w) << ',' << format_double(r.traffic_relays_w)
       << '\n';
  });
  out["fig9.csv"] = emit("served_pct,scenario,seed,total_w", [](std::ostream& os, const MetricsRow& r) {
    os << format_double(r.served_pct) << ',' << r.scenario << ',' << r.seed << ','
       << format_double(r.total_w) << '\n';
  });
  out["fig10.csv"] = emit("served_pct,scenario,seed,processing_objects_w",
                          [](std::ostream& os, const MetricsRow& r) {
    os << format_double(r.served_pct) << ',' << r.scenario << ',' << r.seed << ','
       << format_double(r.proc_objects_w) << '\n';
  });
  out["fig11.csv"] = emit("served_pct,scenario,seed,vm_utilization_pct",
                          [](std::ostream& os, const MetricsRow& r) {
    os << format_double(r.served_pct) << ',' << r.scenario << ',' << r.seed << ','
       << format_double(r.vm_utilization_pct) << '\n';
  });
  out["fig12.csv"] = emit("served_pct,scenario,seed,traffic_relays_w",
                          [](std::ostream& os, const MetricsRow& r) {
    os << format_double(r.served_pct) << ',' << r.scenario << ',' << r.seed << ','
       << format_double(r.traffic_relays_w) << '\n';
  });
  return out;
}

}  // namespace eevipn
