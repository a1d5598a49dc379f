// Command-line front end: instance generation, scenario/task-weight sweeps,
// scenario comparison, LP export, model census, and assignment validation.
// Exit codes: 0 ok, 1 validation/solve failure, 2 configuration error.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "eevipn/heuristic.hpp"
#include "eevipn/json_io.hpp"
#include "eevipn/lp_format.hpp"
#include "eevipn/metrics.hpp"
#include "eevipn/milp.hpp"
#include "eevipn/power.hpp"
#include "eevipn/solver.hpp"

namespace fs = std::filesystem;
using namespace eevipn;

namespace {

struct InstanceOptions {
  std::uint64_t seed = 42;
  int objects = 25;
  int grid_rows = 5, grid_cols = 5;
  double grid_pitch = 6.0;
  double adjacency_radius = 0.0;  // 0 = pitch
  double area = 30.0;
  std::string profile;   // comma list, empty = default
  std::string instance_file;
  InstanceParams params;
};

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoull(item));
  return out;
}

Instance build_instance(const InstanceOptions& opt, std::uint64_t seed,
                        Scenario scenario, double task_weight) {
  if (!opt.instance_file.empty()) {
    std::ifstream in(opt.instance_file);
    if (!in) throw ConfigError("cannot open instance file " + opt.instance_file);
    Instance ins = instance_from_json(Json::parse(in));
    ins.scenario = scenario;
    ins.params.task_weight = task_weight;
    return ins;
  }
  GridSpec grid{opt.grid_rows, opt.grid_cols, opt.grid_pitch, -1.0, -1.0,
                opt.adjacency_radius};
  Topology topo = generate_topology(derive_seed(seed, 0), opt.objects, grid, opt.area);
  std::vector<TaskType> tasks = default_task_catalog();
  std::vector<int> profile =
      opt.profile.empty() ? default_request_profile() : parse_int_list(opt.profile);
  RequestMatrix q = generate_requests(derive_seed(seed, 1), topo, tasks, profile);
  Capabilities caps = generate_capabilities(derive_seed(seed, 2), topo, tasks);
  InstanceParams params = opt.params;
  params.task_weight = task_weight;
  return make_instance(std::move(topo), std::move(tasks), std::move(q),
                       std::move(caps), scenario, params);
}

void add_instance_flags(CLI::App* cmd, InstanceOptions& opt) {
  cmd->add_option("--seed", opt.seed, "instance seed");
  cmd->add_option("--objects", opt.objects, "number of objects");
  cmd->add_option("--grid-rows", opt.grid_rows, "relay grid rows");
  cmd->add_option("--grid-cols", opt.grid_cols, "relay grid columns");
  cmd->add_option("--grid-pitch", opt.grid_pitch, "relay grid pitch (m)");
  cmd->add_option("--adjacency-radius", opt.adjacency_radius,
                  "relay adjacency radius (m), 0 = pitch");
  cmd->add_option("--area", opt.area, "square area side (m)");
  cmd->add_option("--profile", opt.profile, "per-task request counts, comma list");
  cmd->add_option("--instance", opt.instance_file, "load the instance from JSON");
  cmd->add_option("--upload-slots", opt.params.upload_slots, "upload slots per object");
  cmd->add_option("--vm-budget", opt.params.vm_budget, "number of VM locations");
  cmd->add_option("--big-m", opt.params.big_m, "VM linking scale factor");
}

fs::path resolve_out_dir(std::string flag_value) {
  if (flag_value.empty())
    if (const char* env = std::getenv("EEVIPN_OUT_DIR")) flag_value = env;
  if (flag_value.empty()) flag_value = ".";
  fs::create_directories(flag_value);
  return flag_value;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
  out.flush();
  if (!out.good()) throw ConfigError("write failed for " + path.string());
}

struct SweepJob {
  Scenario scenario;
  double f;
  std::uint64_t seed;
};

struct SweepOutcome {
  MetricsRow row;
  bool valid = false;
  std::string note;
  std::string trace_jsonl;
  std::string assignment_json;
  std::string flows_csv;
  std::string power_csv;
};

int run_sweep_command(const InstanceOptions& opt, const std::string& seeds_flag,
                      const std::string& scenarios_flag, const std::string& f_flag,
                      const std::string& engine, const std::string& order_mode,
                      const std::string& out_dir_flag, bool figures, bool want_trace,
                      bool want_assignments, bool want_flows, bool want_power,
                      bool force, long max_nodes, double max_seconds) {
  std::vector<std::uint64_t> seeds =
      seeds_flag.empty() ? std::vector<std::uint64_t>{opt.seed}
                         : parse_seed_list(seeds_flag);
  std::vector<Scenario> scenarios;
  {
    std::stringstream ss(scenarios_flag);
    std::string item;
    while (std::getline(ss, item, ',')) scenarios.push_back(scenario_from_string(item));
  }
  const std::vector<double> f_list =
      f_flag.empty() ? task_weight_sweep() : parse_double_list(f_flag);
  if (f_list.empty()) throw ConfigError("task weight list is empty");
  if (scenarios.empty()) throw ConfigError("scenario list is empty");
  if (engine != "heuristic" && engine != "exact" && engine != "export-lp")
    throw ConfigError("unknown engine '" + engine + "'");
  if (order_mode != "ascending" && order_mode != "shuffle")
    throw ConfigError("unknown order '" + order_mode + "'");

  const fs::path out_dir = resolve_out_dir(out_dir_flag);

  if (engine == "exact" && !force) {
    const Instance probe = build_instance(opt, seeds.front(), scenarios.front(),
                                          f_list.front());
    int requested_types = 0;
    for (int t = 0; t < probe.n_tasks(); ++t) {
      for (int i = 0; i < probe.n_objects(); ++i)
        if (probe.requests.at(i, t)) {
          ++requested_types;
          break;
        }
    }
    if (probe.n_objects() > 6 || probe.n_relays() > 6 || requested_types > 4)
      throw ConfigError(
          "the exact engine is sized for at most 6 objects, 6 relays and 4 "
          "requested task types; pass --force to try anyway or use --engine "
          "export-lp");
  }

  if (engine == "export-lp") {
    for (Scenario sc : scenarios)
      for (double f : f_list)
        for (std::uint64_t seed : seeds) {
          const Instance ins = build_instance(opt, seed, sc, f);
          const MilpModel model = build_milp(ins);
          for (const std::string& w : model.warnings) std::cerr << "warning: " << w << '\n';
          std::ostringstream name;
          name << "model_" << to_string(sc) << "_f" << format_double(f) << "_seed"
               << seed << ".lp";
          write_file(out_dir / name.str(), write_lp_string(model));
        }
    std::cout << "wrote LP files to " << out_dir.string() << '\n';
    return 0;
  }

  std::vector<SweepJob> jobs;
  for (Scenario sc : scenarios)
    for (double f : f_list)
      for (std::uint64_t seed : seeds) jobs.push_back({sc, f, seed});

  auto run_job = [&](const SweepJob& job) -> SweepOutcome {
    SweepOutcome out;
    const Instance ins = build_instance(opt, job.seed, job.scenario, job.f);
    Assignment assignment;
    FlowSet flows;
    if (engine == "heuristic") {
      const auto order = order_mode == "shuffle"
                             ? shuffled_order(ins, derive_seed(job.seed, 9))
                             : ascending_order(ins);
      HeuristicResult res = run_heuristic(ins, order);
      assignment = std::move(res.assignment);
      flows = std::move(res.flows);
      if (want_trace) {
        std::ostringstream ts;
        write_trace_jsonl(res.trace, ts);
        out.trace_jsonl = ts.str();
      }
    } else {
      SolveLimits limits;
      limits.max_nodes = max_nodes;
      limits.max_seconds = max_seconds;
      const SolveResult res = solve_exact(build_milp(ins), limits);
      if (res.status != SolveStatus::optimal) {
        out.note = std::string("solver status ") + to_string(res.status);
        if (res.status == SolveStatus::infeasible) return out;
      }
      assignment = res.assignment;
      flows = res.flows;
    }
    const ViolationReport rep = validate(ins, assignment);
    out.valid = rep.empty() && out.note.empty();
    if (!rep.empty()) out.note = "assignment failed validation";
    out.row = make_metrics_row(ins, assignment, flows, job.seed);
    if (want_assignments) out.assignment_json = assignment_to_json(assignment).dump(2) + "\n";
    if (want_flows) {
      std::ostringstream fos;
      write_flows_csv(flows, fos);
      out.flows_csv = fos.str();
    }
    if (want_power) {
      std::ostringstream pos;
      write_power_csv(total_power(ins, assignment, flows), pos);
      out.power_csv = pos.str();
    }
    return out;
  };

  // Jobs are independent; run them concurrently and merge in job order so
  // the output never depends on scheduling.
  std::vector<std::future<SweepOutcome>> futures;
  futures.reserve(jobs.size());
  for (const SweepJob& job : jobs)
    futures.push_back(std::async(std::launch::async, run_job, job));

  std::vector<MetricsRow> rows;
  bool all_valid = true;
  std::ostringstream trace_all;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const SweepOutcome out = futures[i].get();
    if (!out.valid) {
      all_valid = false;
      std::cerr << "run scenario=" << to_string(jobs[i].scenario)
                << " f=" << format_double(jobs[i].f) << " seed=" << jobs[i].seed
                << ": " << (out.note.empty() ? "failed" : out.note) << '\n';
    }
    rows.push_back(out.row);
    trace_all << out.trace_jsonl;
    std::ostringstream stem;
    stem << to_string(jobs[i].scenario) << "_f" << format_double(jobs[i].f) << "_seed"
         << jobs[i].seed;
    if (!out.assignment_json.empty())
      write_file(out_dir / ("assignment_" + stem.str() + ".json"), out.assignment_json);
    if (!out.flows_csv.empty())
      write_file(out_dir / ("flows_" + stem.str() + ".csv"), out.flows_csv);
    if (!out.power_csv.empty())
      write_file(out_dir / ("power_" + stem.str() + ".csv"), out.power_csv);
  }

  {
    std::ostringstream os;
    write_metrics_csv(rows, os);
    write_file(out_dir / "metrics.csv", os.str());
  }
  if (seeds.size() > 1) {
    std::ostringstream os;
    write_summary_csv(rows, os);
    write_file(out_dir / "summary.csv", os.str());
  }
  if (figures)
    for (const auto& [name, content] : figure_csvs(rows))
      write_file(out_dir / name, content);
  if (want_trace && engine == "heuristic")
    write_file(out_dir / "trace.jsonl", trace_all.str());

  std::cout << "wrote " << (out_dir / "metrics.csv").string() << " (" << rows.size()
            << " rows)\n";
  return all_valid ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"energy-efficient P2P IoT task placement toolkit"};
  app.require_subcommand(1);

  // --- gen -------------------------------------------------------------------
  InstanceOptions gen_opt;
  std::string gen_scenario = "hybrid", gen_out;
  double gen_f = 1.8;
  auto* gen = app.add_subcommand("gen", "generate an instance as JSON");
  add_instance_flags(gen, gen_opt);
  gen->add_option("--scenario", gen_scenario, "hybrid | relays_only | objects_only");
  gen->add_option("--task-weight", gen_f, "objective weight per served task");
  gen->add_option("--out", gen_out, "output file (default stdout)");

  // --- sweep -----------------------------------------------------------------
  InstanceOptions sweep_opt;
  std::string sweep_seeds, sweep_scenarios = "hybrid,relays_only,objects_only";
  std::string sweep_f, sweep_engine = "heuristic", sweep_order = "ascending";
  std::string sweep_out_dir, sweep_config;
  bool sweep_figures = false, sweep_trace = false, sweep_force = false;
  bool sweep_assignments = false, sweep_flows = false, sweep_power = false;
  long sweep_nodes = 200000;
  double sweep_seconds = 120.0;
  auto* sweep = app.add_subcommand(
      "sweep", "run scenarios across the task-weight range and emit metrics CSV");
  add_instance_flags(sweep, sweep_opt);
  sweep->add_option("--config", sweep_config, "JSON config file (flags override)");
  sweep->add_option("--seeds", sweep_seeds, "comma list of seeds (multi-seed mode)");
  sweep->add_option("--scenarios", sweep_scenarios, "comma list of scenarios");
  sweep->add_option("--f-list", sweep_f, "comma list of task weights");
  sweep->add_option("--engine", sweep_engine, "heuristic | exact | export-lp");
  sweep->add_option("--order", sweep_order, "heuristic arrival order: ascending | shuffle");
  sweep->add_option("--out-dir", sweep_out_dir,
                    "output directory (or EEVIPN_OUT_DIR, default .)");
  sweep->add_flag("--figures", sweep_figures, "also write fig3..fig12 plot CSVs");
  sweep->add_flag("--trace", sweep_trace, "write the heuristic decision trace");
  sweep->add_flag("--assignments", sweep_assignments, "write each run's assignment JSON");
  sweep->add_flag("--flows", sweep_flows, "write each run's commodity flows CSV");
  sweep->add_flag("--power", sweep_power, "write each run's per-node power CSV");
  sweep->add_flag("--force", sweep_force, "run the exact engine beyond its size guard");
  sweep->add_option("--max-nodes", sweep_nodes, "exact engine node budget");
  sweep->add_option("--max-seconds", sweep_seconds, "exact engine time budget");

  // --- compare ---------------------------------------------------------------
  std::string cmp_metrics, cmp_out_dir;
  auto* cmp = app.add_subcommand("compare",
                                 "power savings and serving deltas against hybrid");
  cmp->add_option("--metrics", cmp_metrics, "metrics.csv from a sweep")->required();
  cmp->add_option("--out-dir", cmp_out_dir, "output directory (default stdout)");

  // --- export-lp ---------------------------------------------------------------
  InstanceOptions lp_opt;
  std::string lp_scenario = "hybrid", lp_out;
  double lp_f = 1.8;
  auto* lp = app.add_subcommand("export-lp", "write the model in LP text form");
  add_instance_flags(lp, lp_opt);
  lp->add_option("--scenario", lp_scenario, "hybrid | relays_only | objects_only");
  lp->add_option("--task-weight", lp_f, "objective weight per served task");
  lp->add_option("--out", lp_out, "output file (default stdout)");

  // --- census ------------------------------------------------------------------
  InstanceOptions census_opt;
  std::string census_scenario = "hybrid";
  double census_f = 1.8;
  auto* cns = app.add_subcommand("census",
                                 "variable/constraint counts of the model as JSON");
  add_instance_flags(cns, census_opt);
  cns->add_option("--scenario", census_scenario, "hybrid | relays_only | objects_only");
  cns->add_option("--task-weight", census_f, "objective weight per served task");

  // --- validate ----------------------------------------------------------------
  std::string val_instance, val_assignment;
  auto* val = app.add_subcommand("validate", "check an assignment against an instance");
  val->add_option("--instance", val_instance, "instance JSON")->required();
  val->add_option("--assignment", val_assignment, "assignment JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const Instance ins = build_instance(gen_opt, gen_opt.seed,
                                          scenario_from_string(gen_scenario), gen_f);
      const std::string text = instance_to_json(ins).dump(2) + "\n";
      if (gen_out.empty())
        std::cout << text;
      else
        write_file(gen_out, text);
      return 0;
    }

    if (*sweep) {
      if (!sweep_config.empty()) {
        std::ifstream in(sweep_config);
        if (!in) throw ConfigError("cannot open config " + sweep_config);
        const Json cfg = Json::parse(in);
        // Flags override the config file: only fill values still at defaults.
        if (cfg.contains("seed") && sweep_opt.seed == 42)
          sweep_opt.seed = cfg["seed"].get<std::uint64_t>();
        if (cfg.contains("objects") && sweep_opt.objects == 25)
          sweep_opt.objects = cfg["objects"].get<int>();
        if (cfg.contains("seeds") && sweep_seeds.empty()) {
          std::string list;
          for (const Json& s : cfg["seeds"])
            list += (list.empty() ? "" : ",") + std::to_string(s.get<std::uint64_t>());
          sweep_seeds = list;
        }
        if (cfg.contains("scenarios") &&
            sweep_scenarios == "hybrid,relays_only,objects_only") {
          std::string list;
          for (const Json& s : cfg["scenarios"])
            list += (list.empty() ? "" : ",") + s.get<std::string>();
          sweep_scenarios = list;
        }
        if (cfg.contains("f_list") && sweep_f.empty()) {
          std::string list;
          for (const Json& f : cfg["f_list"])
            list += (list.empty() ? "" : ",") + format_double(f.get<double>());
          sweep_f = list;
        }
        if (cfg.contains("engine") && sweep_engine == "heuristic")
          sweep_engine = cfg["engine"].get<std::string>();
        if (cfg.contains("order") && sweep_order == "ascending")
          sweep_order = cfg["order"].get<std::string>();
        if (cfg.contains("out_dir") && sweep_out_dir.empty())
          sweep_out_dir = cfg["out_dir"].get<std::string>();
        if (cfg.contains("instance") && sweep_opt.instance_file.empty())
          sweep_opt.instance_file = cfg["instance"].get<std::string>();
      }
      return run_sweep_command(sweep_opt, sweep_seeds, sweep_scenarios, sweep_f,
                               sweep_engine, sweep_order, sweep_out_dir, sweep_figures,
                               sweep_trace, sweep_assignments, sweep_flows, sweep_power,
                               sweep_force, sweep_nodes, sweep_seconds);
    }

    if (*cmp) {
      std::ifstream in(cmp_metrics);
      if (!in) throw ConfigError("cannot open " + cmp_metrics);
      const SavingsTable table = compare_scenarios(read_metrics_csv(in));
      std::ostringstream rows_os, summary_os;
      write_savings_csv(table, rows_os);
      write_savings_summary_csv(table, summary_os);
      if (cmp_out_dir.empty()) {
        std::cout << rows_os.str() << '\n' << summary_os.str();
      } else {
        const fs::path dir = resolve_out_dir(cmp_out_dir);
        write_file(dir / "savings.csv", rows_os.str());
        write_file(dir / "savings_summary.csv", summary_os.str());
        std::cout << "wrote " << (dir / "savings.csv").string() << '\n';
      }
      return 0;
    }

    if (*lp) {
      const Instance ins = build_instance(lp_opt, lp_opt.seed,
                                          scenario_from_string(lp_scenario), lp_f);
      const MilpModel model = build_milp(ins);
      for (const std::string& w : model.warnings) std::cerr << "warning: " << w << '\n';
      if (lp_out.empty())
        write_lp(model, std::cout);
      else
        write_file(lp_out, write_lp_string(model));
      return 0;
    }

    if (*cns) {
      const Instance ins = build_instance(census_opt, census_opt.seed,
                                          scenario_from_string(census_scenario),
                                          census_f);
      const Census c = census(build_milp(ins));
      Json j;
      j["variables"] = c.variables;
      j["constraints"] = c.constraints;
      j["totals"] = {{"variables", c.total_variables},
                     {"constraints", c.total_constraints},
                     {"binaries", c.binaries}};
      std::cout << j.dump(2) << '\n';
      return 0;
    }

    if (*val) {
      std::ifstream ins_in(val_instance), a_in(val_assignment);
      if (!ins_in) throw ConfigError("cannot open " + val_instance);
      if (!a_in) throw ConfigError("cannot open " + val_assignment);
      const Instance ins = instance_from_json(Json::parse(ins_in));
      const Assignment a = assignment_from_json(Json::parse(a_in));
      const ViolationReport rep = validate(ins, a);
      std::cout << violations_to_json(rep).dump(2) << '\n';
      return rep.empty() ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
