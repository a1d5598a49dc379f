#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "eevipn/json_io.hpp"
#include "eevipn/lp_format.hpp"

// End-to-end runs of the installed binary (path injected by the build).

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "eevipn_cli_test";

int run(const std::string& args) {
  const std::string cmd =
      std::string(EEVIPN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct WorkDir {
  WorkDir() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
  }
} work_dir_setup;

}  // namespace

TEST_CASE("gen is deterministic and loadable") {
  const fs::path a = kWork / "a.json", b = kWork / "b.json";
  REQUIRE(run("gen --seed 7 --out " + a.string()) == 0);
  REQUIRE(run("gen --seed 7 --out " + b.string()) == 0);
  CHECK(slurp(a) == slurp(b));
  const eevipn::Instance ins =
      eevipn::instance_from_json(eevipn::Json::parse(slurp(a)));
  CHECK(ins.n_objects() == 25);
  CHECK(ins.requests.total() == 115);
}

TEST_CASE("bad configuration exits 2") {
  CHECK(run("gen --objects 2") == 2);  // default profile needs 25 objects
  CHECK(run("sweep --engine bogus --out-dir " + (kWork / "x").string()) == 2);
  CHECK(run("compare --metrics /nonexistent.csv") == 2);
  // The exact engine refuses full-scale instances without --force.
  CHECK(run("sweep --engine exact --f-list 0 --out-dir " + (kWork / "x").string()) == 2);
}

TEST_CASE("sweep emits deterministic metrics and figure files") {
  const fs::path d1 = kWork / "s1", d2 = kWork / "s2";
  REQUIRE(run("sweep --seed 5 --f-list 0.9,1.8 --figures --trace --out-dir " +
              d1.string()) == 0);
  REQUIRE(run("sweep --seed 5 --f-list 0.9,1.8 --figures --trace --out-dir " +
              d2.string()) == 0);
  CHECK(slurp(d1 / "metrics.csv") == slurp(d2 / "metrics.csv"));
  CHECK(slurp(d1 / "fig5.csv") == slurp(d2 / "fig5.csv"));
  CHECK(fs::exists(d1 / "fig3.csv"));
  CHECK(fs::exists(d1 / "fig12.csv"));
  CHECK(fs::exists(d1 / "trace.jsonl"));
  // 3 scenarios x 2 task weights = 6 rows + header.
  std::istringstream lines(slurp(d1 / "metrics.csv"));
  std::string line;
  int n = 0;
  while (std::getline(lines, line))
    if (!line.empty()) ++n;
  CHECK(n == 7);
}

TEST_CASE("default task-weight sweep yields nine rows per scenario") {
  const fs::path d = kWork / "default_f";
  REQUIRE(run("sweep --seed 2 --scenarios hybrid --out-dir " + d.string()) == 0);
  std::istringstream lines(slurp(d / "metrics.csv"));
  std::string line;
  int n = 0;
  while (std::getline(lines, line))
    if (!line.empty()) ++n;
  CHECK(n == 10);  // header + one row per default task weight
}

TEST_CASE("multi-seed sweep adds a summary and compare consumes the metrics") {
  const fs::path d = kWork / "multi";
  REQUIRE(run("sweep --seeds 1,2,3 --f-list 1.8 --out-dir " + d.string()) == 0);
  CHECK(fs::exists(d / "summary.csv"));
  REQUIRE(run("compare --metrics " + (d / "metrics.csv").string() + " --out-dir " +
              d.string()) == 0);
  const std::string summary = slurp(d / "savings_summary.csv");
  CHECK(summary.find("objects_only") != std::string::npos);
  CHECK(summary.find("relays_only") != std::string::npos);
}

TEST_CASE("empty request profile yields all-zero rows") {
  const fs::path d = kWork / "zero";
  REQUIRE(run("sweep --seed 3 --profile 0,0,0,0,0,0,0,0,0,0 --f-list 1.8 "
              "--scenarios hybrid --out-dir " +
              d.string()) == 0);
  const std::string csv = slurp(d / "metrics.csv");
  CHECK(csv.find("hybrid,1.8,3,0,0,0,0,0,0,0,0,") != std::string::npos);
}

TEST_CASE("EEVIPN_OUT_DIR provides the output directory") {
  const fs::path d = kWork / "envdir";
  const std::string cmd = "EEVIPN_OUT_DIR=" + d.string() + " " + EEVIPN_CLI_PATH +
                          " sweep --seed 4 --f-list 1.8 --scenarios hybrid "
                          ">/dev/null 2>&1";
  REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  CHECK(fs::exists(d / "metrics.csv"));
}

TEST_CASE("round-trip audit: emitted assignments re-validate on load") {
  const fs::path d = kWork / "audit";
  const fs::path inst = d / "inst.json";
  fs::create_directories(d);
  REQUIRE(run("gen --seed 12 --out " + inst.string()) == 0);
  REQUIRE(run("sweep --instance " + inst.string() +
              " --seed 12 --f-list 1.8 --scenarios hybrid --assignments "
              "--flows --power --out-dir " +
              d.string()) == 0);
  const fs::path assignment = d / "assignment_hybrid_f1.8_seed12.json";
  REQUIRE(fs::exists(assignment));
  CHECK(fs::exists(d / "flows_hybrid_f1.8_seed12.csv"));
  CHECK(fs::exists(d / "power_hybrid_f1.8_seed12.csv"));
  CHECK(run("validate --instance " + inst.string() + " --assignment " +
            assignment.string()) == 0);
  CHECK(slurp(d / "power_hybrid_f1.8_seed12.csv")
            .rfind("node,kind,processing_uw,traffic_uw\n", 0) == 0);
}

TEST_CASE("validate: clean and violating assignments") {
  const fs::path inst = kWork / "inst.json";
  REQUIRE(run("gen --seed 9 --out " + inst.string()) == 0);

  // Empty assignment with the full VM budget open is feasible in hybrid.
  eevipn::Assignment empty;
  for (int r = 0; r < 10; ++r) empty.open_vms.push_back(r);
  std::ofstream(kWork / "ok.json") << eevipn::assignment_to_json(empty).dump();
  CHECK(run("validate --instance " + inst.string() + " --assignment " +
            (kWork / "ok.json").string()) == 0);

  // No VMs at all violates the budget equality: exit 1.
  std::ofstream(kWork / "bad.json")
      << eevipn::assignment_to_json(eevipn::Assignment{}).dump();
  CHECK(run("validate --instance " + inst.string() + " --assignment " +
            (kWork / "bad.json").string()) == 1);
}

TEST_CASE("export-lp output is parseable and census runs") {
  const fs::path lp = kWork / "model.lp";
  REQUIRE(run("export-lp --seed 3 --objects 4 --grid-rows 2 --grid-cols 2 "
              "--profile 2,1,0,0,0,0,0,0,1,0 --vm-budget 2 --out " +
              lp.string()) == 0);
  const std::string text = slurp(lp);
  CHECK(text.rfind("\\ eevipn lp format 1\n", 0) == 0);
  const eevipn::MilpModel model = eevipn::parse_lp_string(text);
  CHECK(eevipn::write_lp_string(model) == text);
  CHECK(run("census --seed 3 --objects 4 --grid-rows 2 --grid-cols 2 "
            "--profile 2,1,0,0,0,0,0,0,1,0 --vm-budget 2") == 0);
}

TEST_CASE("the exact engine runs through the sweep on a small instance") {
  const fs::path d = kWork / "exact";
  REQUIRE(run("sweep --engine exact --seed 11 --objects 3 --grid-rows 1 "
              "--grid-cols 2 --profile 2,1,0,0,0,0,0,0,0,1 --vm-budget 1 "
              "--f-list 1.8 --out-dir " +
              d.string()) == 0);
  const std::string csv = slurp(d / "metrics.csv");
  CHECK(csv.find("hybrid,1.8,11,") != std::string::npos);
  CHECK(csv.find("objects_only,1.8,11,") != std::string::npos);
}

TEST_CASE("sweep config file with flag override") {
  const fs::path cfg = kWork / "cfg.json";
  std::ofstream(cfg) << R"({"seed": 6, "scenarios": ["hybrid"], "f_list": [1.8],
                            "engine": "heuristic"})";
  const fs::path d = kWork / "cfgout";
  REQUIRE(run("sweep --config " + cfg.string() + " --out-dir " + d.string()) == 0);
  const std::string csv = slurp(d / "metrics.csv");
  CHECK(csv.find("hybrid,1.8,6,") != std::string::npos);
  CHECK(csv.find("relays_only") == std::string::npos);

  // Flags override the file: a different f list.
  REQUIRE(run("sweep --config " + cfg.string() + " --f-list 0.3 --out-dir " +
              d.string()) == 0);
  CHECK(slurp(d / "metrics.csv").find("hybrid,0.3,6,") != std::string::npos);
}
