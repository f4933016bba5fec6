#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string err;
};

fs::path scratch_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("lifelong_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  fs::path p = dir / "config.json";
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

Run cli(const std::string& sub, const fs::path& config, const fs::path& out, const std::string& extra = "") {
  fs::path err = out / "stderr.txt";
  std::string cmd = std::string(LIFELONG_CLI_PATH) + " " + sub + " --config " + config.string() + " --out " +
                    out.string() + " " + extra + " 2> " + err.string() + " > /dev/null";
  int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
}

const char* kMinimal = R"({
  "family": "Trees", "N": 8, "K": 2, "d": 3, "s": 5, "m": 6, "S": 8,
  "seed": 11, "trials": 2, "metafeature_depth": 2
})";

}  // namespace

TEST_CASE("run writes both reports and exits 0") {
  auto dir = scratch_dir("minimal");
  auto cfg = write_config(dir, kMinimal);
  auto r = cli("run", cfg, dir);
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "report.csv"));
  auto csv = slurp(dir / "report.csv");
  CHECK(csv.rfind(
            "schema_version,family,trial,task_index,outcome,probes,per_example_max,rep_size,restarts,good,envelope\n",
            0) == 0);
  // header plus 2 trials of 6 tasks
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 13);
}

TEST_CASE("reruns are byte-identical") {
  auto a = scratch_dir("rerun_a");
  auto b = scratch_dir("rerun_b");
  auto cfg = write_config(a, kMinimal);
  REQUIRE(cli("run", cfg, a).code == 0);
  REQUIRE(cli("run", cfg, b, "--jobs 2").code == 0);
  CHECK(slurp(a / "report.csv") == slurp(b / "report.csv"));
  CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
}

TEST_CASE("depth above size is a config error") {
  auto dir = scratch_dir("d_gt_s");
  auto cfg = write_config(dir, R"({"family": "Trees", "N": 8, "K": 2, "d": 6, "s": 5, "m": 3, "S": 4})");
  auto r = cli("run", cfg, dir);
  CHECK(r.code == 2);
  CHECK(r.err.find("d must not exceed s") != std::string::npos);
}

TEST_CASE("strict mode fails on a violated envelope") {
  auto dir = scratch_dir("strict");
  auto cfg = write_config(dir, R"({"family": "Trees", "N": 8, "K": 2, "d": 3, "s": 5, "m": 6, "S": 8,
    "metafeature_depth": 2, "bound_constant": 1e-6})");
  CHECK(cli("run", cfg, dir).code == 0);
  auto r = cli("run", cfg, dir, "--strict");
  CHECK(r.code == 1);
  CHECK(r.err.find("failed") != std::string::npos);
}

TEST_CASE("malformed JSON reports its line") {
  auto dir = scratch_dir("malformed");
  auto cfg = write_config(dir, "{\n  \"family\": \"Trees\",\n  \"N\": 8,,\n  \"K\": 2\n}\n");
  auto r = cli("run", cfg, dir);
  CHECK(r.code == 2);
  CHECK(r.err.find("line 3") != std::string::npos);
}

TEST_CASE("unknown keys are rejected") {
  auto dir = scratch_dir("unknown");
  auto cfg = write_config(dir, R"({"family": "Trees", "N": 8, "depth": 3})");
  auto r = cli("run", cfg, dir);
  CHECK(r.code == 2);
  CHECK(r.err.find("depth") != std::string::npos);
}

TEST_CASE("sweeps") {
  auto dir = scratch_dir("sweep");
  SUBCASE("empty values are rejected") {
    auto cfg = write_config(dir, R"({"family": "Trees", "N": 8, "K": 2, "d": 3, "s": 5, "m": 4, "S": 4,
      "metafeature_depth": 2, "sweep": {"axis": "m", "values": []}})");
    CHECK(cli("sweep", cfg, dir).code == 2);
  }
  SUBCASE("one row per value and trial") {
    auto cfg = write_config(dir, R"({"family": "Trees", "N": 8, "K": 2, "d": 3, "s": 5, "m": 4, "S": 4,
      "metafeature_depth": 2, "trials": 2, "sweep": {"axis": "m", "values": [2, 3, 4]}})");
    REQUIRE(cli("sweep", cfg, dir).code == 0);
    auto csv = slurp(dir / "sweep.csv");
    CHECK(csv.rfind("schema_version,family,axis,value,trial,total_probes,good_probes,scratch,restarts,envelope\n",
                    0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
  }
}

TEST_CASE("adversary subcommand") {
  auto dir = scratch_dir("adversary");
  auto cfg = write_config(dir, R"({"family": "Trees", "N": 20, "K": 2, "d": 1, "s": 1, "m": 10, "S": 2,
    "metafeature_depth": 1, "adversary": {"pool": 10, "S": 1, "trials": 50, "budgets": [0, 5],
    "regime": "Realizable", "regime_trials": 2}})");
  REQUIRE(cli("adversary", cfg, dir).code == 0);
  CHECK(fs::exists(dir / "adversary.csv"));
  CHECK(fs::exists(dir / "regime.csv"));
  auto missing = write_config(dir, kMinimal);
  CHECK(cli("adversary", missing, dir).code == 2);
}

TEST_CASE("missing config file is a usage error") {
  auto dir = scratch_dir("missing");
  CHECK(cli("run", dir / "nope.json", dir).code == 2);
}
