#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "vmfaoa/sensor.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string stdout_text;
  std::string stderr_text;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliResult run_cli(const std::string& args, const fs::path& work) {
  fs::create_directories(work);
  const fs::path out_file = work / "stdout.txt";
  const fs::path err_file = work / "stderr.txt";
  const std::string cmd = std::string(VMFAOA_CLI_PATH) + " " + args + " > " +
                          out_file.string() + " 2> " + err_file.string();
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.stdout_text = slurp(out_file);
  r.stderr_text = slurp(err_file);
  return r;
}

fs::path workspace(const std::string& name) {
  const fs::path dir = fs::path("cli_work") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line))
    if (!line.empty()) lines.push_back(line);
  return lines;
}

// Small, fast campaign setup shared by the run-subcommand tests.
const char* kSmallRunConfig = R"({
  "scenario": {"epochs": 10},
  "replications": 4,
  "particle_count": 100,
  "fit_samples": 5000,
  "table_samples": 5000,
  "filters": ["pf-vmf", "ekf-vmf"]
})";

}  // namespace

TEST_CASE("help and argument validation") {
  const fs::path work = workspace("help");
  CHECK(run_cli("--help", work / "h").exit_code == 0);
  const CliResult help = run_cli("--help", work / "h2");
  for (const char* name : {"simulate", "run", "compare-models",
                           "demo-single-update", "build-adaptive-table"}) {
    CHECK(help.stdout_text.find(name) != std::string::npos);
  }

  // A subcommand is mandatory, flags are validated.
  CHECK(run_cli("", work / "none").exit_code != 0);
  CHECK(run_cli("--fidelity bogus simulate", work / "fid").exit_code != 0);
  CHECK(run_cli("--no-such-flag run", work / "flag").exit_code != 0);

  // Missing config file is a clean, reported error.
  const CliResult missing =
      run_cli("--config does_not_exist.json simulate", work / "cfg");
  CHECK(missing.exit_code == 1);
  CHECK(missing.stderr_text.find("error:") != std::string::npos);
}

TEST_CASE("simulate writes track and measurement tables") {
  const fs::path work = workspace("simulate");
  write_file(work / "config.json", R"({"scenario": {"epochs": 25}})");

  const fs::path out = work / "out";
  const CliResult r = run_cli(
      "--config " + (work / "config.json").string() + " --seed 42 --out " +
          out.string() + " simulate",
      work / "run1");
  CHECK(r.exit_code == 0);

  const auto track = lines_of(slurp(out / "track.csv"));
  REQUIRE(track.size() == 26);
  CHECK(track[0] == "epoch,x_m,y_m,z_m");
  int epoch = -1;
  double x = 0.0, y = 0.0, z = 0.0;
  CHECK(std::sscanf(track[1].c_str(), "%d,%lf,%lf,%lf", &epoch, &x, &y, &z) ==
        4);
  CHECK(epoch == 0);
  CHECK(z == 0.0);  // the walk stays in the anchor plane

  const auto meas = lines_of(slurp(out / "measurements.csv"));
  REQUIRE(meas.size() == 1 + 25 * 4);
  CHECK(meas[0] == "epoch,anchor,azimuth_rad,elevation_rad");
  for (std::size_t i = 1; i < meas.size(); ++i) {
    int k = -1, anchor = -1;
    double azi = 0.0, ele = 0.0;
    REQUIRE(std::sscanf(meas[i].c_str(), "%d,%d,%lf,%lf", &k, &anchor, &azi,
                        &ele) == 4);
    CHECK(k == static_cast<int>((i - 1) / 4));
    CHECK(anchor == static_cast<int>((i - 1) % 4));
    CHECK(std::abs(azi) <= 3.14159266);
    CHECK(std::abs(ele) <= 1.57079633);
  }

  // Same seed reproduces the files byte for byte; a new seed does not.
  const fs::path out2 = work / "out2";
  run_cli("--config " + (work / "config.json").string() +
              " --seed 42 --out " + out2.string() + " simulate",
          work / "run2");
  CHECK(slurp(out / "track.csv") == slurp(out2 / "track.csv"));
  CHECK(slurp(out / "measurements.csv") == slurp(out2 / "measurements.csv"));

  const fs::path out3 = work / "out3";
  run_cli("--config " + (work / "config.json").string() +
              " --seed 43 --out " + out3.string() + " simulate",
          work / "run3");
  CHECK(slurp(out / "track.csv") != slurp(out3 / "track.csv"));
}

TEST_CASE("run produces the campaign table and summary") {
  const fs::path work = workspace("run");
  write_file(work / "config.json", kSmallRunConfig);
  const fs::path out = work / "out";

  const CliResult r = run_cli(
      "--config " + (work / "config.json").string() + " --seed 7 --out " +
          out.string() + " run",
      work / "run1");
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text.find("pf-vmf") != std::string::npos);

  const auto rows = lines_of(slurp(out / "campaign.csv"));
  REQUIRE(rows.size() == 1 + 4 * 2);
  CHECK(rows[0] == "replication,filter,rmse_m,pct_diff_vs_pf_vmf,diverged");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    int rep = -1, diverged = -1;
    char filter[64] = {0};
    double rmse_m = 0.0, pct = 0.0;
    REQUIRE(std::sscanf(rows[i].c_str(), "%d,%63[^,],%lf,%lf,%d", &rep, filter,
                        &rmse_m, &pct, &diverged) == 5);
    CHECK(rep >= 0);
    CHECK(rep < 4);
    CHECK(diverged == 0);
    CHECK(rmse_m > 0.0);
  }

  const json summary = json::parse(slurp(out / "summary.json"));
  CHECK(summary.at("seed").get<std::uint64_t>() == 7);
  CHECK(summary.at("fidelity") == "desk");
  CHECK(summary.at("noise_model") == "model1");
  CHECK(summary.at("replications") == 4);
  REQUIRE(summary.at("filters").size() == 2);
  for (const auto& f : summary.at("filters")) {
    const auto& q = f.at("rmse_m");
    for (const char* key : {"q05", "q25", "q50", "q75", "q95"})
      CHECK(q.contains(key));
    CHECK(q.at("q05").get<double>() <= q.at("q50").get<double>());
    CHECK(q.at("q50").get<double>() <= q.at("q95").get<double>());
    CHECK(f.at("diverged") == 0);
    CHECK(f.at("completed") == 4);
  }

  // Identical invocation, identical artifacts.
  const fs::path out2 = work / "out2";
  run_cli("--config " + (work / "config.json").string() + " --seed 7 --out " +
              out2.string() + " run",
          work / "run2");
  CHECK(slurp(out / "campaign.csv") == slurp(out2 / "campaign.csv"));
  CHECK(slurp(out / "summary.json") == slurp(out2 / "summary.json"));

  // --filters overrides the config list.
  const fs::path out3 = work / "out3";
  const CliResult r3 = run_cli(
      "--config " + (work / "config.json").string() +
          " --seed 7 --filters ukf-vmf --out " + out3.string() + " run",
      work / "run3");
  CHECK(r3.exit_code == 0);
  const json s3 = json::parse(slurp(out3 / "summary.json"));
  REQUIRE(s3.at("filters").size() == 2);  // forced pf-vmf baseline + ukf-vmf
  CHECK(s3.at("filters")[0].at("filter") == "pf-vmf");
  CHECK(s3.at("filters")[1].at("filter") == "ukf-vmf");

  // An unknown filter label is rejected.
  const CliResult bad = run_cli(
      "--config " + (work / "config.json").string() +
          " --filters pf-awesome --out " + (work / "out4").string() + " run",
      work / "run4");
  CHECK(bad.exit_code == 1);
  CHECK(bad.stderr_text.find("error:") != std::string::npos);
  CHECK(bad.stderr_text.find("pf-awesome") != std::string::npos);
}

TEST_CASE("run exits with status 2 when a filter diverges too often") {
  const fs::path work = workspace("diverge");
  // The prior is glued to a single anchor away from the track and both
  // spreads are (effectively) zero, so every replication diverges.
  write_file(work / "config.json", R"({
    "scenario": {"epochs": 5, "anchors": [[10, 10, 0]],
                 "q_xy": 1e-300, "q_z": 1e-300},
    "prior": {"mean": [10, 10, 0], "sigma": 0},
    "replications": 4,
    "particle_count": 50,
    "filters": ["pf-vmf", "ekf-vmf"]
  })");

  const fs::path out = work / "out";
  const CliResult r = run_cli(
      "--config " + (work / "config.json").string() + " --seed 3 --out " +
          out.string() + " run",
      work / "run1");
  CHECK(r.exit_code == 2);
  CHECK(r.stderr_text.find("diverged") != std::string::npos);

  // The artifacts are still written, with the divergence recorded.
  const json summary = json::parse(slurp(out / "summary.json"));
  for (const auto& f : summary.at("filters")) {
    CHECK(f.at("diverged") == 4);
    CHECK(f.at("completed") == 0);
  }
  const auto rows = lines_of(slurp(out / "campaign.csv"));
  for (std::size_t i = 1; i < rows.size(); ++i)
    CHECK(rows[i].back() == '1');
}

TEST_CASE("compare-models writes the score report") {
  const fs::path work = workspace("compare");
  write_file(work / "config.json",
             R"({"n_mc": 5000, "fit_samples": 5000, "table_samples": 5000})");
  const fs::path out = work / "out";

  const CliResult r = run_cli(
      "--config " + (work / "config.json").string() + " --seed 11 --out " +
          out.string() + " compare-models",
      work / "run1");
  CHECK(r.exit_code == 0);

  const json report = json::parse(slurp(out / "comparison.json"));
  REQUIRE(report.at("generators").size() == 2);
  CHECK(report.at("generators")[0].at("generator") == "model1");
  CHECK(report.at("generators")[1].at("generator") == "model2");
  for (const auto& g : report.at("generators")) {
    REQUIRE(g.at("scores").size() == 4);
    double total = 0.0;
    for (const auto& s : g.at("scores")) total += s.at("weight").get<double>();
    CHECK_CLOSE(total, 1.0, 1e-9);
    CHECK(g.at("fitted_sigma_azi_rad").get<double>() > 0.0);
  }
}

TEST_CASE("demo-single-update writes one row per filter") {
  const fs::path work = workspace("demo");
  const fs::path out = work / "out";
  const CliResult r = run_cli(
      "--seed 1 --out " + out.string() + " demo-single-update --particles 20000",
      work / "run1");
  CHECK(r.exit_code == 0);

  const auto rows = lines_of(slurp(out / "demo.csv"));
  REQUIRE(rows.size() == 7);
  CHECK(rows[0] ==
        "filter,prior_x,prior_y,prior_z,posterior_x,posterior_y,posterior_z,"
        "angular_error_deg");
  const std::vector<std::string> order = {"pf-vmf", "pf-ae",  "ekf-vmf",
                                          "ekf-ae", "ukf-vmf", "ukf-ae"};
  for (int i = 0; i < 6; ++i) {
    CHECK(rows[1 + i].rfind(order[i] + ",", 0) == 0);
  }
  CHECK(r.stdout_text.find("prior mean") != std::string::npos);
}

TEST_CASE("build-adaptive-table emits a loadable grid") {
  const fs::path work = workspace("table");
  const fs::path out = work / "out";
  const CliResult r = run_cli(
      "--seed 9 --out " + out.string() + " build-adaptive-table --n-mc 5000",
      work / "run1");
  CHECK(r.exit_code == 0);

  const fs::path csv = out / "adaptive_table.csv";
  const auto rows = lines_of(slurp(csv));
  REQUIRE(rows.size() == 182);
  CHECK(rows[0] == "elevation_deg,sigma_azi_rad,sigma_ele_rad");
  CHECK(rows[1].rfind("-90,", 0) == 0);
  CHECK(rows[181].rfind("90,", 0) == 0);

  // The emitted file round-trips through the library loader.
  const vmfaoa::AdaptiveStdTable table =
      vmfaoa::AdaptiveStdTable::load_csv(csv.string());
  CHECK(table.lookup(0.0).sigma_azi > 0.0);

  // A campaign can consume the prebuilt table from the config.
  write_file(work / "config.json",
             "{\"scenario\": {\"epochs\": 5}, \"replications\": 2,\n"
             " \"particle_count\": 50, \"filters\": [\"ekf-ae-adaptive\"],\n"
             " \"adaptive_table_csv\": \"" +
                 csv.string() + "\"}");
  const CliResult r2 = run_cli(
      "--config " + (work / "config.json").string() + " --seed 9 --out " +
          (work / "out2").string() + " run",
      work / "run2");
  CHECK(r2.exit_code == 0);
}
