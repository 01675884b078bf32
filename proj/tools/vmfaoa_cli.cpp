#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vmfaoa/simeval.hpp"
#include "vmfaoa/vmf.hpp"

namespace {

using nlohmann::ordered_json;

constexpr double kPi = 3.14159265358979323846;

struct Settings {
  vmfaoa::TrackScenario scenario;
  vmfaoa::NoiseSpec noise;
  std::vector<std::string> filters;
  int particle_count = 2000;
  int replications = 200;
  double ukf_lambda = 0.5;
  double resample_fraction = 0.1;
  int n_mc = 100000;
  int fit_samples = 100000;
  int table_samples = 100000;
  int demo_particles = 1000000;
  std::string adaptive_table_csv;
};

void apply_fidelity(Settings& s, const std::string& fidelity) {
  if (fidelity == "desk") {
    s.replications = 200;
    s.particle_count = 2000;
  } else if (fidelity == "paper") {
    s.replications = 10000;
    s.particle_count = 10000;
  } else {
    throw vmfaoa::InvalidArgument("fidelity must be 'desk' or 'paper'");
  }
  s.scenario.replications = s.replications;
}

void apply_config(Settings& s, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw vmfaoa::IoError("cannot open config " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw vmfaoa::IoError("config " + path + ": " + e.what());
  }

  if (j.contains("scenario")) {
    const auto& sc = j["scenario"];
    if (sc.contains("side_m")) {
      s.scenario.side_m = sc["side_m"].get<double>();
      s.scenario.anchors = vmfaoa::default_anchors(s.scenario.side_m);
    }
    if (sc.contains("dt_s")) s.scenario.dt_s = sc["dt_s"].get<double>();
    if (sc.contains("q_xy")) s.scenario.q_xy = sc["q_xy"].get<double>();
    if (sc.contains("q_z")) s.scenario.q_z = sc["q_z"].get<double>();
    if (sc.contains("epochs")) s.scenario.epochs = sc["epochs"].get<int>();
    if (sc.contains("replications"))
      s.replications = sc["replications"].get<int>();
    if (sc.contains("anchors")) {
      std::vector<vmfaoa::Anchor> anchors;
      for (const auto& row : sc["anchors"]) {
        vmfaoa::Anchor a;
        a.position = {row.at(0).get<double>(), row.at(1).get<double>(),
                      row.at(2).get<double>()};
        anchors.push_back(a);
      }
      s.scenario.anchors = anchors;
    }
  }
  if (j.contains("prior")) {
    const auto& pr = j["prior"];
    if (pr.contains("mean")) {
      const auto& m = pr["mean"];
      s.scenario.prior_mean = {m.at(0).get<double>(), m.at(1).get<double>(),
                               m.at(2).get<double>()};
    }
    if (pr.contains("sigma")) s.scenario.prior_sigma = pr["sigma"].get<double>();
  }
  if (j.contains("noise")) {
    const auto& nz = j["noise"];
    if (nz.contains("model")) {
      const std::string model = nz["model"].get<std::string>();
      if (model == "model1") s.noise.model = vmfaoa::NoiseModel::model1;
      else if (model == "model2") s.noise.model = vmfaoa::NoiseModel::model2;
      else throw vmfaoa::InvalidArgument("noise.model must be model1 or model2");
    }
    if (nz.contains("sigma_azi_deg"))
      s.noise.params.sigma_azi = nz["sigma_azi_deg"].get<double>() * kPi / 180.0;
    if (nz.contains("sigma_ele_deg"))
      s.noise.params.sigma_ele = nz["sigma_ele_deg"].get<double>() * kPi / 180.0;
    if (nz.contains("sigma_azi_rad"))
      s.noise.params.sigma_azi = nz["sigma_azi_rad"].get<double>();
    if (nz.contains("sigma_ele_rad"))
      s.noise.params.sigma_ele = nz["sigma_ele_rad"].get<double>();
    if (nz.contains("kappa")) s.noise.kappa = nz["kappa"].get<double>();
  }
  if (j.contains("filters"))
    s.filters = j["filters"].get<std::vector<std::string>>();
  if (j.contains("replications")) s.replications = j["replications"].get<int>();
  if (j.contains("particle_count"))
    s.particle_count = j["particle_count"].get<int>();
  if (j.contains("ukf_lambda")) s.ukf_lambda = j["ukf_lambda"].get<double>();
  if (j.contains("resample_fraction"))
    s.resample_fraction = j["resample_fraction"].get<double>();
  if (j.contains("n_mc")) s.n_mc = j["n_mc"].get<int>();
  if (j.contains("fit_samples")) s.fit_samples = j["fit_samples"].get<int>();
  if (j.contains("table_samples"))
    s.table_samples = j["table_samples"].get<int>();
  if (j.contains("demo_particles"))
    s.demo_particles = j["demo_particles"].get<int>();
  if (j.contains("adaptive_table_csv"))
    s.adaptive_table_csv = j["adaptive_table_csv"].get<std::string>();
  s.scenario.replications = s.replications;
}

std::vector<std::string> split_filters(const std::string& spec) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : spec) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw vmfaoa::IoError("cannot open " + path.string() + " for writing");
  return out;
}

void write_json(const std::filesystem::path& path, const ordered_json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------

int cmd_simulate(const Settings& s, std::uint64_t seed,
                 const std::filesystem::path& out_dir) {
  vmfaoa::Rng track_rng = vmfaoa::make_rng(vmfaoa::derive_seed(seed, {11, 0}));
  vmfaoa::Rng meas_rng = vmfaoa::make_rng(vmfaoa::derive_seed(seed, {12, 0}));
  const std::vector<Eigen::Vector3d> truth =
      vmfaoa::generate_track(s.scenario, track_rng);

  char line[256];
  {
    std::ofstream out = open_out(out_dir / "track.csv");
    out << "epoch,x_m,y_m,z_m\n";
    for (std::size_t k = 0; k < truth.size(); ++k) {
      std::snprintf(line, sizeof(line), "%zu,%.9f,%.9f,%.9f\n", k, truth[k].x(),
                    truth[k].y(), truth[k].z());
      out << line;
    }
  }
  {
    std::ofstream out = open_out(out_dir / "measurements.csv");
    out << "epoch,anchor,azimuth_rad,elevation_rad\n";
    for (std::size_t k = 0; k < truth.size(); ++k) {
      const vmfaoa::EpochMeasurements epoch =
          s.noise.model == vmfaoa::NoiseModel::model1
              ? vmfaoa::generate_model1(truth[k], s.scenario.anchors,
                                        s.noise.params, meas_rng)
              : vmfaoa::generate_model2(truth[k], s.scenario.anchors,
                                        s.noise.kappa, meas_rng);
      for (const vmfaoa::AoaMeasurement& m : epoch) {
        std::snprintf(line, sizeof(line), "%zu,%d,%.9f,%.9f\n", k, m.anchor,
                      m.angles.azimuth, m.angles.elevation);
        out << line;
      }
    }
  }
  std::printf("simulate: wrote %zu epochs x %zu anchors to %s\n", truth.size(),
              s.scenario.anchors.size(), out_dir.string().c_str());
  return 0;
}

int cmd_run(const Settings& s, std::uint64_t seed, const std::string& fidelity,
            const std::filesystem::path& out_dir) {
  vmfaoa::CampaignOptions options;
  options.filters = s.filters;
  options.replications = s.replications;
  options.particle_count = s.particle_count;
  options.ukf_lambda = s.ukf_lambda;
  options.resample_fraction = s.resample_fraction;
  options.fit_samples = s.fit_samples;
  options.table_samples = s.table_samples;
  vmfaoa::AdaptiveStdTable loaded;
  if (!s.adaptive_table_csv.empty()) {
    loaded = vmfaoa::AdaptiveStdTable::load_csv(s.adaptive_table_csv);
    options.table = &loaded;
  }

  const vmfaoa::CampaignReport report =
      vmfaoa::run_campaign(s.scenario, s.noise, options, seed);

  char line[256];
  {
    std::ofstream out = open_out(out_dir / "campaign.csv");
    out << "replication,filter,rmse_m,pct_diff_vs_pf_vmf,diverged\n";
    for (const vmfaoa::CampaignRow& row : report.rows) {
      std::snprintf(line, sizeof(line), "%d,%s,%.9f,%.6f,%d\n", row.replication,
                    row.filter.c_str(), row.rmse_m, row.pct_diff_vs_pf_vmf,
                    row.diverged ? 1 : 0);
      out << line;
    }
  }

  ordered_json j;
  j["seed"] = seed;
  j["fidelity"] = fidelity;
  j["noise_model"] =
      s.noise.model == vmfaoa::NoiseModel::model1 ? "model1" : "model2";
  j["replications"] = report.replications;
  j["particle_count"] = s.particle_count;
  j["vmf_kappa"] = report.vmf_kappa;
  j["nominal_sigma_azi_rad"] = report.nominal.sigma_azi;
  j["nominal_sigma_ele_rad"] = report.nominal.sigma_ele;
  j["fitted_sigma_azi_rad"] = report.fitted.sigma_azi;
  j["fitted_sigma_ele_rad"] = report.fitted.sigma_ele;
  j["filters"] = ordered_json::array();
  bool gate_failed = false;
  static const char* qn[5] = {"q05", "q25", "q50", "q75", "q95"};
  for (const vmfaoa::FilterSummary& f : report.summaries) {
    ordered_json e;
    e["filter"] = f.filter;
    for (int q = 0; q < 5; ++q) e["rmse_m"][qn[q]] = f.rmse_quantiles[q];
    for (int q = 0; q < 5; ++q)
      e["pct_diff_vs_pf_vmf"][qn[q]] = f.pct_quantiles[q];
    e["mean_rmse_m"] = f.mean_rmse;
    e["mean_pct_diff_vs_pf_vmf"] = f.mean_pct;
    e["completed"] = f.completed;
    e["diverged"] = f.diverged;
    j["filters"].push_back(e);
    if (2 * f.diverged > report.replications) gate_failed = true;
  }
  write_json(out_dir / "summary.json", j);

  std::printf("%-16s %10s %10s %10s %9s\n", "filter", "rmse_q50", "rmse_q95",
              "pct_q50", "diverged");
  for (const vmfaoa::FilterSummary& f : report.summaries)
    std::printf("%-16s %10.4f %10.4f %10.2f %6d/%d\n", f.filter.c_str(),
                f.rmse_quantiles[2], f.rmse_quantiles[4], f.pct_quantiles[2],
                f.diverged, report.replications);
  if (gate_failed) {
    std::fprintf(stderr,
                 "run: at least one filter diverged in more than half of the "
                 "replications\n");
    return 2;
  }
  return 0;
}

int cmd_compare_models(const Settings& s, std::uint64_t seed,
                       const std::filesystem::path& out_dir) {
  const vmfaoa::ComparisonReport report = vmfaoa::model_comparison(
      s.n_mc, s.fit_samples, s.table_samples, seed);

  ordered_json j;
  j["seed"] = seed;
  j["n_mc"] = s.n_mc;
  j["generators"] = ordered_json::array();
  for (const vmfaoa::GeneratorComparison& g : report.generators) {
    ordered_json e;
    e["generator"] = g.generator;
    e["fitted_sigma_azi_rad"] = g.fitted.sigma_azi;
    e["fitted_sigma_ele_rad"] = g.fitted.sigma_ele;
    e["scores"] = ordered_json::array();
    for (const vmfaoa::ModelScore& sc : g.scores) {
      ordered_json row;
      row["model"] = sc.model;
      row["loglik"] = sc.loglik;
      row["se"] = sc.se;
      row["weight"] = sc.weight;
      e["scores"].push_back(row);
    }
    j["generators"].push_back(e);
  }
  write_json(out_dir / "comparison.json", j);

  for (const vmfaoa::GeneratorComparison& g : report.generators) {
    std::printf("%s (fitted sigma: %.3f, %.3f deg)\n", g.generator.c_str(),
                g.fitted.sigma_azi * 180.0 / kPi, g.fitted.sigma_ele * 180.0 / kPi);
    for (const vmfaoa::ModelScore& sc : g.scores)
      std::printf("  %-12s loglik=%9.5f  se=%.5f  weight=%.3f\n",
                  sc.model.c_str(), sc.loglik, sc.se, sc.weight);
  }
  return 0;
}

int cmd_demo_single_update(const Settings& s, std::uint64_t seed,
                           const std::filesystem::path& out_dir) {
  const vmfaoa::DemoReport report =
      vmfaoa::single_update_demo(s.demo_particles, seed);

  char line[256];
  std::ofstream out = open_out(out_dir / "demo.csv");
  out << "filter,prior_x,prior_y,prior_z,posterior_x,posterior_y,posterior_z,"
         "angular_error_deg\n";
  for (const vmfaoa::DemoRow& row : report.rows) {
    std::snprintf(line, sizeof(line), "%s,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.6f\n",
                  row.filter.c_str(), report.prior_mean.x(),
                  report.prior_mean.y(), report.prior_mean.z(),
                  row.posterior.x(), row.posterior.y(), row.posterior.z(),
                  row.angular_error_deg);
    out << line;
  }

  std::printf("prior mean [%.3f %.3f %.3f], angular error %.2f deg\n",
              report.prior_mean.x(), report.prior_mean.y(),
              report.prior_mean.z(), report.prior_error_deg);
  for (const vmfaoa::DemoRow& row : report.rows)
    std::printf("%-8s posterior [%8.4f %8.4f %8.4f]  angular error %7.2f deg\n",
                row.filter.c_str(), row.posterior.x(), row.posterior.y(),
                row.posterior.z(), row.angular_error_deg);
  return 0;
}

int cmd_build_adaptive_table(const Settings& s, std::uint64_t seed, int n_mc,
                             const std::filesystem::path& out_dir) {
  vmfaoa::AeNoiseParams base = s.noise.params;
  if (s.noise.model == vmfaoa::NoiseModel::model2) {
    const double sig = vmfaoa::kappa_to_sigma(s.noise.kappa);
    base = {sig, sig};
  }
  const vmfaoa::AdaptiveStdTable table =
      vmfaoa::build_adaptive_table(base, n_mc, vmfaoa::derive_seed(seed, {42}));
  const std::filesystem::path path = out_dir / "adaptive_table.csv";
  table.save_csv(path.string());
  std::printf("build-adaptive-table: wrote %d nodes to %s (base %.3f, %.3f deg)\n",
              vmfaoa::AdaptiveStdTable::kNodes, path.string().c_str(),
              base.sigma_azi * 180.0 / kPi, base.sigma_ele * 180.0 / kPi);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"von Mises-Fisher AOA positioning toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::uint64_t seed = 20260814;
  std::string out_dir_flag = "out";
  std::string fidelity = "desk";
  std::string filters_flag;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--seed", seed, "master RNG seed");
  app.add_option("--out", out_dir_flag, "output directory");
  app.add_option("--fidelity", fidelity, "desk|paper")
      ->check(CLI::IsMember({"desk", "paper"}));
  app.add_option("--filters", filters_flag, "comma-separated filter labels");

  CLI::App* simulate = app.add_subcommand("simulate", "write one replication's track and measurements");
  CLI::App* run = app.add_subcommand("run", "run the filtering campaign");
  CLI::App* compare = app.add_subcommand("compare-models", "score candidate measurement models");
  CLI::App* demo = app.add_subcommand("demo-single-update", "one measurement update of all filters");
  CLI::App* build_table = app.add_subcommand("build-adaptive-table", "tabulate elevation-dependent stds");

  int demo_particles_flag = 0;
  demo->add_option("--particles", demo_particles_flag, "particle count for the PF rows");
  int table_n_mc = 0;
  build_table->add_option("--n-mc", table_n_mc, "samples per elevation node");

  CLI11_PARSE(app, argc, argv);

  try {
    Settings settings;
    apply_fidelity(settings, fidelity);
    if (!config_path.empty()) apply_config(settings, config_path);
    if (!filters_flag.empty()) settings.filters = split_filters(filters_flag);
    if (demo_particles_flag > 0) settings.demo_particles = demo_particles_flag;

    const std::filesystem::path out_dir(out_dir_flag);
    std::filesystem::create_directories(out_dir);

    if (simulate->parsed()) return cmd_simulate(settings, seed, out_dir);
    if (run->parsed()) return cmd_run(settings, seed, fidelity, out_dir);
    if (compare->parsed()) return cmd_compare_models(settings, seed, out_dir);
    if (demo->parsed()) return cmd_demo_single_update(settings, seed, out_dir);
    if (build_table->parsed())
      return cmd_build_adaptive_table(
          settings, seed, table_n_mc > 0 ? table_n_mc : settings.table_samples,
          out_dir);
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
