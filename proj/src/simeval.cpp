#include "vmfaoa/simeval.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "vmfaoa/vmf.hpp"

namespace vmfaoa {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLog2Pi = 1.8378770664093453;

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

Eigen::Vector3d perimeter_position(double s, double side) {
  if (s < side) return {s, 0.0, 0.0};
  if (s < 2 * side) return {side, s - side, 0.0};
  if (s < 3 * side) return {side - (s - 2 * side), side, 0.0};
  return {0.0, side - (s - 3 * side), 0.0};
}

UnitVector3 sample_sphere(Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double z = 2.0 * unif(rng) - 1.0;
  const double phi = 2.0 * kPi * unif(rng);
  const double h = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {h * std::cos(phi), h * std::sin(phi), z};
}

void validate_noise(const NoiseSpec& noise) {
  if (noise.model == NoiseModel::model1) {
    if (!(noise.params.sigma_azi > 0.0) || !(noise.params.sigma_ele > 0.0))
      throw InvalidArgument("noise: model1 stds must be > 0");
  } else if (!(noise.kappa > 0.0) || !std::isfinite(noise.kappa)) {
    throw InvalidArgument("noise: model2 kappa must be finite and > 0");
  }
}

EpochMeasurements generate_epoch(const NoiseSpec& noise,
                                 const Eigen::Vector3d& target,
                                 const std::vector<Anchor>& anchors, Rng& rng) {
  return noise.model == NoiseModel::model1
             ? generate_model1(target, anchors, noise.params, rng)
             : generate_model2(target, anchors, noise.kappa, rng);
}

// AE stds the generator corresponds to: its own for Model I, the
// matched-concentration value for Model II.
AeNoiseParams nominal_params(const NoiseSpec& noise) {
  if (noise.model == NoiseModel::model1) return noise.params;
  const double s = kappa_to_sigma(noise.kappa);
  return {s, s};
}

// VMF concentration the generator corresponds to, the other way around.
double nominal_kappa(const NoiseSpec& noise) {
  if (noise.model == NoiseModel::model2) return noise.kappa;
  return sigma_to_kappa(noise.params.sigma_azi, noise.params.sigma_ele);
}

AeNoiseParams fit_from_generator(const NoiseSpec& noise, int n_fit,
                                 std::uint64_t seed) {
  const std::vector<Anchor> origin{Anchor{}};
  Rng rng = make_rng(seed);
  std::vector<std::pair<UnitVector3, AoaAngles>> samples;
  samples.reserve(n_fit);
  for (int i = 0; i < n_fit; ++i) {
    const UnitVector3 d = sample_sphere(rng);
    const EpochMeasurements m = generate_epoch(noise, d, origin, rng);
    samples.emplace_back(d, m[0].angles);
  }
  return fit_ae_ml(samples);
}

}  // namespace

std::vector<Anchor> default_anchors(double side_m) {
  const double h = side_m / 2;
  std::vector<Anchor> anchors(4);
  anchors[0].position = {h, 0.0, 0.0};
  anchors[1].position = {side_m, h, 0.0};
  anchors[2].position = {h, side_m, 0.0};
  anchors[3].position = {0.0, h, 0.0};
  return anchors;
}

StateSpaceModel build_state_model(const TrackScenario& scenario) {
  if (!(scenario.dt_s > 0.0) || !(scenario.q_xy > 0.0) || !(scenario.q_z > 0.0))
    throw InvalidArgument("scenario: dt, q_xy, q_z must be > 0");
  StateSpaceModel model;
  model.A = Eigen::Matrix3d::Identity();
  model.Q = scenario.dt_s *
            Eigen::Vector3d(scenario.q_xy * scenario.q_xy,
                            scenario.q_xy * scenario.q_xy,
                            scenario.q_z * scenario.q_z)
                .asDiagonal();
  return model;
}

std::vector<Eigen::Vector3d> generate_track(const TrackScenario& scenario,
                                            Rng& rng) {
  if (!(scenario.side_m > 0.0) || scenario.epochs < 1)
    throw InvalidArgument("scenario: side_m must be > 0 and epochs >= 1");
  if (!(scenario.dt_s > 0.0) || !(scenario.q_xy > 0.0))
    throw InvalidArgument("scenario: dt and q_xy must be > 0");
  // Step-length moments match the expected planar displacement of the
  // random-walk model over one interval: E|w| for w ~ N(0, 2 q^2 dt).
  const double g = std::tgamma(1.5);
  const double mean = scenario.q_xy * std::sqrt(2.0 * scenario.dt_s) * g;
  const double var =
      2.0 * scenario.q_xy * scenario.q_xy * scenario.dt_s * (1.0 - g * g);
  std::normal_distribution<double> step(mean, std::sqrt(var));

  const double perimeter = 4.0 * scenario.side_m;
  std::vector<Eigen::Vector3d> track;
  track.reserve(scenario.epochs);
  double s = 0.0;
  for (int k = 0; k < scenario.epochs; ++k) {
    s += std::abs(step(rng));
    track.push_back(perimeter_position(std::fmod(s, perimeter), scenario.side_m));
  }
  return track;
}

double rmse(const std::vector<Eigen::Vector3d>& estimates,
            const std::vector<Eigen::Vector3d>& truth) {
  if (estimates.empty() || estimates.size() != truth.size())
    throw InvalidArgument("rmse: size mismatch or empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i)
    acc += (estimates[i] - truth[i]).squaredNorm();
  return std::sqrt(acc / static_cast<double>(estimates.size()));
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw InvalidArgument("quantile: empty input");
  if (!(p >= 0.0) || !(p <= 1.0))
    throw InvalidArgument("quantile: p outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

// ---------------------------------------------------------------------
// Campaign
// ---------------------------------------------------------------------

const std::vector<std::string>& campaign_filter_labels() {
  static const std::vector<std::string> labels{
      "pf-vmf",  "pf-ae-nominal",  "pf-ae-fitted",  "pf-ae-adaptive",
      "ekf-vmf", "ekf-ae-nominal", "ekf-ae-fitted", "ekf-ae-adaptive",
      "ukf-vmf", "ukf-ae-nominal", "ukf-ae-fitted", "ukf-ae-adaptive"};
  return labels;
}

namespace {

std::string normalize_label(const std::string& name) {
  if (name == "pf-ae" || name == "ekf-ae" || name == "ukf-ae")
    return name + "-nominal";
  return name;
}

// Requested labels in canonical order, deduplicated, baseline included.
std::vector<std::string> resolve_labels(const std::vector<std::string>& requested) {
  const auto& all = campaign_filter_labels();
  if (requested.empty()) return all;
  std::vector<bool> selected(all.size(), false);
  for (const std::string& name : requested) {
    const std::string label = normalize_label(name);
    const auto it = std::find(all.begin(), all.end(), label);
    if (it == all.end()) {
      std::string valid;
      for (const auto& l : all) valid += (valid.empty() ? "" : ", ") + l;
      throw InvalidArgument("unknown filter '" + name + "' (valid: " + valid +
                            ", plus pf-ae/ekf-ae/ukf-ae aliases)");
    }
    selected[static_cast<std::size_t>(it - all.begin())] = true;
  }
  selected[0] = true;  // pf-vmf baseline
  std::vector<std::string> out;
  for (std::size_t i = 0; i < all.size(); ++i)
    if (selected[i]) out.push_back(all[i]);
  return out;
}

FilterConfig config_for_label(const std::string& label, double vmf_kappa,
                              const AeNoiseParams& nominal,
                              const AeNoiseParams& fitted,
                              const AdaptiveStdTable* table,
                              const CampaignOptions& options) {
  FilterConfig config;
  config.particle_count = options.particle_count;
  config.resample_fraction = options.resample_fraction;
  config.ukf_lambda = options.ukf_lambda;
  if (label.rfind("pf-", 0) == 0) config.kind = FilterKind::pf;
  else if (label.rfind("ekf-", 0) == 0) config.kind = FilterKind::ekf;
  else config.kind = FilterKind::ukf;
  if (label.find("-vmf") != std::string::npos) {
    config.model = MeasurementModel::vmf;
    config.kappa = vmf_kappa;
  } else {
    config.model = MeasurementModel::ae;
    if (label.find("-adaptive") != std::string::npos) config.ae = table;
    else if (label.find("-fitted") != std::string::npos) config.ae = fitted;
    else config.ae = nominal;
  }
  return config;
}

FilterSummary summarize(const std::string& label,
                        const std::vector<CampaignRow>& rows) {
  FilterSummary summary;
  summary.filter = label;
  std::vector<double> rmses, pcts;
  for (const CampaignRow& row : rows) {
    if (row.filter != label) continue;
    if (row.diverged || !std::isfinite(row.rmse_m)) {
      ++summary.diverged;
      continue;
    }
    ++summary.completed;
    rmses.push_back(row.rmse_m);
    if (std::isfinite(row.pct_diff_vs_pf_vmf))
      pcts.push_back(row.pct_diff_vs_pf_vmf);
  }
  static const std::array<double, 5> ps{0.05, 0.25, 0.50, 0.75, 0.95};
  if (!rmses.empty()) {
    double m = 0.0;
    for (double r : rmses) m += r;
    summary.mean_rmse = m / static_cast<double>(rmses.size());
    for (std::size_t i = 0; i < ps.size(); ++i)
      summary.rmse_quantiles[i] = quantile(rmses, ps[i]);
  }
  if (!pcts.empty()) {
    double m = 0.0;
    for (double p : pcts) m += p;
    summary.mean_pct = m / static_cast<double>(pcts.size());
    for (std::size_t i = 0; i < ps.size(); ++i)
      summary.pct_quantiles[i] = quantile(pcts, ps[i]);
  }
  return summary;
}

}  // namespace

CampaignReport run_campaign(const TrackScenario& scenario,
                            const NoiseSpec& noise,
                            const CampaignOptions& options,
                            std::uint64_t seed) {
  validate_anchors(scenario.anchors);
  validate_noise(noise);
  const int replications =
      options.replications > 0 ? options.replications : scenario.replications;
  if (replications < 1)
    throw InvalidArgument("run_campaign: replications must be >= 1");

  CampaignReport report;
  report.replications = replications;
  report.nominal = nominal_params(noise);
  report.vmf_kappa = nominal_kappa(noise);

  const std::vector<std::string> labels = resolve_labels(options.filters);
  const bool needs_fit =
      std::any_of(labels.begin(), labels.end(), [](const std::string& l) {
        return l.find("-fitted") != std::string::npos;
      });
  const bool needs_table =
      options.table == nullptr &&
      std::any_of(labels.begin(), labels.end(), [](const std::string& l) {
        return l.find("-adaptive") != std::string::npos;
      });

  report.fitted = needs_fit ? fit_from_generator(noise, options.fit_samples,
                                                 derive_seed(seed, {41}))
                            : report.nominal;
  AdaptiveStdTable built_table;
  const AdaptiveStdTable* table = options.table;
  if (needs_table) {
    built_table = build_adaptive_table(report.nominal, options.table_samples,
                                       derive_seed(seed, {42}));
    table = &built_table;
  }

  std::vector<std::pair<std::string, FilterConfig>> entries;
  for (const std::string& label : labels)
    entries.emplace_back(label,
                         config_for_label(label, report.vmf_kappa, report.nominal,
                                          report.fitted, table, options));

  const StateSpaceModel model = build_state_model(scenario);
  GaussianBelief prior;
  prior.mean = scenario.prior_mean;
  prior.cov = scenario.prior_sigma * scenario.prior_sigma *
              Eigen::Matrix3d::Identity();

  for (int rep = 0; rep < replications; ++rep) {
    Rng track_rng = make_rng(derive_seed(seed, {11, static_cast<std::uint64_t>(rep)}));
    Rng meas_rng = make_rng(derive_seed(seed, {12, static_cast<std::uint64_t>(rep)}));
    const std::vector<Eigen::Vector3d> truth = generate_track(scenario, track_rng);
    std::vector<EpochMeasurements> sequence;
    sequence.reserve(truth.size());
    for (const Eigen::Vector3d& target : truth)
      sequence.push_back(generate_epoch(noise, target, scenario.anchors, meas_rng));

    std::map<std::string, double> rep_rmse;
    std::vector<CampaignRow> rep_rows;
    for (const auto& [label, config] : entries) {
      CampaignRow row;
      row.replication = rep;
      row.filter = label;
      const std::uint64_t run_seed = derive_seed(
          seed, {13, static_cast<std::uint64_t>(rep), hash_label(label)});
      try {
        const std::vector<Eigen::Vector3d> estimates =
            run_filter(config, model, prior, sequence, scenario.anchors, run_seed);
        row.rmse_m = rmse(estimates, truth);
        row.diverged = !std::isfinite(row.rmse_m);
      } catch (const FilterDivergence&) {
        row.diverged = true;
      }
      rep_rmse[label] = row.rmse_m;
      rep_rows.push_back(std::move(row));
    }
    const double base = rep_rmse.at("pf-vmf");
    for (CampaignRow& row : rep_rows) {
      if (!row.diverged && std::isfinite(base) && base > 0.0)
        row.pct_diff_vs_pf_vmf = 100.0 * (row.rmse_m - base) / base;
      report.rows.push_back(std::move(row));
    }
  }

  for (const auto& [label, config] : entries)
    report.summaries.push_back(summarize(label, report.rows));
  return report;
}

// ---------------------------------------------------------------------
// Model comparison
// ---------------------------------------------------------------------

namespace {

struct EvalSample {
  UnitVector3 direction;
  AoaAngles truth;
  AoaAngles measured;
};

// The generator stream depends only on (generator, n_mc, seed), so every
// candidate scores exactly the same draws.
std::vector<EvalSample> draw_eval_samples(const NoiseSpec& generator, int n_mc,
                                          std::uint64_t seed) {
  if (n_mc < 2) throw InvalidArgument("expected_loglik: n_mc too small");
  validate_noise(generator);
  const std::vector<Anchor> origin{Anchor{}};
  Rng rng = make_rng(seed);
  std::vector<EvalSample> samples;
  samples.reserve(n_mc);
  for (int i = 0; i < n_mc; ++i) {
    EvalSample s;
    s.direction = sample_sphere(rng);
    s.truth = to_angles(s.direction);
    s.measured = generate_epoch(generator, s.direction, origin, rng)[0].angles;
    samples.push_back(s);
  }
  return samples;
}

LoglikResult reduce_loglik(const std::vector<double>& ll) {
  double mean = 0.0;
  for (double v : ll) mean += v;
  mean /= static_cast<double>(ll.size());
  double var = 0.0;
  for (double v : ll) var += (v - mean) * (v - mean);
  var /= static_cast<double>(ll.size());
  return {mean, std::sqrt(var / static_cast<double>(ll.size()))};
}

}  // namespace

LoglikResult expected_loglik_normal(const NoiseSpec& generator,
                                    const AeNoiseSource& candidate, int n_mc,
                                    std::uint64_t seed) {
  const std::vector<EvalSample> samples = draw_eval_samples(generator, n_mc, seed);
  std::vector<double> ll;
  ll.reserve(samples.size());
  for (const EvalSample& s : samples) {
    AeNoiseParams sig;
    if (const auto* fixed = std::get_if<AeNoiseParams>(&candidate)) sig = *fixed;
    else sig = std::get<const AdaptiveStdTable*>(candidate)->lookup(s.truth.elevation);
    const double ra = wrap_angle(s.measured.azimuth - s.truth.azimuth);
    const double re = s.measured.elevation - s.truth.elevation;
    // Truncated normals: azimuth on its principal interval around the
    // truth, elevation as a colatitude supported on [0, pi].
    const double za = 2.0 * norm_cdf(kPi / sig.sigma_azi) - 1.0;
    const double colat = s.truth.elevation + kPi / 2;
    const double ze = norm_cdf((kPi - colat) / sig.sigma_ele) -
                      norm_cdf(-colat / sig.sigma_ele);
    double v = -0.5 * ra * ra / (sig.sigma_azi * sig.sigma_azi) -
               std::log(sig.sigma_azi) - 0.5 * kLog2Pi - std::log(za);
    v += -0.5 * re * re / (sig.sigma_ele * sig.sigma_ele) -
         std::log(sig.sigma_ele) - 0.5 * kLog2Pi - std::log(ze);
    ll.push_back(v);
  }
  return reduce_loglik(ll);
}

LoglikResult expected_loglik_vmf(const NoiseSpec& generator, double kappa,
                                 int n_mc, std::uint64_t seed) {
  if (!(kappa > 0.0) || !std::isfinite(kappa))
    throw InvalidArgument("expected_loglik_vmf: kappa must be finite and > 0");
  const std::vector<EvalSample> samples = draw_eval_samples(generator, n_mc, seed);
  const double logc = log_vmf_normalizer(kappa);
  std::vector<double> ll;
  ll.reserve(samples.size());
  for (const EvalSample& s : samples) {
    const UnitVector3 u = to_unit_vector(s.measured);
    // Density in angle space: VMF on the sphere times the area Jacobian
    // sin(colatitude) of the measured point.
    const double jac = std::max(std::cos(s.measured.elevation), 1e-12);
    ll.push_back(logc + kappa * u.dot(s.direction) + std::log(jac));
  }
  return reduce_loglik(ll);
}

ComparisonReport model_comparison(int n_mc, int n_fit, int table_samples,
                                  std::uint64_t seed) {
  if (n_mc < 2 || n_fit < 1 || table_samples < 2)
    throw InvalidArgument("model_comparison: sample counts too small");
  ComparisonReport report;
  const std::array<NoiseSpec, 2> generators{
      NoiseSpec{NoiseModel::model1,
                {10.0 * kPi / 180.0, 10.0 * kPi / 180.0},
                33.0},
      NoiseSpec{NoiseModel::model2,
                {10.0 * kPi / 180.0, 10.0 * kPi / 180.0},
                33.0}};
  for (std::size_t g = 0; g < generators.size(); ++g) {
    const NoiseSpec& gen = generators[g];
    GeneratorComparison out;
    out.generator = gen.model == NoiseModel::model1 ? "model1" : "model2";
    const AeNoiseParams nominal = nominal_params(gen);
    out.fitted = fit_from_generator(gen, n_fit, derive_seed(seed, {31, g}));
    const AdaptiveStdTable table =
        build_adaptive_table(nominal, table_samples, derive_seed(seed, {32, g}));
    const std::uint64_t eval_seed = derive_seed(seed, {33, g});

    std::vector<ModelScore> scores;
    const auto add = [&scores](const std::string& name, const LoglikResult& r) {
      scores.push_back({name, r.value, r.se, 0.0});
    };
    add("ae-nominal", expected_loglik_normal(gen, nominal, n_mc, eval_seed));
    add("ae-fitted", expected_loglik_normal(gen, out.fitted, n_mc, eval_seed));
    add("ae-adaptive", expected_loglik_normal(gen, &table, n_mc, eval_seed));
    add("vmf", expected_loglik_vmf(gen, nominal_kappa(gen), n_mc, eval_seed));

    double peak = scores[0].loglik;
    for (const ModelScore& s : scores) peak = std::max(peak, s.loglik);
    double total = 0.0;
    for (ModelScore& s : scores) total += std::exp(s.loglik - peak);
    for (ModelScore& s : scores) s.weight = std::exp(s.loglik - peak) / total;
    out.scores = std::move(scores);
    report.generators.push_back(std::move(out));
  }
  return report;
}

// ---------------------------------------------------------------------
// Single-update demo
// ---------------------------------------------------------------------

DemoReport single_update_demo(int particle_count, std::uint64_t seed) {
  if (particle_count < 1)
    throw InvalidArgument("single_update_demo: particle_count must be >= 1");

  DemoReport report;
  report.prior_mean = {0.3, -0.3, -2.0};
  report.prior_sigma = 0.75;
  report.raw_measurement = {-kPi, -19.0 * kPi / 20.0};
  report.ae_sigma = 5.0 * kPi / 180.0;
  report.vmf_kappa = sigma_to_kappa(report.ae_sigma, report.ae_sigma);

  const std::vector<Anchor> anchors{Anchor{}};
  const EpochMeasurements epoch{{0, report.raw_measurement}};
  const UnitVector3 u = to_unit_vector(report.raw_measurement);
  report.prior_error_deg =
      angle_between(report.prior_mean.normalized(), u) * 180.0 / kPi;

  GaussianBelief prior;
  prior.mean = report.prior_mean;
  prior.cov = report.prior_sigma * report.prior_sigma * Eigen::Matrix3d::Identity();

  // One shared particle cloud so the two PF rows differ only in their
  // likelihood.
  Rng init_rng = make_rng(derive_seed(seed, {21}));
  ParticleSet cloud;
  cloud.states.resize(particle_count, 3);
  {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < particle_count; ++i)
        cloud.states(i, k) = report.prior_mean(k) + report.prior_sigma * normal(init_rng);
    cloud.weights = Eigen::VectorXd::Constant(
        particle_count, 1.0 / static_cast<double>(particle_count));
  }

  const auto error_deg = [&u](const Eigen::Vector3d& p) {
    return angle_between(p.normalized(), u) * 180.0 / kPi;
  };
  const AeNoiseParams ae{report.ae_sigma, report.ae_sigma};
  Rng run_rng = make_rng(derive_seed(seed, {22}));

  {
    ParticleSet particles = cloud;
    const PfUpdateInfo info = pf_update_vmf(particles, epoch, anchors,
                                            report.vmf_kappa, 0.0, run_rng);
    report.rows.push_back({"pf-vmf", info.estimate, error_deg(info.estimate)});
  }
  {
    ParticleSet particles = cloud;
    const PfUpdateInfo info =
        pf_update_ae(particles, epoch, anchors, ae, 0.0, run_rng);
    report.rows.push_back({"pf-ae", info.estimate, error_deg(info.estimate)});
  }
  {
    GaussianBelief b = prior;
    ekf_update_vmf(b, epoch, anchors, report.vmf_kappa);
    report.rows.push_back({"ekf-vmf", b.mean, error_deg(b.mean)});
  }
  {
    GaussianBelief b = prior;
    ekf_update_ae(b, epoch, anchors, ae);
    report.rows.push_back({"ekf-ae", b.mean, error_deg(b.mean)});
  }
  {
    GaussianBelief b = prior;
    ukf_update_vmf(b, epoch, anchors, report.vmf_kappa, 0.5);
    report.rows.push_back({"ukf-vmf", b.mean, error_deg(b.mean)});
  }
  {
    GaussianBelief b = prior;
    ukf_update_ae(b, epoch, anchors, ae, 0.5);
    report.rows.push_back({"ukf-ae", b.mean, error_deg(b.mean)});
  }
  return report;
}

}  // namespace vmfaoa
