#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "vmfaoa/filters.hpp"

namespace vmfaoa {

// Four anchors at the side midpoints of the square, in its plane.
std::vector<Anchor> default_anchors(double side_m);

// Square-perimeter random-walk scenario. The target starts in the corner
// at the origin and walks counterclockwise; anchors sit at the side
// midpoints with identity orientations.
struct TrackScenario {
  double side_m = 5.0;
  double dt_s = 0.25;
  double q_xy = 0.5;
  double q_z = 0.1;
  int epochs = 160;
  int replications = 200;
  Eigen::Vector3d prior_mean = Eigen::Vector3d::Zero();
  double prior_sigma = 1.0;
  std::vector<Anchor> anchors = default_anchors(5.0);
};

// Random-walk model matched to the scenario: A = I, Q = dt * diag(q_xy^2,
// q_xy^2, q_z^2).
StateSpaceModel build_state_model(const TrackScenario& scenario);

// One true position per epoch, each on the square perimeter. Step
// lengths are |N(m, s^2)| with moments chosen so the walked distance has
// the same mean and variance as the planar speed of the state model.
std::vector<Eigen::Vector3d> generate_track(const TrackScenario& scenario,
                                            Rng& rng);

double rmse(const std::vector<Eigen::Vector3d>& estimates,
            const std::vector<Eigen::Vector3d>& truth);

// Linear-interpolation quantile of an unsorted sample, p in [0, 1].
double quantile(std::vector<double> values, double p);

enum class NoiseModel { model1, model2 };

// Generating distribution for a campaign or comparison: Model I adds
// Gaussian noise per angle, Model II draws VMF unit vectors.
struct NoiseSpec {
  NoiseModel model = NoiseModel::model1;
  AeNoiseParams params{10.0 * 3.14159265358979323846 / 180.0,
                       10.0 * 3.14159265358979323846 / 180.0};
  double kappa = 33.0;
};

// ---------------------------------------------------------------------
// Campaign
// ---------------------------------------------------------------------

struct CampaignOptions {
  std::vector<std::string> filters;  // labels; empty selects all variants
  int replications = 0;              // 0 falls back to the scenario value
  int particle_count = 2000;
  double ukf_lambda = 0.5;
  double resample_fraction = 0.1;
  int fit_samples = 100000;
  int table_samples = 100000;
  const AdaptiveStdTable* table = nullptr;  // prebuilt adaptive table
};

struct CampaignRow {
  int replication = 0;
  std::string filter;
  double rmse_m = std::numeric_limits<double>::quiet_NaN();
  double pct_diff_vs_pf_vmf = std::numeric_limits<double>::quiet_NaN();
  bool diverged = false;
};

struct FilterSummary {
  std::string filter;
  // 5/25/50/75/95 percent quantiles over completed replications.
  std::array<double, 5> rmse_quantiles{};
  std::array<double, 5> pct_quantiles{};
  double mean_rmse = std::numeric_limits<double>::quiet_NaN();
  double mean_pct = std::numeric_limits<double>::quiet_NaN();
  int diverged = 0;
  int completed = 0;
};

struct CampaignReport {
  std::vector<CampaignRow> rows;
  std::vector<FilterSummary> summaries;
  AeNoiseParams nominal;  // AE stds used by the *-nominal filters
  AeNoiseParams fitted;   // AE stds used by the *-fitted filters
  double vmf_kappa = 0.0;
  int replications = 0;
};

// Canonical filter labels in report order.
const std::vector<std::string>& campaign_filter_labels();

// Monte Carlo accuracy comparison. Every filter sees bit-identical
// measurement sequences within a replication, and per-filter RNG streams
// are keyed by label, so the report does not depend on the order (or
// presence) of other filters. pf-vmf is always included as the baseline
// for the percentage columns. Divergence of a run is recorded, not fatal.
CampaignReport run_campaign(const TrackScenario& scenario,
                            const NoiseSpec& noise,
                            const CampaignOptions& options,
                            std::uint64_t seed);

// ---------------------------------------------------------------------
// Model comparison
// ---------------------------------------------------------------------

struct LoglikResult {
  double value = 0.0;  // expected log-likelihood per measurement
  double se = 0.0;     // Monte Carlo standard error
};

// Expected log density of measurements from `generator` under an AE
// candidate with per-angle truncated normals on the canonical ranges.
LoglikResult expected_loglik_normal(const NoiseSpec& generator,
                                    const AeNoiseSource& candidate, int n_mc,
                                    std::uint64_t seed);

// Same, under a VMF candidate (angle-space density, so the sphere
// Jacobian is included).
LoglikResult expected_loglik_vmf(const NoiseSpec& generator, double kappa,
                                 int n_mc, std::uint64_t seed);

struct ModelScore {
  std::string model;  // ae-nominal, ae-fitted, ae-adaptive, vmf
  double loglik = 0.0;
  double se = 0.0;
  double weight = 0.0;  // softmax-normalized across the candidates
};

struct GeneratorComparison {
  std::string generator;  // model1 or model2
  AeNoiseParams fitted;
  std::vector<ModelScore> scores;
};

struct ComparisonReport {
  std::vector<GeneratorComparison> generators;
};

// Scores the four candidate measurement models against both generators.
ComparisonReport model_comparison(int n_mc, int n_fit, int table_samples,
                                  std::uint64_t seed);

// ---------------------------------------------------------------------
// Single-update demo
// ---------------------------------------------------------------------

struct DemoRow {
  std::string filter;
  Eigen::Vector3d posterior = Eigen::Vector3d::Zero();
  double angular_error_deg = 0.0;  // to the measured direction
};

struct DemoReport {
  Eigen::Vector3d prior_mean = Eigen::Vector3d::Zero();
  double prior_sigma = 0.0;
  AoaAngles raw_measurement;  // fed to the AE filters verbatim
  double ae_sigma = 0.0;
  double vmf_kappa = 0.0;
  double prior_error_deg = 0.0;
  std::vector<DemoRow> rows;
};

// One measurement update of all six filters on a fixed scenario where
// the prior mean and the measured direction lie near, and on opposite
// sides of, the -z pole of the single anchor. The AE filters receive the
// raw (uncanonicalized) angle pair; the VMF filters see the same
// direction as a unit vector.
DemoReport single_update_demo(int particle_count, std::uint64_t seed);

}  // namespace vmfaoa
