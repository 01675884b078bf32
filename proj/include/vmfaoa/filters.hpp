#pragma once

#include <array>
#include <cstdint>
#include <variant>
#include <vector>

#include "vmfaoa/sensor.hpp"

namespace vmfaoa {

// Linear-Gaussian state transition x' = A x + w, w ~ N(0, Q). The
// measurement models read the target position out of the state through
// position_indices.
struct StateSpaceModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd Q;
  std::array<int, 3> position_indices{0, 1, 2};
};

struct GaussianBelief {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Weighted particle cloud; states is N_p x n_x so each state dimension
// is one contiguous column.
struct ParticleSet {
  Eigen::MatrixXd states;
  Eigen::VectorXd weights;
};

// Noise description for the AE likelihoods: fixed stds, or a table
// queried at the predicted elevation.
using AeNoiseSource = std::variant<AeNoiseParams, const AdaptiveStdTable*>;

// 1 / sum(w_i^2) for normalized weights; scale-invariant in general.
double effective_sample_size(const Eigen::VectorXd& weights);

// Systematic resampling; replaces states with the selected rows and
// resets weights to 1/N.
void resample(ParticleSet& particles, Rng& rng);

// Time updates.
void predict(GaussianBelief& belief, const StateSpaceModel& model);
void predict(ParticleSet& particles, const StateSpaceModel& model, Rng& rng);

struct PfUpdateInfo {
  Eigen::Vector3d estimate;  // weighted position mean before resampling
  double ess = 0.0;
  bool resampled = false;
};

// Measurement updates. PF variants reweigh (and possibly resample) in
// place and report the pre-resampling estimate; Gaussian variants update
// mean and covariance, re-symmetrizing the covariance afterwards.
PfUpdateInfo pf_update_vmf(ParticleSet& particles, const EpochMeasurements& epoch,
                           const std::vector<Anchor>& anchors, double kappa,
                           double resample_fraction, Rng& rng);
PfUpdateInfo pf_update_ae(ParticleSet& particles, const EpochMeasurements& epoch,
                          const std::vector<Anchor>& anchors,
                          const AeNoiseSource& noise, double resample_fraction,
                          Rng& rng);

void ekf_update_vmf(GaussianBelief& belief, const EpochMeasurements& epoch,
                    const std::vector<Anchor>& anchors, double kappa,
                    const std::array<int, 3>& position_indices = {0, 1, 2});
void ekf_update_ae(GaussianBelief& belief, const EpochMeasurements& epoch,
                   const std::vector<Anchor>& anchors, const AeNoiseSource& noise,
                   const std::array<int, 3>& position_indices = {0, 1, 2});
void ukf_update_vmf(GaussianBelief& belief, const EpochMeasurements& epoch,
                    const std::vector<Anchor>& anchors, double kappa,
                    double lambda,
                    const std::array<int, 3>& position_indices = {0, 1, 2});
void ukf_update_ae(GaussianBelief& belief, const EpochMeasurements& epoch,
                   const std::vector<Anchor>& anchors, const AeNoiseSource& noise,
                   double lambda,
                   const std::array<int, 3>& position_indices = {0, 1, 2});

// Plain Kalman measurement update given a precomputed innovation.
void kalman_update(GaussianBelief& belief, const Eigen::VectorXd& innovation,
                   const Eigen::MatrixXd& H, const Eigen::MatrixXd& R);

// Unscented weights (w_center, w_other) for dimension n and the given
// lambda; requires n + lambda > 0.
std::pair<double, double> ut_weights(int n, double lambda);

enum class FilterKind { pf, ekf, ukf };
enum class MeasurementModel { vmf, ae };

struct FilterConfig {
  FilterKind kind = FilterKind::pf;
  MeasurementModel model = MeasurementModel::vmf;
  double kappa = 0.0;                  // VMF likelihood concentration
  AeNoiseSource ae = AeNoiseParams{};  // AE likelihood noise
  int particle_count = 2000;
  double resample_fraction = 0.1;
  double ukf_lambda = 0.5;
};

// Runs one filter over a measurement sequence and returns one position
// estimate per epoch. Per-epoch failures (degenerate weights, failed
// factorizations, non-finite estimates) are rethrown as FilterDivergence
// carrying the epoch index.
std::vector<Eigen::Vector3d> run_filter(const FilterConfig& config,
                                        const StateSpaceModel& model,
                                        const GaussianBelief& prior,
                                        const std::vector<EpochMeasurements>& sequence,
                                        const std::vector<Anchor>& anchors,
                                        std::uint64_t seed);

}  // namespace vmfaoa
