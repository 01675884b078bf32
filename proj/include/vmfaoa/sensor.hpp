#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vmfaoa/angles.hpp"
#include "vmfaoa/rng.hpp"

namespace vmfaoa {

// A receiver with a known position and mounting orientation. The
// orientation maps global directions into the anchor frame, so a
// measured unit vector u satisfies u ~ orientation * true_direction.
struct Anchor {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  RotationMatrix3 orientation = RotationMatrix3::Identity();
};

// Per-angle measurement noise stds in radians.
struct AeNoiseParams {
  double sigma_azi = 0.0;
  double sigma_ele = 0.0;
};

// One azimuth/elevation reading tagged with its anchor index.
struct AoaMeasurement {
  int anchor = 0;
  AoaAngles angles;
};

using EpochMeasurements = std::vector<AoaMeasurement>;

// Throws InvalidArgument unless every anchor has a finite position and a
// proper rotation for its orientation.
void validate_anchors(const std::vector<Anchor>& anchors);

// Unit vector from the anchor to the target in the global frame. Throws
// DegenerateGeometry when the target is within 1e-12 of the anchor.
UnitVector3 true_direction(const Eigen::Vector3d& target, const Anchor& anchor);

// Noise-free azimuth/elevation of the target in the anchor frame.
AoaAngles ae_predict(const Eigen::Vector3d& target, const Anchor& anchor);

// Model I: additive Gaussian noise on each angle, then canonicalized.
EpochMeasurements generate_model1(const Eigen::Vector3d& target,
                                  const std::vector<Anchor>& anchors,
                                  const AeNoiseParams& params, Rng& rng);

// Model II: a VMF draw about the rotated true direction per anchor,
// reported as its canonical angles.
EpochMeasurements generate_model2(const Eigen::Vector3d& target,
                                  const std::vector<Anchor>& anchors,
                                  double kappa, Rng& rng);

// Stacked unit-vector measurement function h(p) = [R_j d_j] and its
// 3n-by-3 Jacobian in the target position.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> measurement_function_and_jacobian(
    const Eigen::Vector3d& target, const std::vector<Anchor>& anchors);

// 2x3 Jacobian of the azimuth/elevation prediction in the target
// position. Throws PoleSingularity when the horizontal range in the
// anchor frame is below 1e-12.
Eigen::Matrix<double, 2, 3> ae_jacobian(const Eigen::Vector3d& target,
                                        const Anchor& anchor);

// Elevation-indexed std table on a 1-degree grid covering [-90, 90].
class AdaptiveStdTable {
 public:
  static constexpr int kNodes = 181;

  AdaptiveStdTable() : nodes_(kNodes) {}

  // Nearest-node lookup; exact midpoints resolve toward 0 degrees.
  // Throws InvalidArgument when elevation leaves [-pi/2, pi/2].
  AeNoiseParams lookup(double elevation_rad) const;

  AeNoiseParams& node(int index) { return nodes_.at(index); }
  const AeNoiseParams& node(int index) const { return nodes_.at(index); }
  static double node_elevation_deg(int index) { return index - 90.0; }

  void save_csv(const std::string& path) const;
  static AdaptiveStdTable load_csv(const std::string& path);

  AeNoiseParams base;  // params the table was built from, if built here

 private:
  std::vector<AeNoiseParams> nodes_;
};

// Monte Carlo table of effective canonical-angle stds per elevation.
// Draws one pool of n_mc noise pairs and reuses it across nodes so the
// azimuth column is monotone in |elevation| by construction.
AdaptiveStdTable build_adaptive_table(const AeNoiseParams& base, int n_mc,
                                      std::uint64_t seed);

// Zero-mean ML fit of per-angle stds from (true direction, measured
// angles) pairs; azimuth residuals are wrapped. Throws InvalidArgument on
// empty input. Results are floored at 1e-9.
AeNoiseParams fit_ae_ml(
    const std::vector<std::pair<UnitVector3, AoaAngles>>& samples);

}  // namespace vmfaoa
