#include "vmfaoa/sensor.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "vmfaoa/vmf.hpp"

namespace vmfaoa {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDegPerRad = 180.0 / kPi;

Eigen::Vector3d offset_or_throw(const Eigen::Vector3d& target,
                                const Anchor& anchor) {
  if (!target.allFinite())
    throw InvalidArgument("true_direction: non-finite target");
  const Eigen::Vector3d delta = target - anchor.position;
  if (delta.norm() < 1e-12)
    throw DegenerateGeometry("true_direction: target coincides with anchor");
  return delta;
}

}  // namespace

void validate_anchors(const std::vector<Anchor>& anchors) {
  if (anchors.empty()) throw InvalidArgument("anchors: empty");
  for (const Anchor& a : anchors) {
    if (!a.position.allFinite())
      throw InvalidArgument("anchors: non-finite position");
    if (!is_rotation(a.orientation))
      throw InvalidArgument("anchors: orientation is not a rotation");
  }
}

UnitVector3 true_direction(const Eigen::Vector3d& target, const Anchor& anchor) {
  const Eigen::Vector3d delta = offset_or_throw(target, anchor);
  return delta / delta.norm();
}

AoaAngles ae_predict(const Eigen::Vector3d& target, const Anchor& anchor) {
  const Eigen::Vector3d delta = offset_or_throw(target, anchor);
  const Eigen::Vector3d local = anchor.orientation * delta;
  return to_angles(local / local.norm());
}

EpochMeasurements generate_model1(const Eigen::Vector3d& target,
                                  const std::vector<Anchor>& anchors,
                                  const AeNoiseParams& params, Rng& rng) {
  validate_anchors(anchors);
  if (!(params.sigma_azi > 0.0) || !(params.sigma_ele > 0.0))
    throw InvalidArgument("generate_model1: stds must be > 0");
  std::normal_distribution<double> noise(0.0, 1.0);
  EpochMeasurements out;
  out.reserve(anchors.size());
  for (std::size_t j = 0; j < anchors.size(); ++j) {
    const AoaAngles base = ae_predict(target, anchors[j]);
    const double a = base.azimuth + params.sigma_azi * noise(rng);
    const double e = base.elevation + params.sigma_ele * noise(rng);
    out.push_back({static_cast<int>(j), canonicalize(a, e)});
  }
  return out;
}

EpochMeasurements generate_model2(const Eigen::Vector3d& target,
                                  const std::vector<Anchor>& anchors,
                                  double kappa, Rng& rng) {
  validate_anchors(anchors);
  if (!(kappa > 0.0) || !std::isfinite(kappa))
    throw InvalidArgument("generate_model2: kappa must be finite and > 0");
  EpochMeasurements out;
  out.reserve(anchors.size());
  for (std::size_t j = 0; j < anchors.size(); ++j) {
    const UnitVector3 mu =
        (anchors[j].orientation * true_direction(target, anchors[j])).normalized();
    const UnitVector3 u = vmf_sample({mu, kappa}, rng);
    out.push_back({static_cast<int>(j), to_angles(u)});
  }
  return out;
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> measurement_function_and_jacobian(
    const Eigen::Vector3d& target, const std::vector<Anchor>& anchors) {
  validate_anchors(anchors);
  const auto n = static_cast<Eigen::Index>(anchors.size());
  Eigen::VectorXd value(3 * n);
  Eigen::MatrixXd jac(3 * n, 3);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Anchor& anchor = anchors[j];
    const Eigen::Vector3d delta = offset_or_throw(target, anchor);
    const double r = delta.norm();
    const UnitVector3 d = delta / r;
    value.segment<3>(3 * j) = anchor.orientation * d;
    jac.block<3, 3>(3 * j, 0) =
        anchor.orientation *
        (Eigen::Matrix3d::Identity() - d * d.transpose()) / r;
  }
  return {value, jac};
}

Eigen::Matrix<double, 2, 3> ae_jacobian(const Eigen::Vector3d& target,
                                        const Anchor& anchor) {
  const Eigen::Vector3d delta = offset_or_throw(target, anchor);
  const Eigen::Vector3d d = anchor.orientation * delta;
  const double h2 = d.x() * d.x() + d.y() * d.y();
  const double h = std::sqrt(h2);
  if (h < 1e-12)
    throw PoleSingularity("ae_jacobian: direction on the +-z pole");
  const double r2 = d.squaredNorm();
  Eigen::Matrix<double, 2, 3> rows;
  rows.row(0) << -d.y() / h2, d.x() / h2, 0.0;
  rows.row(1) << -d.x() * d.z() / (r2 * h), -d.y() * d.z() / (r2 * h), h / r2;
  return rows * anchor.orientation;
}

AeNoiseParams AdaptiveStdTable::lookup(double elevation_rad) const {
  if (!std::isfinite(elevation_rad) ||
      std::abs(elevation_rad) > kPi / 2 + 1e-9)
    throw InvalidArgument("lookup: elevation outside [-pi/2, pi/2]");
  const double deg = elevation_rad * kDegPerRad;
  double node = std::round(deg);
  if (std::abs(deg - std::trunc(deg)) == 0.5) node = std::trunc(deg);
  node = std::min(90.0, std::max(-90.0, node));
  return nodes_[static_cast<int>(node) + 90];
}

void AdaptiveStdTable::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("save_csv: cannot open " + path);
  out << "elevation_deg,sigma_azi_rad,sigma_ele_rad\n";
  char line[128];
  for (int i = 0; i < kNodes; ++i) {
    std::snprintf(line, sizeof(line), "%d,%.12g,%.12g\n", i - 90,
                  nodes_[i].sigma_azi, nodes_[i].sigma_ele);
    out << line;
  }
  if (!out) throw IoError("save_csv: write failed for " + path);
}

AdaptiveStdTable AdaptiveStdTable::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_csv: cannot open " + path);
  std::string header;
  if (!std::getline(in, header) ||
      header != "elevation_deg,sigma_azi_rad,sigma_ele_rad")
    throw IoError("load_csv: bad header in " + path);
  AdaptiveStdTable table;
  std::string line;
  int count = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int deg = 0;
    double sa = 0.0, se = 0.0;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf", &deg, &sa, &se) != 3 ||
        deg != count - 90 || !(sa > 0.0) || !(se > 0.0))
      throw IoError("load_csv: bad row '" + line + "' in " + path);
    table.nodes_[count] = {sa, se};
    ++count;
  }
  if (count != kNodes)
    throw IoError("load_csv: expected 181 rows in " + path);
  return table;
}

AdaptiveStdTable build_adaptive_table(const AeNoiseParams& base, int n_mc,
                                      std::uint64_t seed) {
  if (!(base.sigma_azi > 0.0) || !(base.sigma_ele > 0.0))
    throw InvalidArgument("build_adaptive_table: stds must be > 0");
  if (n_mc < 2) throw InvalidArgument("build_adaptive_table: n_mc too small");

  Rng rng = make_rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> na(n_mc), ne(n_mc);
  for (int i = 0; i < n_mc; ++i) na[i] = base.sigma_azi * noise(rng);
  for (int i = 0; i < n_mc; ++i) ne[i] = base.sigma_ele * noise(rng);

  AdaptiveStdTable table;
  table.base = base;
  std::vector<double> ra(n_mc), re(n_mc);
  for (int k = 0; k < AdaptiveStdTable::kNodes; ++k) {
    const double e = AdaptiveStdTable::node_elevation_deg(k) / kDegPerRad;
    for (int i = 0; i < n_mc; ++i) {
      const AoaAngles c = canonicalize(na[i], e + ne[i]);
      ra[i] = wrap_angle(c.azimuth);
      re[i] = c.elevation - e;
    }
    auto std_of = [n_mc](const std::vector<double>& v) {
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= n_mc;
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      return std::sqrt(ss / n_mc);
    };
    table.node(k) = {std_of(ra), std_of(re)};
  }
  return table;
}

AeNoiseParams fit_ae_ml(
    const std::vector<std::pair<UnitVector3, AoaAngles>>& samples) {
  if (samples.empty()) throw InvalidArgument("fit_ae_ml: empty input");
  double sa = 0.0, se = 0.0;
  for (const auto& [dir, meas] : samples) {
    const AoaAngles truth = to_angles(dir);
    const double da = wrap_angle(meas.azimuth - truth.azimuth);
    const double de = meas.elevation - truth.elevation;
    sa += da * da;
    se += de * de;
  }
  const auto n = static_cast<double>(samples.size());
  return {std::max(1e-9, std::sqrt(sa / n)), std::max(1e-9, std::sqrt(se / n))};
}

}  // namespace vmfaoa
