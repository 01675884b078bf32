#include "vmfaoa/filters.hpp"

#include <cmath>

#include "vmfaoa/kernels.hpp"
#include "vmfaoa/vmf.hpp"

namespace vmfaoa {

namespace {

constexpr double kPi = 3.14159265358979323846;

double wrap(double a) {
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

Eigen::Vector3d position_of(const Eigen::VectorXd& mean,
                            const std::array<int, 3>& idx) {
  return {mean(idx[0]), mean(idx[1]), mean(idx[2])};
}

// Symmetrize and clip negative eigenvalues so the covariance stays PSD.
void enforce_spd(Eigen::MatrixXd& M) {
  M = ((M + M.transpose()) * 0.5).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.info() != Eigen::Success)
    throw NumericalFailure("covariance eigendecomposition failed");
  if (es.eigenvalues().minCoeff() >= 0.0) return;
  const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
  M = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
  M = ((M + M.transpose()) * 0.5).eval();
}

// PSD square root for sampling; tolerates semidefinite inputs.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      ((M + M.transpose()) * 0.5).eval());
  if (es.info() != Eigen::Success)
    throw NumericalFailure("covariance eigendecomposition failed");
  if (es.eigenvalues().minCoeff() < -1e-9)
    throw InvalidArgument("covariance is not PSD");
  return es.eigenvectors() *
         es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

void check_epoch(const EpochMeasurements& epoch,
                 const std::vector<Anchor>& anchors) {
  for (const AoaMeasurement& m : epoch) {
    if (m.anchor < 0 || m.anchor >= static_cast<int>(anchors.size()))
      throw InvalidArgument("measurement references unknown anchor");
    if (!std::isfinite(m.angles.azimuth) || !std::isfinite(m.angles.elevation))
      throw InvalidArgument("measurement has non-finite angles");
  }
}

AeNoiseParams ae_sigma(const AeNoiseSource& noise, double elevation) {
  if (const auto* fixed = std::get_if<AeNoiseParams>(&noise)) return *fixed;
  const auto* table = std::get<const AdaptiveStdTable*>(noise);
  if (table == nullptr)
    throw InvalidArgument("adaptive noise source is null");
  return table->lookup(elevation);
}

void check_particles(const ParticleSet& p, const std::array<int, 3>& idx) {
  if (p.states.rows() == 0 || p.states.rows() != p.weights.size())
    throw InvalidArgument("particle set: states/weights size mismatch");
  for (int k : idx)
    if (k < 0 || k >= p.states.cols())
      throw InvalidArgument("particle set: bad position index");
}

// Normalizes exp(logw), forms the pre-resampling estimate, and resamples
// when the effective sample size drops below the threshold.
PfUpdateInfo finalize_pf(ParticleSet& p, Eigen::VectorXd& logw,
                         double resample_fraction, Rng& rng,
                         const std::array<int, 3>& idx) {
  const auto n = static_cast<std::size_t>(logw.size());
  const double maxlw = kernels::max_value(logw.data(), n);
  if (!std::isfinite(maxlw))
    throw DegenerateWeights("all particle log-weights are non-finite");
  Eigen::VectorXd w = (logw.array() - maxlw).exp();
  const double total = kernels::sum(w.data(), n);
  if (!(total > 0.0) || !std::isfinite(total))
    throw DegenerateWeights("particle weights sum to zero");
  w /= total;

  PfUpdateInfo info;
  for (int c = 0; c < 3; ++c)
    info.estimate(c) =
        kernels::dot(w.data(), p.states.col(idx[c]).data(), n);
  info.ess = 1.0 / kernels::sum_squares(w.data(), n);
  p.weights = w;
  if (info.ess < resample_fraction * static_cast<double>(n)) {
    resample(p, rng);
    info.resampled = true;
  }
  return info;
}

}  // namespace

double effective_sample_size(const Eigen::VectorXd& weights) {
  if (weights.size() == 0) throw InvalidArgument("ess: empty weights");
  const auto n = static_cast<std::size_t>(weights.size());
  const double s = kernels::sum(weights.data(), n);
  const double ss = kernels::sum_squares(weights.data(), n);
  if (!(s > 0.0) || !(ss > 0.0) || !std::isfinite(ss))
    throw InvalidArgument("ess: weights must be nonnegative with positive sum");
  return s * s / ss;
}

void resample(ParticleSet& particles, Rng& rng) {
  const auto n = particles.weights.size();
  if (n == 0 || particles.states.rows() != n)
    throw InvalidArgument("resample: states/weights size mismatch");
  const double total = particles.weights.sum();
  if (!(total > 0.0) || !std::isfinite(total))
    throw DegenerateWeights("resample: weights sum to zero");

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u0 = unif(rng);
  Eigen::MatrixXd picked(n, particles.states.cols());
  Eigen::Index j = 0;
  double cum = particles.weights(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double target = total * (u0 + static_cast<double>(i)) /
                          static_cast<double>(n);
    while (cum < target && j + 1 < n) cum += particles.weights(++j);
    picked.row(i) = particles.states.row(j);
  }
  particles.states = std::move(picked);
  particles.weights.setConstant(1.0 / static_cast<double>(n));
}

void predict(GaussianBelief& belief, const StateSpaceModel& model) {
  belief.mean = model.A * belief.mean;
  belief.cov = model.A * belief.cov * model.A.transpose() + model.Q;
  belief.cov = ((belief.cov + belief.cov.transpose()) * 0.5).eval();
}

void predict(ParticleSet& particles, const StateSpaceModel& model, Rng& rng) {
  const Eigen::Index n = particles.states.rows();
  const Eigen::Index d = particles.states.cols();
  if (model.A.rows() != d || model.Q.rows() != d)
    throw InvalidArgument("predict: model dimension mismatch");
  const Eigen::MatrixXd L = psd_sqrt(model.Q);
  Eigen::MatrixXd z(n, d);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index k = 0; k < d; ++k)
    for (Eigen::Index i = 0; i < n; ++i) z(i, k) = normal(rng);
  particles.states = particles.states * model.A.transpose() + z * L.transpose();
}

PfUpdateInfo pf_update_vmf(ParticleSet& particles, const EpochMeasurements& epoch,
                           const std::vector<Anchor>& anchors, double kappa,
                           double resample_fraction, Rng& rng) {
  validate_anchors(anchors);
  check_epoch(epoch, anchors);
  static const std::array<int, 3> idx{0, 1, 2};
  check_particles(particles, idx);
  if (!(kappa >= 0.0) || !std::isfinite(kappa))
    throw InvalidArgument("pf_update_vmf: kappa must be finite and >= 0");

  const auto n = static_cast<std::size_t>(particles.states.rows());
  Eigen::VectorXd logw = particles.weights.array().log();
  const double* px = particles.states.col(0).data();
  const double* py = particles.states.col(1).data();
  const double* pz = particles.states.col(2).data();
  for (const AoaMeasurement& m : epoch) {
    const Anchor& anchor = anchors[m.anchor];
    // u^T R d == (R^T u)^T d, so fold the rotation into the measurement.
    const UnitVector3 v =
        anchor.orientation.transpose() * to_unit_vector(m.angles);
    kernels::vmf_logw_accum(px, py, pz, n, anchor.position.x(),
                            anchor.position.y(), anchor.position.z(), v.x(),
                            v.y(), v.z(), kappa, logw.data());
  }
  return finalize_pf(particles, logw, resample_fraction, rng, idx);
}

PfUpdateInfo pf_update_ae(ParticleSet& particles, const EpochMeasurements& epoch,
                          const std::vector<Anchor>& anchors,
                          const AeNoiseSource& noise, double resample_fraction,
                          Rng& rng) {
  validate_anchors(anchors);
  check_epoch(epoch, anchors);
  static const std::array<int, 3> idx{0, 1, 2};
  check_particles(particles, idx);

  const auto n = static_cast<std::size_t>(particles.states.rows());
  const bool adaptive = std::holds_alternative<const AdaptiveStdTable*>(noise);
  Eigen::VectorXd logw = particles.weights.array().log();
  const double* px = particles.states.col(0).data();
  const double* py = particles.states.col(1).data();
  const double* pz = particles.states.col(2).data();
  for (const AoaMeasurement& m : epoch) {
    const Anchor& anchor = anchors[m.anchor];
    const bool rotated = !anchor.orientation.isIdentity(0.0);
    const AeNoiseParams fixed = adaptive ? AeNoiseParams{} : ae_sigma(noise, 0.0);
    const double ya = m.angles.azimuth;
    const double ye = m.angles.elevation;
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::Vector3d d(px[i] - anchor.position.x(),
                        py[i] - anchor.position.y(),
                        pz[i] - anchor.position.z());
      if (rotated) d = anchor.orientation * d;
      const double h = std::hypot(d.x(), d.y());
      const double pred_azi = h < kPoleEps ? 0.0 : std::atan2(d.y(), d.x());
      const double pred_ele = std::atan2(d.z(), h);
      const AeNoiseParams s = adaptive ? ae_sigma(noise, pred_ele) : fixed;
      const double ra = wrap(ya - pred_azi);
      const double re = ye - pred_ele;
      logw(i) -= 0.5 * (ra * ra / (s.sigma_azi * s.sigma_azi) +
                        re * re / (s.sigma_ele * s.sigma_ele)) +
                 std::log(s.sigma_azi) + std::log(s.sigma_ele);
    }
  }
  return finalize_pf(particles, logw, resample_fraction, rng, idx);
}

void kalman_update(GaussianBelief& belief, const Eigen::VectorXd& innovation,
                   const Eigen::MatrixXd& H, const Eigen::MatrixXd& R) {
  if (H.rows() != innovation.size() || H.cols() != belief.mean.size() ||
      R.rows() != innovation.size() || R.cols() != innovation.size())
    throw InvalidArgument("kalman_update: dimension mismatch");
  const Eigen::MatrixXd PHt = belief.cov * H.transpose();
  const Eigen::MatrixXd S = H * PHt + R;
  const Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success)
    throw NumericalFailure("kalman_update: innovation covariance not PD");
  const Eigen::MatrixXd K = llt.solve(PHt.transpose()).transpose();
  belief.mean += K * innovation;
  belief.cov -= K * S * K.transpose();
  enforce_spd(belief.cov);
}

std::pair<double, double> ut_weights(int n, double lambda) {
  if (n <= 0 || !(static_cast<double>(n) + lambda > 0.0))
    throw InvalidArgument("ut_weights: need n + lambda > 0");
  const double c = static_cast<double>(n) + lambda;
  return {lambda / c, 1.0 / (2.0 * c)};
}

namespace {

// Sigma points as columns: [m, m + L_i, m - L_i] with L L^T = (n+l) P.
Eigen::MatrixXd sigma_points(const GaussianBelief& b, double lambda) {
  const auto n = b.mean.size();
  const Eigen::LLT<Eigen::MatrixXd> llt(
      ((static_cast<double>(n) + lambda) * b.cov).eval());
  if (llt.info() != Eigen::Success)
    throw NumericalFailure("sigma points: covariance not PD");
  const Eigen::MatrixXd L = llt.matrixL();
  Eigen::MatrixXd pts(n, 2 * n + 1);
  pts.col(0) = b.mean;
  for (Eigen::Index i = 0; i < n; ++i) {
    pts.col(1 + i) = b.mean + L.col(i);
    pts.col(1 + n + i) = b.mean - L.col(i);
  }
  return pts;
}

// Stacked rotated unit vectors for the anchors present in the epoch.
Eigen::VectorXd stacked_directions(const Eigen::Vector3d& p,
                                   const EpochMeasurements& epoch,
                                   const std::vector<Anchor>& anchors) {
  Eigen::VectorXd z(3 * epoch.size());
  for (std::size_t j = 0; j < epoch.size(); ++j) {
    const Anchor& anchor = anchors[epoch[j].anchor];
    const Eigen::Vector3d delta = p - anchor.position;
    const double r = delta.norm();
    if (r < 1e-12)
      throw DegenerateGeometry("unit-vector prediction at anchor position");
    z.segment<3>(3 * j) = anchor.orientation * (delta / r);
  }
  return z;
}

struct AePrediction {
  double azimuth = 0.0;
  double elevation = 0.0;
  double h = 0.0;  // horizontal range in the anchor frame
  Eigen::Vector3d local = Eigen::Vector3d::Zero();
  double r2 = 0.0;
};

AePrediction ae_predict_local(const Eigen::Vector3d& p, const Anchor& anchor) {
  AePrediction out;
  out.local = anchor.orientation * (p - anchor.position);
  out.h = std::hypot(out.local.x(), out.local.y());
  out.r2 = out.local.squaredNorm();
  out.azimuth =
      out.h < kPoleEps ? 0.0 : std::atan2(out.local.y(), out.local.x());
  out.elevation = std::atan2(out.local.z(), out.h);
  return out;
}

}  // namespace

void ekf_update_vmf(GaussianBelief& belief, const EpochMeasurements& epoch,
                    const std::vector<Anchor>& anchors, double kappa,
                    const std::array<int, 3>& position_indices) {
  validate_anchors(anchors);
  check_epoch(epoch, anchors);
  if (!(kappa >= 0.0) || !std::isfinite(kappa))
    throw InvalidArgument("ekf_update_vmf: kappa must be finite and >= 0");
  if (epoch.empty() || kappa == 0.0) return;  // uninformative likelihood

  const auto nx = belief.mean.size();
  const auto m = static_cast<Eigen::Index>(epoch.size());
  const Eigen::Vector3d p = position_of(belief.mean, position_indices);
  Eigen::VectorXd v(3 * m);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(3 * m, nx);
  for (Eigen::Index j = 0; j < m; ++j) {
    const Anchor& anchor = anchors[epoch[j].anchor];
    const Eigen::Vector3d delta = p - anchor.position;
    const double r = delta.norm();
    if (r < 1e-12)
      throw DegenerateGeometry("ekf_update_vmf: mean at anchor position");
    const UnitVector3 d = delta / r;
    v.segment<3>(3 * j) =
        to_unit_vector(epoch[j].angles) - anchor.orientation * d;
    const Eigen::Matrix3d jac =
        anchor.orientation * (Eigen::Matrix3d::Identity() - d * d.transpose()) /
        r;
    for (int c = 0; c < 3; ++c)
      H.block(3 * j, position_indices[c], 3, 1) = jac.col(c);
  }
  const Eigen::MatrixXd R =
      Eigen::MatrixXd::Identity(3 * m, 3 * m) / kappa;
  kalman_update(belief, v, H, R);
}

void ekf_update_ae(GaussianBelief& belief, const EpochMeasurements& epoch,
                   const std::vector<Anchor>& anchors, const AeNoiseSource& noise,
                   const std::array<int, 3>& position_indices) {
  validate_anchors(anchors);
  check_epoch(epoch, anchors);
  if (epoch.empty()) return;

  const auto nx = belief.mean.size();
  const Eigen::Vector3d p = position_of(belief.mean, position_indices);
  std::vector<double> innovations;
  std::vector<double> variances;
  std::vector<Eigen::RowVector3d> rows3;
  for (const AoaMeasurement& meas : epoch) {
    const Anchor& anchor = anchors[meas.anchor];
    const AePrediction pred = ae_predict_local(p, anchor);
    const AeNoiseParams s = ae_sigma(noise, pred.elevation);
    const Eigen::Vector3d& d = pred.local;
    // Azimuth row is skipped near the pole where its Jacobian blows up.
    if (pred.h >= 1e-9) {
      Eigen::RowVector3d ja(-d.y() / (pred.h * pred.h),
                            d.x() / (pred.h * pred.h), 0.0);
      rows3.push_back(ja * anchor.orientation);
      innovations.push_back(wrap(meas.angles.azimuth - pred.azimuth));
      variances.push_back(s.sigma_azi * s.sigma_azi);
    }
    Eigen::RowVector3d je = Eigen::RowVector3d::Zero();
    if (pred.h >= 1e-12) {
      je << -d.x() * d.z() / (pred.r2 * pred.h),
          -d.y() * d.z() / (pred.r2 * pred.h), pred.h / pred.r2;
      je *= anchor.orientation;
    }
    rows3.push_back(je);
    innovations.push_back(wrap(meas.angles.elevation - pred.elevation));
    variances.push_back(s.sigma_ele * s.sigma_ele);
  }

  const auto rows = static_cast<Eigen::Index>(innovations.size());
  Eigen::VectorXd v(rows);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(rows, nx);
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(rows, rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    v(i) = innovations[i];
    R(i, i) = variances[i];
    for (int c = 0; c < 3; ++c) H(i, position_indices[c]) = rows3[i](c);
  }
  kalman_update(belief, v, H, R);
}

void ukf_update_vmf(GaussianBelief& belief, const EpochMeasurements& epoch,
                    const std::vector<Anchor>& anchors, double kappa,
                    double lambda,
                    const std::array<int, 3>& position_indices) {
  validate_anchors(anchors);
  check_epoch(epoch, anchors);
  if (!(kappa >= 0.0) || !std::isfinite(kappa))
    throw InvalidArgument("ukf_update_vmf: kappa must be finite and >= 0");
  if (epoch.empty() || kappa == 0.0) return;

  const auto nx = belief.mean.size();
  const auto [w0, wi] = ut_weights(static_cast<int>(nx), lambda);
  const Eigen::MatrixXd X = sigma_points(belief, lambda);
  const auto cols = X.cols();
  const auto ny = static_cast<Eigen::Index>(3 * epoch.size());

  Eigen::MatrixXd Z(ny, cols);
  for (Eigen::Index i = 0; i < cols; ++i)
    Z.col(i) = stacked_directions(position_of(X.col(i), position_indices),
                                  epoch, anchors);
  Eigen::VectorXd wts(cols);
  wts(0) = w0;
  wts.tail(cols - 1).setConstant(wi);
  const Eigen::VectorXd zbar = Z * wts;

  Eigen::MatrixXd S = Eigen::MatrixXd::Identity(ny, ny) / kappa;
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(nx, ny);
  for (Eigen::Index i = 0; i < cols; ++i) {
    const Eigen::VectorXd dz = Z.col(i) - zbar;
    S += wts(i) * dz * dz.transpose();
    C += wts(i) * (X.col(i) - belief.mean) * dz.transpose();
  }

  Eigen::VectorXd y(ny);
  for (std::size_t j = 0; j < epoch.size(); ++j)
    y.segment<3>(3 * j) = to_unit_vector(epoch[j].angles);

  const Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success)
    throw NumericalFailure("ukf_update_vmf: innovation covariance not PD");
  const Eigen::MatrixXd K = llt.solve(C.transpose()).transpose();
  belief.mean += K * (y - zbar);
  belief.cov -= K * S * K.transpose();
  enforce_spd(belief.cov);
}

void ukf_update_ae(GaussianBelief& belief, const EpochMeasurements& epoch,
                   const std::vector<Anchor>& anchors, const AeNoiseSource& noise,
                   double lambda,
                   const std::array<int, 3>& position_indices) {
  validate_anchors(anchors);
  check_epoch(epoch, anchors);
  if (epoch.empty()) return;

  const auto nx = belief.mean.size();
  const auto [w0, wi] = ut_weights(static_cast<int>(nx), lambda);
  const Eigen::MatrixXd X = sigma_points(belief, lambda);
  const auto cols = X.cols();
  const auto nm = static_cast<Eigen::Index>(epoch.size());
  Eigen::VectorXd wts(cols);
  wts(0) = w0;
  wts.tail(cols - 1).setConstant(wi);

  Eigen::MatrixXd azi(nm, cols), ele(nm, cols);
  for (Eigen::Index i = 0; i < cols; ++i) {
    const Eigen::Vector3d pos = position_of(X.col(i), position_indices);
    for (Eigen::Index j = 0; j < nm; ++j) {
      const AePrediction pred = ae_predict_local(pos, anchors[epoch[j].anchor]);
      azi(j, i) = pred.azimuth;
      ele(j, i) = pred.elevation;
    }
  }

  // Predicted measurement: circular mean per azimuth, plain mean per
  // elevation, stacked [azi_0, ele_0, azi_1, ele_1, ...].
  const auto ny = 2 * nm;
  Eigen::VectorXd zbar(ny);
  for (Eigen::Index j = 0; j < nm; ++j) {
    double cs = 0.0, sn = 0.0;
    for (Eigen::Index i = 0; i < cols; ++i) {
      cs += wts(i) * std::cos(azi(j, i));
      sn += wts(i) * std::sin(azi(j, i));
    }
    zbar(2 * j) = std::atan2(sn, cs);
    zbar(2 * j + 1) = ele.row(j) * wts;
  }

  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(ny, ny);
  for (Eigen::Index j = 0; j < nm; ++j) {
    if (const auto* fixed = std::get_if<AeNoiseParams>(&noise)) {
      R(2 * j, 2 * j) = fixed->sigma_azi * fixed->sigma_azi;
      R(2 * j + 1, 2 * j + 1) = fixed->sigma_ele * fixed->sigma_ele;
    } else {
      // UT-weighted average of per-sigma-point variances.
      double va = 0.0, ve = 0.0;
      for (Eigen::Index i = 0; i < cols; ++i) {
        const AeNoiseParams s = ae_sigma(noise, ele(j, i));
        va += wts(i) * s.sigma_azi * s.sigma_azi;
        ve += wts(i) * s.sigma_ele * s.sigma_ele;
      }
      R(2 * j, 2 * j) = va;
      R(2 * j + 1, 2 * j + 1) = ve;
    }
  }

  Eigen::MatrixXd S = R;
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(nx, ny);
  Eigen::VectorXd dz(ny);
  for (Eigen::Index i = 0; i < cols; ++i) {
    for (Eigen::Index j = 0; j < nm; ++j) {
      dz(2 * j) = wrap(azi(j, i) - zbar(2 * j));
      dz(2 * j + 1) = ele(j, i) - zbar(2 * j + 1);
    }
    S += wts(i) * dz * dz.transpose();
    C += wts(i) * (X.col(i) - belief.mean) * dz.transpose();
  }

  Eigen::VectorXd v(ny);
  for (Eigen::Index j = 0; j < nm; ++j) {
    v(2 * j) = wrap(epoch[j].angles.azimuth - zbar(2 * j));
    v(2 * j + 1) = epoch[j].angles.elevation - zbar(2 * j + 1);
  }

  const Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success)
    throw NumericalFailure("ukf_update_ae: innovation covariance not PD");
  const Eigen::MatrixXd K = llt.solve(C.transpose()).transpose();
  belief.mean += K * v;
  belief.cov -= K * S * K.transpose();
  enforce_spd(belief.cov);
}

std::vector<Eigen::Vector3d> run_filter(const FilterConfig& config,
                                        const StateSpaceModel& model,
                                        const GaussianBelief& prior,
                                        const std::vector<EpochMeasurements>& sequence,
                                        const std::vector<Anchor>& anchors,
                                        std::uint64_t seed) {
  validate_anchors(anchors);
  const auto nx = prior.mean.size();
  if (model.A.rows() != nx || model.A.cols() != nx || model.Q.rows() != nx ||
      prior.cov.rows() != nx || prior.cov.cols() != nx)
    throw InvalidArgument("run_filter: dimension mismatch");
  for (int k : model.position_indices)
    if (k < 0 || k >= nx) throw InvalidArgument("run_filter: bad position index");
  if (config.kind == FilterKind::pf && config.particle_count < 1)
    throw InvalidArgument("run_filter: particle_count must be >= 1");
  if (config.resample_fraction < 0.0 || config.resample_fraction > 1.0)
    throw InvalidArgument("run_filter: resample_fraction outside [0, 1]");

  Rng rng = make_rng(seed);
  std::vector<Eigen::Vector3d> estimates;
  estimates.reserve(sequence.size());

  ParticleSet particles;
  GaussianBelief belief;
  if (config.kind == FilterKind::pf) {
    const Eigen::MatrixXd L = psd_sqrt(prior.cov);
    const Eigen::Index n = config.particle_count;
    Eigen::MatrixXd z(n, nx);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index k = 0; k < nx; ++k)
      for (Eigen::Index i = 0; i < n; ++i) z(i, k) = normal(rng);
    particles.states =
        (z * L.transpose()).rowwise() + prior.mean.transpose();
    particles.weights =
        Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  } else {
    belief = prior;
  }

  for (std::size_t k = 0; k < sequence.size(); ++k) {
    try {
      Eigen::Vector3d estimate;
      if (config.kind == FilterKind::pf) {
        predict(particles, model, rng);
        const PfUpdateInfo info =
            config.model == MeasurementModel::vmf
                ? pf_update_vmf(particles, sequence[k], anchors, config.kappa,
                                config.resample_fraction, rng)
                : pf_update_ae(particles, sequence[k], anchors, config.ae,
                               config.resample_fraction, rng);
        estimate = info.estimate;
      } else {
        predict(belief, model);
        if (config.kind == FilterKind::ekf) {
          if (config.model == MeasurementModel::vmf)
            ekf_update_vmf(belief, sequence[k], anchors, config.kappa,
                           model.position_indices);
          else
            ekf_update_ae(belief, sequence[k], anchors, config.ae,
                          model.position_indices);
        } else {
          if (config.model == MeasurementModel::vmf)
            ukf_update_vmf(belief, sequence[k], anchors, config.kappa,
                           config.ukf_lambda, model.position_indices);
          else
            ukf_update_ae(belief, sequence[k], anchors, config.ae,
                          config.ukf_lambda, model.position_indices);
        }
        estimate = position_of(belief.mean, model.position_indices);
      }
      if (!estimate.allFinite())
        throw NumericalFailure("estimate is non-finite");
      estimates.push_back(estimate);
    } catch (const FilterDivergence&) {
      throw;
    } catch (const Error& e) {
      throw FilterDivergence(static_cast<int>(k), e.what());
    }
  }
  return estimates;
}

}  // namespace vmfaoa
