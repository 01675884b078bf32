#include "vmfaoa/vmf.hpp"

#include <cmath>

namespace vmfaoa {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLog4Pi = 2.5310242469692907;  // log(4*pi)

void validate(const VmfDistribution& d) {
  if (!std::isfinite(d.kappa) || d.kappa < 0.0)
    throw InvalidArgument("vmf: kappa must be finite and >= 0");
  if (!d.mu.allFinite() || std::abs(d.mu.norm() - 1.0) > 1e-9)
    throw InvalidArgument("vmf: mu must be a unit vector");
}

}  // namespace

double log_vmf_normalizer(double kappa) {
  if (!std::isfinite(kappa) || kappa < 0.0)
    throw InvalidArgument("vmf: kappa must be finite and >= 0");
  if (kappa == 0.0) return -kLog4Pi;
  // kappa / (4 pi sinh kappa) with sinh expanded to avoid overflow.
  return std::log(kappa) - kLog4Pi - kappa - std::log(-std::expm1(-2.0 * kappa) / 2.0);
}

double vmf_normalizer(double kappa) { return std::exp(log_vmf_normalizer(kappa)); }

double vmf_log_pdf(const VmfDistribution& d, const UnitVector3& x) {
  validate(d);
  if (!x.allFinite() || std::abs(x.norm() - 1.0) > 1e-9)
    throw InvalidArgument("vmf_log_pdf: x must be a unit vector");
  return log_vmf_normalizer(d.kappa) + d.kappa * d.mu.dot(x);
}

double mean_resultant_length(double kappa) {
  if (!std::isfinite(kappa) || kappa < 0.0)
    throw InvalidArgument("vmf: kappa must be finite and >= 0");
  if (kappa < 1e-4) return kappa / 3.0 * (1.0 - kappa * kappa / 15.0);
  return 1.0 / std::tanh(kappa) - 1.0 / kappa;
}

double sigma_to_kappa(double sigma_azi, double sigma_ele) {
  if (!(sigma_azi > 0.0) || !(sigma_ele > 0.0) || !std::isfinite(sigma_azi) ||
      !std::isfinite(sigma_ele))
    throw InvalidArgument("sigma_to_kappa: stds must be finite and > 0");
  const double s = std::max(sigma_azi, sigma_ele);
  return 1.0 / (s * s);
}

double kappa_to_sigma(double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa))
    throw InvalidArgument("kappa_to_sigma: kappa must be finite and > 0");
  return std::sqrt(1.0 / kappa);
}

std::pair<UnitVector3, UnitVector3> tangent_basis(const UnitVector3& mu) {
  const UnitVector3 axis =
      std::abs(mu.z()) < 0.9 ? UnitVector3::UnitZ() : UnitVector3::UnitX();
  const UnitVector3 t1 = mu.cross(axis).normalized();
  const UnitVector3 t2 = mu.cross(t1);
  return {t1, t2};
}

UnitVector3 vmf_sample(const VmfDistribution& d, Rng& rng) {
  validate(d);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  if (d.kappa == 0.0) {
    const double z = 2.0 * unif(rng) - 1.0;
    const double phi = 2.0 * kPi * unif(rng);
    const double h = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {h * std::cos(phi), h * std::sin(phi), z};
  }

  // Rejection sampler for the cosine w of the angle to mu (Wood-style
  // envelope; on S^2 the beta variate degenerates to a uniform).
  const double kappa = d.kappa;
  const double b = 1.0 / (kappa + std::sqrt(kappa * kappa + 1.0));
  const double x0 = (1.0 - b) / (1.0 + b);
  const double c = kappa * x0 + 2.0 * std::log(1.0 - x0 * x0);
  double w = 0.0;
  for (;;) {
    const double z = unif(rng);
    const double u = unif(rng);
    w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
    if (kappa * w + 2.0 * std::log(1.0 - x0 * w) - c >= std::log(u)) break;
  }

  const double phi = 2.0 * kPi * unif(rng);
  const auto [t1, t2] = tangent_basis(d.mu);
  const double s = std::sqrt(std::max(0.0, 1.0 - w * w));
  UnitVector3 x = s * (std::cos(phi) * t1 + std::sin(phi) * t2) + w * d.mu;
  return x.normalized();
}

}  // namespace vmfaoa
