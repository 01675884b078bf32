#pragma once

#include "vmfaoa/angles.hpp"
#include "vmfaoa/rng.hpp"

namespace vmfaoa {

// von Mises-Fisher distribution on the unit sphere S^2.
struct VmfDistribution {
  UnitVector3 mu = UnitVector3::UnitX();  // mean direction, unit norm
  double kappa = 0.0;                     // concentration, >= 0
};

// log of the normalizing constant C_kappa, i.e. the density is
// exp(log_vmf_normalizer(kappa) + kappa * mu.dot(x)). Stable for kappa in
// [0, ~1e6]; kappa = 0 gives the uniform density log(1/(4 pi)).
double log_vmf_normalizer(double kappa);
double vmf_normalizer(double kappa);

// Log density at unit vector x. Throws InvalidArgument for non-unit
// inputs or kappa < 0.
double vmf_log_pdf(const VmfDistribution& d, const UnitVector3& x);

// E[mu.dot(x)] = coth(kappa) - 1/kappa, extended with 0 at kappa = 0.
double mean_resultant_length(double kappa);

// kappa = 1 / max(sigma_azi, sigma_ele)^2 (angles in radians).
double sigma_to_kappa(double sigma_azi, double sigma_ele);

// sigma = sqrt(1 / kappa), the per-angle std a VMF with the given
// concentration corresponds to. Throws InvalidArgument for kappa <= 0.
double kappa_to_sigma(double kappa);

// Draws one sample. Uniform on the sphere for kappa = 0; otherwise a
// tangent-normal decomposition with rejection sampling of the cosine.
UnitVector3 vmf_sample(const VmfDistribution& d, Rng& rng);

// Orthonormal basis {t1, t2} of the tangent plane at unit vector mu.
std::pair<UnitVector3, UnitVector3> tangent_basis(const UnitVector3& mu);

}  // namespace vmfaoa
