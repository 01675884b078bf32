#include "vmfaoa/angles.hpp"

#include <cmath>

namespace vmfaoa {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool all_finite(double a, double b) {
  return std::isfinite(a) && std::isfinite(b);
}

}  // namespace

bool AoaAngles::is_canonical(double tol) const {
  if (!all_finite(azimuth, elevation)) return false;
  return azimuth > -kPi - tol && azimuth <= kPi + tol &&
         std::abs(elevation) <= kPi / 2 + tol;
}

double wrap_angle(double a) {
  double r = std::remainder(a, 2.0 * kPi);  // lands in [-pi, pi]
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

AoaAngles canonicalize(double raw_azimuth, double raw_elevation) {
  if (!all_finite(raw_azimuth, raw_elevation))
    throw InvalidArgument("canonicalize: non-finite angle");
  double a = raw_azimuth;
  double e = wrap_angle(raw_elevation);
  if (e > kPi / 2) {
    e = kPi - e;
    a += kPi;
  } else if (e < -kPi / 2) {
    e = -kPi - e;
    a += kPi;
  }
  return {wrap_angle(a), e};
}

UnitVector3 to_unit_vector(double azimuth, double elevation) {
  if (!all_finite(azimuth, elevation))
    throw InvalidArgument("to_unit_vector: non-finite angle");
  const double ce = std::cos(elevation);
  return {std::cos(azimuth) * ce, std::sin(azimuth) * ce, std::sin(elevation)};
}

AoaAngles to_angles(const UnitVector3& u) {
  if (!u.allFinite() || std::abs(u.norm() - 1.0) > 1e-9)
    throw InvalidArgument("to_angles: input is not a unit vector");
  const double h = std::hypot(u.x(), u.y());
  const double azimuth = h < kPoleEps ? 0.0 : wrap_angle(std::atan2(u.y(), u.x()));
  return {azimuth, std::atan2(u.z(), h)};
}

bool is_rotation(const RotationMatrix3& R, double tol) {
  if (!R.allFinite()) return false;
  const RotationMatrix3 G = R.transpose() * R - RotationMatrix3::Identity();
  return G.cwiseAbs().maxCoeff() <= tol && std::abs(R.determinant() - 1.0) <= tol;
}

UnitVector3 rotate(const RotationMatrix3& R, const UnitVector3& u) {
  if (!is_rotation(R)) throw InvalidArgument("rotate: R is not a rotation matrix");
  UnitVector3 v = R * u;
  const double n = v.norm();
  if (n <= 0.0 || !std::isfinite(n))
    throw InvalidArgument("rotate: input has zero or non-finite norm");
  return v / n;
}

double angle_between(const UnitVector3& a, const UnitVector3& b) {
  const double c = a.dot(b) / (a.norm() * b.norm());
  return std::acos(std::min(1.0, std::max(-1.0, c)));
}

}  // namespace vmfaoa
