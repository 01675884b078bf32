#pragma once

#include <Eigen/Dense>

#include "vmfaoa/errors.hpp"

namespace vmfaoa {

using UnitVector3 = Eigen::Vector3d;
using RotationMatrix3 = Eigen::Matrix3d;

// Horizontal ranges below this are treated as "on the pole": to_angles
// reports azimuth 0 there by convention.
inline constexpr double kPoleEps = 1e-14;

// Azimuth/elevation pair. Canonical ranges are azimuth in (-pi, pi] and
// elevation in [-pi/2, pi/2]; a non-canonical pair is permitted only as
// input to canonicalize().
struct AoaAngles {
  double azimuth = 0.0;
  double elevation = 0.0;

  bool is_canonical(double tol = 0.0) const;
};

// Wraps an angle to the principal interval (-pi, pi].
double wrap_angle(double a);

// Folds an arbitrary azimuth/elevation pair onto the canonical ranges,
// preserving the direction it denotes. Throws InvalidArgument on
// non-finite input.
AoaAngles canonicalize(double raw_azimuth, double raw_elevation);
inline AoaAngles canonicalize(const AoaAngles& a) {
  return canonicalize(a.azimuth, a.elevation);
}

// Direction on the unit sphere for the given angles. Total: accepts any
// finite pair, not just canonical ones.
UnitVector3 to_unit_vector(double azimuth, double elevation);
inline UnitVector3 to_unit_vector(const AoaAngles& a) {
  return to_unit_vector(a.azimuth, a.elevation);
}

// Canonical angles of a direction. Throws InvalidArgument unless the
// input has unit norm within 1e-9. On the poles azimuth is reported as 0.
AoaAngles to_angles(const UnitVector3& u);

// True when R is orthogonal with determinant +1 within tol.
bool is_rotation(const RotationMatrix3& R, double tol = 1e-9);

// Applies a rotation to a unit vector, renormalizing the result. Throws
// InvalidArgument when R is not a rotation within 1e-9.
UnitVector3 rotate(const RotationMatrix3& R, const UnitVector3& u);

// Angle in radians between two unit vectors, clamped for safety.
double angle_between(const UnitVector3& a, const UnitVector3& b);

}  // namespace vmfaoa
