#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "mieforce/errors.hpp"

namespace mieforce {

using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using Mat3c = Eigen::Matrix3cd;

/// Right-handed orthonormal frame (e1, e2, axis). For the +z axis this is the
/// Cartesian frame itself.
struct Frame {
  Vec3 e1;
  Vec3 e2;
  Vec3 e3;

  Vec3 to_world(const Vec3& local) const { return local.x() * e1 + local.y() * e2 + local.z() * e3; }
};

inline Vec3 normalized_axis(const Vec3& axis) {
  const double norm = axis.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw DomainError("axis must be a non-zero finite vector");
  return axis / norm;
}

inline Frame frame_about(const Vec3& axis) {
  const Vec3 a = normalized_axis(axis);
  if (a.isApprox(Vec3::UnitZ(), 0.0)) return {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  // Seed with the Cartesian axis least aligned with a.
  Vec3 seed = Vec3::UnitX();
  if (std::abs(a.y()) < std::abs(a.x()) && std::abs(a.y()) <= std::abs(a.z())) seed = Vec3::UnitY();
  else if (std::abs(a.z()) < std::abs(a.x())) seed = Vec3::UnitZ();
  const Vec3 e1 = (seed - seed.dot(a) * a).normalized();
  const Vec3 e2 = a.cross(e1);
  return {e1, e2, a};
}

/// Polar angle in [0, pi] and azimuth in (-pi, pi] of a unit vector. The poles
/// report azimuth 0.
struct SphericalAngles {
  double theta;
  double phi;
};

inline SphericalAngles spherical_angles(const Vec3& dir) {
  const double rho = std::hypot(dir.x(), dir.y());
  return {std::atan2(rho, dir.z()), rho == 0.0 ? 0.0 : std::atan2(dir.y(), dir.x())};
}

/// d x v for a real d and complex v. Eigen's cross() conjugates complex
/// results, which is not the algebraic cross product.
inline CVec3 cross(const Vec3& d, const CVec3& v) {
  return {d.y() * v.z() - d.z() * v.y(), d.z() * v.x() - d.x() * v.z(), d.x() * v.y() - d.y() * v.x()};
}

/// Angle between two unit vectors, accurate for nearly parallel vectors.
inline double angle_between(const Vec3& u, const Vec3& v) {
  return std::atan2(u.cross(v).norm(), u.dot(v));
}

}  // namespace mieforce
