#pragma once

#include <array>

#include <Eigen/Dense>

#include "mammobot/errors.hpp"

namespace mammobot::geom {

using Eigen::Matrix3d;
using Eigen::Vector2d;
using Eigen::Vector3d;

/// Element of SE(3). Units: translation in mm, rotation dimensionless.
/// Values are immutable by convention after construction and safe to share
/// across threads.
struct RigidTransform {
  Matrix3d rotation = Matrix3d::Identity();
  Vector3d translation = Vector3d::Zero();

  static RigidTransform identity() { return {}; }

  // Orthonormality and det(+1), both to 1e-9.
  bool is_valid(double tol = 1e-9) const;
};

/// Rotation parametrized by a unit axis and an angle in [0, pi].
struct AxisAngle {
  Vector3d axis = Vector3d::UnitZ();
  double angle = 0.0;
};

/// Point of the projective plane. Coordinates are plate mm or mammogram
/// pixels depending on context; w is the homogeneous component.
using HomogeneousPoint2 = Vector3d;

RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);
Vector3d transform_point(const RigidTransform& t, const Vector3d& p);

/// Relative angle between two rotations, radians in [0, pi]. The arccos
/// argument is clamped to [-1, 1] to survive round-off.
double rotation_between(const Matrix3d& a, const Matrix3d& b);

Matrix3d axis_angle_to_rotation(const AxisAngle& aa);

/// Inverse of axis_angle_to_rotation. Round-trips within 1e-10 for
/// angle in (0, pi); at angle == pi the axis sign is not recoverable and
/// either sign may be returned.
AxisAngle rotation_to_axis_angle(const Matrix3d& r);

/// Unconstrained 3-vector form (axis * angle), the solver parametrization.
Matrix3d rotvec_to_rotation(const Vector3d& r);
Vector3d rotation_to_rotvec(const Matrix3d& m);

/// d(rotvec_to_rotation)/dr_k for k = 0,1,2, evaluated at r.
std::array<Matrix3d, 3> rotation_jacobian_rotvec(const Vector3d& r);

/// Nearest rotation matrix in Frobenius norm, det corrected to +1.
Matrix3d project_to_rotation(const Matrix3d& m);

}  // namespace mammobot::geom
