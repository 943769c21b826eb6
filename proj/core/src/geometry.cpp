#include "mammobot/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace mammobot::geom {

namespace {

Matrix3d skew(const Vector3d& v) {
  Matrix3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

}  // namespace

bool RigidTransform::is_valid(double tol) const {
  const double ortho = (rotation.transpose() * rotation - Matrix3d::Identity()).norm();
  return ortho < tol && std::abs(rotation.determinant() - 1.0) < tol &&
         translation.allFinite();
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

RigidTransform invert(const RigidTransform& t) {
  const Matrix3d rt = t.rotation.transpose();
  return {rt, -(rt * t.translation)};
}

Vector3d transform_point(const RigidTransform& t, const Vector3d& p) {
  return t.rotation * p + t.translation;
}

double rotation_between(const Matrix3d& a, const Matrix3d& b) {
  const double tr = (a.transpose() * b).trace();
  const double c = std::clamp((tr - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

Matrix3d axis_angle_to_rotation(const AxisAngle& aa) {
  return rotvec_to_rotation(aa.axis.normalized() * aa.angle);
}

AxisAngle rotation_to_axis_angle(const Matrix3d& r) {
  const Vector3d rv = rotation_to_rotvec(r);
  const double angle = rv.norm();
  if (angle < 1e-15) return {Vector3d::UnitZ(), 0.0};
  return {rv / angle, angle};
}

Matrix3d rotvec_to_rotation(const Vector3d& r) {
  const double angle = r.norm();
  if (angle < 1e-12) {
    // Second-order expansion keeps the map smooth through zero.
    return Matrix3d::Identity() + skew(r) + 0.5 * skew(r) * skew(r);
  }
  const Vector3d axis = r / angle;
  const Matrix3d k = skew(axis);
  return Matrix3d::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * k * k;
}

Vector3d rotation_to_rotvec(const Matrix3d& m) {
  const double c = std::clamp((m.trace() - 1.0) / 2.0, -1.0, 1.0);
  const double angle = std::acos(c);
  if (angle < 1e-12) {
    // m ~ I + skew(r): read the vector part.
    return 0.5 * Vector3d(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
  }
  if (angle > M_PI - 1e-6) {
    // Near pi the antisymmetric part vanishes; recover the axis from the
    // symmetric part. Axis sign is ambiguous here.
    const Matrix3d s = 0.5 * (m + Matrix3d::Identity());
    int k;
    s.diagonal().maxCoeff(&k);
    Vector3d axis = s.col(k) / std::sqrt(std::max(s(k, k), 1e-30));
    axis.normalize();
    return axis * angle;
  }
  Vector3d w(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
  return w * (angle / (2.0 * std::sin(angle)));
}

std::array<Matrix3d, 3> rotation_jacobian_rotvec(const Vector3d& r) {
  // Closed form for the derivative of the exponential map with respect to
  // the rotation-vector components (Gallego & Yezzi form).
  std::array<Matrix3d, 3> jac;
  const double n2 = r.squaredNorm();
  const Matrix3d rot = rotvec_to_rotation(r);
  if (n2 < 1e-16) {
    for (int k = 0; k < 3; ++k) jac[k] = skew(Vector3d::Unit(k));
    return jac;
  }
  for (int k = 0; k < 3; ++k) {
    const Vector3d e = Vector3d::Unit(k);
    jac[k] = (r(k) * skew(r) + skew(r.cross((Matrix3d::Identity() - rot) * e))) / n2 * rot;
  }
  return jac;
}

Matrix3d project_to_rotation(const Matrix3d& m) {
  Eigen::JacobiSVD<Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix3d u = svd.matrixU();
  Matrix3d v = svd.matrixV();
  Matrix3d d = Matrix3d::Identity();
  d(2, 2) = (u * v.transpose()).determinant() < 0 ? -1.0 : 1.0;
  return u * d * v.transpose();
}

}  // namespace mammobot::geom
