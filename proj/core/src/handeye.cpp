#include "mammobot/handeye.hpp"

#include <cmath>

namespace mammobot::handeye {

using Eigen::Matrix3d;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;

std::vector<MotionPair> build_motion_pairs(const std::vector<RigidTransform>& robot_poses,
                                           const std::vector<RigidTransform>& marker_poses,
                                           bool all_pairs) {
  if (robot_poses.size() != marker_poses.size())
    throw Error(Errc::LengthMismatch, "robot and marker pose counts differ");
  const size_t n = robot_poses.size();
  if (n < 3) throw Error(Errc::TooFewPoses, "need at least 3 poses");

  std::vector<MotionPair> pairs;
  auto make_pair = [&](size_t i, size_t j) {
    MotionPair p;
    p.a = compose(invert(robot_poses[i]), robot_poses[j]);
    p.b = compose(marker_poses[i], invert(marker_poses[j]));
    return p;
  };
  if (all_pairs) {
    for (size_t i = 0; i + 1 < n; ++i)
      for (size_t j = i + 1; j < n; ++j) pairs.push_back(make_pair(i, j));
  } else {
    for (size_t i = 0; i + 1 < n; ++i) pairs.push_back(make_pair(i, i + 1));
  }
  return pairs;
}

namespace {

// Second singular value of the stacked unit rotation axes. Near zero means
// every relative motion rotates about (anti)parallel axes and the
// translation along that common axis is unobservable.
double axis_spread(const std::vector<MotionPair>& pairs) {
  std::vector<Vector3d> axes;
  for (const auto& p : pairs) {
    const Vector3d rv = geom::rotation_to_rotvec(p.a.rotation);
    if (rv.norm() > 1e-10) axes.push_back(rv.normalized());
  }
  if (axes.empty()) return 0.0;
  MatrixXd m(axes.size(), 3);
  for (size_t i = 0; i < axes.size(); ++i) m.row(i) = axes[i].transpose();
  Eigen::JacobiSVD<MatrixXd> svd(m);
  return svd.singularValues()(1);
}

}  // namespace

RigidTransform solve_ax_xb(const std::vector<MotionPair>& pairs, const SolveOptions& opts) {
  if (pairs.size() < 2) throw Error(Errc::TooFewPoses, "need at least 2 motion pairs");
  if (axis_spread(pairs) < opts.parallel_axis_tol)
    throw Error(Errc::DegenerateMotion, "relative rotation axes are (near) parallel");

  const auto n = static_cast<Eigen::Index>(pairs.size());

  // Rotation: stack (I (x) R_A - R_B^T (x) I), 9 rows per pair.
  MatrixXd k(9 * n, 9);
  const Matrix3d eye = Matrix3d::Identity();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Matrix3d& ra = pairs[i].a.rotation;
    const Matrix3d& rb = pairs[i].b.rotation;
    for (int bi = 0; bi < 3; ++bi)
      for (int bj = 0; bj < 3; ++bj)
        k.block<3, 3>(9 * i + 3 * bi, 3 * bj) = eye(bi, bj) * ra - rb.transpose()(bi, bj) * eye;
  }
  Eigen::JacobiSVD<MatrixXd> svd(k, Eigen::ComputeThinV);
  const VectorXd h = svd.matrixV().col(8);
  Matrix3d rx_raw = Eigen::Map<const Matrix3d>(h.data());  // column-major vec^-1
  if (rx_raw.determinant() < 0) rx_raw = -rx_raw;
  const Matrix3d rx = geom::project_to_rotation(rx_raw);

  // Translation: (R_A - I) t_X = R_X t_B - t_A, least squares over pairs.
  MatrixXd lhs(3 * n, 3);
  VectorXd rhs(3 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    lhs.middleRows<3>(3 * i) = pairs[i].a.rotation - eye;
    rhs.segment<3>(3 * i) = rx * pairs[i].b.translation - pairs[i].a.translation;
  }
  const Vector3d tx = lhs.colPivHouseholderQr().solve(rhs);

  return {rx, tx};
}

Residual handeye_residual(const std::vector<MotionPair>& pairs, const RigidTransform& x) {
  if (pairs.empty()) throw Error(Errc::TooFewPoses, "no motion pairs");
  double rot2 = 0.0, trans2 = 0.0;
  for (const auto& p : pairs) {
    const RigidTransform ax = compose(p.a, x);
    const RigidTransform xb = compose(x, p.b);
    const double dr = geom::rotation_between(ax.rotation, xb.rotation);
    rot2 += dr * dr;
    trans2 += (ax.translation - xb.translation).squaredNorm();
  }
  const double inv_n = 1.0 / static_cast<double>(pairs.size());
  return {std::sqrt(rot2 * inv_n), std::sqrt(trans2 * inv_n)};
}

}  // namespace mammobot::handeye
