#pragma once

#include <vector>

#include "mammobot/geometry.hpp"

namespace mammobot::handeye {

using geom::RigidTransform;

/// One relative-motion constraint A*X = X*B. `a` is the relative
/// end-effector motion, `b` the relative camera-to-marker motion.
struct MotionPair {
  RigidTransform a;
  RigidTransform b;
};

struct Residual {
  double rms_rotation_rad = 0.0;
  double rms_translation_mm = 0.0;
};

struct SolveOptions {
  // Spread threshold on the relative-rotation axes below which the problem
  // is rejected as unobservable.
  double parallel_axis_tol = 1e-6;
};

/// Pairs consecutive poses (i, i+1): A = T_BE_i^-1 * T_BE_{i+1},
/// B = T_CT_i * T_CT_{i+1}^-1. Requires N >= 3 poses, returns N-1 pairs.
/// All-pairs construction (every i < j) is available for conditioning
/// studies.
std::vector<MotionPair> build_motion_pairs(const std::vector<RigidTransform>& robot_poses,
                                           const std::vector<RigidTransform>& marker_poses,
                                           bool all_pairs = false);

/// Solves A*X = X*B for X = T_EC. The rotation comes from the stacked
/// Kronecker system (I (x) R_A - R_B^T (x) I) vec(R_X) = 0 via the smallest
/// singular vector, projected to the nearest rotation; the translation from
/// least squares over (R_A - I) t_X = R_X t_B - t_A.
RigidTransform solve_ax_xb(const std::vector<MotionPair>& pairs,
                           const SolveOptions& opts = {});

Residual handeye_residual(const std::vector<MotionPair>& pairs, const RigidTransform& x);

}  // namespace mammobot::handeye
