#pragma once

#include <vector>

#include "mammobot/geometry.hpp"

namespace mammobot::uscalib {

using geom::RigidTransform;
using Eigen::Vector2d;
using Eigen::Vector3d;

/// One cross-wire observation: the robot pose at capture time and the
/// fiducial position in the image, in image units.
struct BxpSample {
  RigidTransform b;   // T_BE
  Vector2d p_img;     // (u, v)
};

/// Probe calibration: T_EU plus the mm-per-image-unit factors along the
/// image axes.
struct UsCalibration {
  RigidTransform x;   // T_EU
  Vector2d scale = Vector2d::Ones();
};

/// Solver parametrization: [rotvec(3), translation(3) mm, scale(2)].
using ParamVector = Eigen::Matrix<double, 8, 1>;

ParamVector pack_params(const UsCalibration& calib);
UsCalibration unpack_params(const ParamVector& p);

/// Maps the imaged fiducial into the robot base frame:
/// B * X * (sx*u, sy*v, 0).
Vector3d bxp_point(const BxpSample& sample, const UsCalibration& calib);

/// Spread of the mapped points about their mean, mm^2. Zero iff every
/// sample lands on the same base-frame point.
double bxp_cost(const std::vector<BxpSample>& samples, const UsCalibration& calib);

/// Analytic d(cost)/d(params). Matches central finite differences to
/// better than 1e-5 relative error.
ParamVector bxp_gradient(const std::vector<BxpSample>& samples, const UsCalibration& calib);

struct SolveOptions {
  double learning_rate = 1e-2;  // initial trial step
  int max_iters = 5000;
  double grad_tol = 1e-10;
  bool freeze_scale = false;
  // Armijo backtracking parameters.
  double backtrack_factor = 0.5;
  double armijo_c = 1e-4;
};

struct TracePoint {
  int iter;
  double cost;
  double grad_norm;
  double step;
};

struct SolveReport {
  bool converged = false;       // grad_tol reached (vs. max_iters)
  int iterations = 0;
  double final_cost = 0.0;
  double final_grad_norm = 0.0;
  std::vector<TracePoint> trace;
};

/// Gradient descent on bxp_cost with Armijo backtracking. The trial step is
/// seeded from the previous accepted step (Barzilai-Borwein estimate when the
/// curvature is usable), so accepted cost is monotonically non-increasing.
UsCalibration solve_bxp(const std::vector<BxpSample>& samples, const UsCalibration& init,
                        const SolveOptions& opts, SolveReport* report = nullptr);

/// Writes a convergence trace as CSV: iter,cost,grad_norm,step.
void write_trace_csv(const std::string& path, const std::vector<TracePoint>& trace);

}  // namespace mammobot::uscalib
