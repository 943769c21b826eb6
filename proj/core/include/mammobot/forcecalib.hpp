#pragma once

#include <array>
#include <string>
#include <vector>

#include "mammobot/geometry.hpp"

namespace mammobot::forcecalib {

using Eigen::Vector3d;

/// Six-axis force/torque reading in the sensor frame. Force in N, torque
/// in N*mm.
struct Wrench {
  Vector3d force = Vector3d::Zero();
  Vector3d torque = Vector3d::Zero();

  bool is_finite() const { return force.allFinite() && torque.allFinite(); }
};

/// Pose input for the bias model: rotation vector (rad) followed by
/// translation (mm).
using Pose6 = Eigen::Matrix<double, 6, 1>;

/// Pose-dependent sensor bias as a tensor-product Bernstein expansion over
/// normalized pose coordinates. Per-dimension degree 0 removes that input's
/// influence (the basis along it is the constant 1).
struct BiasModel {
  std::array<int, 6> degrees{};
  std::array<std::pair<double, double>, 6> normalization{};  // (min, max) per input
  // One row per output channel (Fx Fy Fz Tx Ty Tz), one column per basis
  // function.
  Eigen::MatrixXd coefficients;

  int basis_size() const;
};

/// Bernstein basis of the given degree at u. u is clamped to [0, 1];
/// `clamped`, when non-null, is set when clamping occurred. Components sum
/// to 1.
Eigen::VectorXd bernstein_basis(double u, int degree, bool* clamped = nullptr);

struct TrainingSample {
  Pose6 pose;
  Wrench reading;
};

struct FitReport {
  double training_rms = 0.0;                 // over all 6 channels
  std::array<double, 6> channel_rms{};
  bool any_input_clamped = false;
};

/// Least-squares fit of the per-channel coefficients on the tensor-product
/// basis. Translation inputs participate only when the sample count covers
/// the full 6-D tensor basis; otherwise their degree is truncated to 0 and
/// the model depends on orientation alone.
BiasModel fit_bias_model(const std::vector<TrainingSample>& samples, int degree,
                         FitReport* report = nullptr);

Wrench predict(const BiasModel& model, const Pose6& pose);

/// reading - model prediction at the pose, componentwise.
Wrench compensate(const BiasModel& model, const Pose6& pose, const Wrench& reading);

void save_bias_model(const std::string& path, const BiasModel& model);
BiasModel load_bias_model(const std::string& path);

}  // namespace mammobot::forcecalib
