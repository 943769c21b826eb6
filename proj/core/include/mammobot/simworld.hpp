#pragma once

#include <array>
#include <cstdint>
#include <random>

#include "mammobot/forcecalib.hpp"
#include "mammobot/geometry.hpp"

namespace mammobot::sim {

using forcecalib::Wrench;
using geom::RigidTransform;
using Eigen::Vector3d;

/// Deterministic RNG stream. Independent streams are derived from
/// (seed, stream id, index) so trials never share state.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  double normal(double sigma) {
    if (sigma <= 0.0) return 0.0;
    return std::normal_distribution<double>(0.0, sigma)(gen_);
  }
  Vector3d normal3(double sigma) { return {normal(sigma), normal(sigma), normal(sigma)}; }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  uint64_t uniform_u64() { return gen_(); }
  Vector3d unit_vector() {
    // Uniform on the sphere via normalized Gaussians.
    Vector3d v;
    do {
      v = {gauss_(gen_), gauss_(gen_), gauss_(gen_)};
    } while (v.norm() < 1e-12);
    return v.normalized();
  }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> gauss_{0.0, 1.0};
};

/// splitmix64-style mixing for substream seeds.
uint64_t derive_seed(uint64_t base, uint64_t stream, uint64_t index = 0);

struct DhJoint {
  double a_mm = 0.0;
  double alpha_rad = 0.0;
  double d_mm = 0.0;
  double theta_offset_rad = 0.0;
  double limit_lo_rad = -M_PI;
  double limit_hi_rad = M_PI;
};

/// Generic six-revolute serial arm described by Denavit-Hartenberg rows.
struct ArmModel {
  std::array<DhJoint, 6> joints;
};

using Joints = Eigen::Matrix<double, 6, 1>;

bool within_limits(const ArmModel& arm, const Joints& q);
Joints clamp_to_limits(const ArmModel& arm, const Joints& q);

/// T_BE as the product of the six DH link transforms. Throws JointLimit
/// outside the joint ranges.
RigidTransform forward_kinematics(const ArmModel& arm, const Joints& q);

/// Base origin plus the six joint-frame origins, for collision geometry and
/// Jacobians.
std::array<Vector3d, 7> joint_origins(const ArmModel& arm, const Joints& q);

/// Frames T_B0..T_B6 of the kinematic chain (T_B0 = identity).
std::array<RigidTransform, 7> chain_frames(const ArmModel& arm, const Joints& q);

struct CrossWireFiducial {
  Vector3d point = Vector3d::Zero();   // base frame, mm
  double visibility_halfwidth = 1.0;   // mm
};

/// Gravity load seen by the force sensor: f = r^T (0, 0, -9.81 m),
/// torque = com x f + bias. `rotation_base_sensor` holds the sensor axes as
/// base-frame columns.
Wrench gravity_wrench(double tool_mass_kg, const Vector3d& tool_com_mm,
                      const Eigen::Matrix3d& rotation_base_sensor, const Wrench& bias);

struct PlantParams {
  double stiffness_n_per_mm = 1.0;
  double damping_n_s_per_mm = 0.05;
  double force_noise_sigma_n = 0.05;
};

/// Point-contact plant: the probe tip against the compression plate,
/// modeled as a plane backed by a spring-damper. The normal force is
/// k * max(0, penetration) + c * max(0, approach speed) while in contact.
class ContactPlant {
 public:
  ContactPlant(const Vector3d& probe_position, const Vector3d& plate_point,
               const Vector3d& outward_normal, const PlantParams& params, uint64_t noise_seed);

  const Vector3d& position() const { return position_; }
  double penetration() const;
  /// Noiseless normal contact force, N.
  double contact_force() const;
  /// Sensor reading: contact force along the outward normal plus
  /// per-component Gaussian noise. Advances the noise stream.
  Wrench read_wrench();

  void step(const Vector3d& velocity_mm_s, double dt_s);

 private:
  Vector3d position_;
  Vector3d plate_point_;
  Vector3d normal_;
  PlantParams params_;
  Vector3d last_velocity_ = Vector3d::Zero();
  Rng rng_;
};

}  // namespace mammobot::sim
