#include "mammobot/simworld.hpp"

#include <cmath>

namespace mammobot::sim {

uint64_t derive_seed(uint64_t base, uint64_t stream, uint64_t index) {
  // splitmix64 finalizer over the combined words.
  uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1) + 0xbf58476d1ce4e5b9ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

bool within_limits(const ArmModel& arm, const Joints& q) {
  for (int i = 0; i < 6; ++i)
    if (q(i) < arm.joints[i].limit_lo_rad || q(i) > arm.joints[i].limit_hi_rad) return false;
  return true;
}

Joints clamp_to_limits(const ArmModel& arm, const Joints& q) {
  Joints out = q;
  for (int i = 0; i < 6; ++i)
    out(i) = std::clamp(q(i), arm.joints[i].limit_lo_rad, arm.joints[i].limit_hi_rad);
  return out;
}

namespace {

RigidTransform dh_transform(const DhJoint& j, double theta) {
  // RotZ(theta + offset) * TransZ(d) * TransX(a) * RotX(alpha)
  const double th = theta + j.theta_offset_rad;
  const double ct = std::cos(th), st = std::sin(th);
  const double ca = std::cos(j.alpha_rad), sa = std::sin(j.alpha_rad);
  RigidTransform t;
  t.rotation << ct, -st * ca, st * sa, st, ct * ca, -ct * sa, 0, sa, ca;
  t.translation << j.a_mm * ct, j.a_mm * st, j.d_mm;
  return t;
}

}  // namespace

std::array<RigidTransform, 7> chain_frames(const ArmModel& arm, const Joints& q) {
  if (!within_limits(arm, q)) throw Error(Errc::JointLimit, "joint vector outside limits");
  std::array<RigidTransform, 7> frames;
  frames[0] = RigidTransform::identity();
  for (int i = 0; i < 6; ++i) frames[i + 1] = compose(frames[i], dh_transform(arm.joints[i], q(i)));
  return frames;
}

RigidTransform forward_kinematics(const ArmModel& arm, const Joints& q) {
  return chain_frames(arm, q)[6];
}

std::array<Vector3d, 7> joint_origins(const ArmModel& arm, const Joints& q) {
  const auto frames = chain_frames(arm, q);
  std::array<Vector3d, 7> origins;
  for (int i = 0; i < 7; ++i) origins[i] = frames[i].translation;
  return origins;
}

Wrench gravity_wrench(double tool_mass_kg, const Vector3d& tool_com_mm,
                      const Eigen::Matrix3d& rotation_base_sensor, const Wrench& bias) {
  if (tool_mass_kg < 0) throw std::invalid_argument("mass must be non-negative");
  const Vector3d gravity_base(0.0, 0.0, -9.81 * tool_mass_kg);  // N
  const Vector3d f = rotation_base_sensor.transpose() * gravity_base;
  Wrench w;
  w.force = f + bias.force;
  w.torque = tool_com_mm.cross(f) + bias.torque;  // N*mm
  return w;
}

ContactPlant::ContactPlant(const Vector3d& probe_position, const Vector3d& plate_point,
                           const Vector3d& outward_normal, const PlantParams& params,
                           uint64_t noise_seed)
    : position_(probe_position),
      plate_point_(plate_point),
      normal_(outward_normal.normalized()),
      params_(params),
      rng_(noise_seed) {}

double ContactPlant::penetration() const {
  return std::max(0.0, -(position_ - plate_point_).dot(normal_));
}

double ContactPlant::contact_force() const {
  const double pen = penetration();
  if (pen <= 0.0) return 0.0;
  const double approach = std::max(0.0, -last_velocity_.dot(normal_));
  return params_.stiffness_n_per_mm * pen + params_.damping_n_s_per_mm * approach;
}

Wrench ContactPlant::read_wrench() {
  Wrench w;
  w.force = contact_force() * normal_ + rng_.normal3(params_.force_noise_sigma_n);
  return w;
}

void ContactPlant::step(const Vector3d& velocity_mm_s, double dt_s) {
  if (dt_s <= 0) throw std::invalid_argument("dt must be positive");
  position_ += velocity_mm_s * dt_s;
  last_velocity_ = velocity_mm_s;
}

}  // namespace mammobot::sim
