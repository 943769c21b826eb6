#include "mammobot/motion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace mammobot::motion {

using Eigen::Matrix3d;
using Eigen::MatrixXd;
using Eigen::VectorXd;

PidController::PidController(const PidGains& gains) : gains_(gains) {
  if (!gains.valid()) throw std::invalid_argument("invalid PID gains");
}

void PidController::reset() {
  integral_ = 0.0;
  prev_error_ = 0.0;
  has_prev_ = false;
}

double PidController::step(double error_n, double dt_s) {
  if (dt_s <= 0) throw std::invalid_argument("dt must be positive");
  // First sample: the integral over an empty interval is zero and the
  // backward difference is undefined, so both terms start at zero.
  const double candidate_integral =
      has_prev_ ? integral_ + 0.5 * dt_s * (error_n + prev_error_) : integral_;
  const double derivative = has_prev_ ? (error_n - prev_error_) / dt_s : 0.0;

  const double raw = gains_.kp * (error_n + candidate_integral / gains_.ti +
                                  gains_.td * derivative);

  double out = raw;
  if (raw > gains_.output_limit) {
    out = gains_.output_limit;
  } else if (raw < -gains_.output_limit) {
    out = -gains_.output_limit;
  } else {
    integral_ = candidate_integral;  // anti-windup: accept only when unclamped
  }
  prev_error_ = error_n;
  has_prev_ = true;
  return out;
}

Vector3d standoff_target(const Vector3d& lesion_mm, const Vector3d& outward_normal,
                         double k0_mm) {
  if (std::abs(outward_normal.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("normal must be unit length");
  if (k0_mm < 0) throw std::invalid_argument("k0 must be non-negative");
  return lesion_mm + k0_mm * outward_normal;
}

double contact_force_magnitude(const forcecalib::Wrench& w) { return w.force.norm(); }

void ScanCommand::validate() const {
  if (std::abs(tangential_dir.norm() - 1.0) > 1e-12 ||
      std::abs(plate_normal.norm() - 1.0) > 1e-12)
    throw std::invalid_argument("scan directions must be unit vectors");
  if (std::abs(tangential_dir.dot(plate_normal)) > 1e-9)
    throw std::invalid_argument("tangential direction must lie in the plate plane");
  if (v_t_mm_s <= 0 || dt_s <= 0 || duration_s <= 0)
    throw std::invalid_argument("v_t, dt and duration must be positive");
}

ForceStats force_stats(const ScanLog& log, double after_s) {
  double sum = 0.0, sum2 = 0.0, peak = 0.0;
  size_t n = 0;
  for (const auto& s : log.samples) {
    peak = std::max(peak, s.force_n);
    if (s.t_s < after_s) continue;
    sum += s.force_n;
    sum2 += s.force_n * s.force_n;
    ++n;
  }
  if (n == 0) return {};
  const double mean = sum / static_cast<double>(n);
  const double var = std::max(0.0, sum2 / static_cast<double>(n) - mean * mean);
  return {mean, std::sqrt(var), peak};
}

void write_scanlog_csv(const std::string& path, const ScanLog& log) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot open " + path);
  out << "t,px,py,pz,v_n,F\n";
  out.precision(17);
  for (const auto& s : log.samples)
    out << s.t_s << ',' << s.position_mm.x() << ',' << s.position_mm.y() << ','
        << s.position_mm.z() << ',' << s.v_n_mm_s << ',' << s.force_n << '\n';
}

DescendResult descend_until_contact(sim::ContactPlant& plant, const Vector3d& outward_normal,
                                    double v_descend_mm_s, double f_threshold_n, double dt_s,
                                    double timeout_s) {
  if (f_threshold_n <= 0) throw std::invalid_argument("force threshold must be positive");
  if (v_descend_mm_s <= 0 || dt_s <= 0) throw std::invalid_argument("v and dt must be positive");
  const Vector3d n = outward_normal.normalized();

  double t = 0.0;
  while (t <= timeout_s) {
    const double f = contact_force_magnitude(plant.read_wrench());
    if (f >= f_threshold_n) return {t, f, f - f_threshold_n};
    plant.step(-v_descend_mm_s * n, dt_s);
    t += dt_s;
  }
  throw Error(Errc::Timeout, "no contact before timeout");
}

ScanLog run_scan(sim::ContactPlant& plant, const ScanCommand& cmd, const PidGains& gains) {
  cmd.validate();
  PidController pid(gains);
  ScanLog log;

  const auto steps = static_cast<long>(std::floor(cmd.duration_s / cmd.dt_s));
  bool had_contact = false;
  double last_contact_t = 0.0;
  bool contact_lost_reported = false;

  for (long i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) * cmd.dt_s;
    const double f = contact_force_magnitude(plant.read_wrench());
    if (f > 0.0) {
      had_contact = true;
      last_contact_t = t;
    } else if (had_contact && !contact_lost_reported && t - last_contact_t > 0.5) {
      log.events.push_back({"CONTACT_LOST", t, t - last_contact_t});
      contact_lost_reported = true;
    }

    const double v_n = pid.step(cmd.f_target_n - f, cmd.dt_s);
    const Vector3d velocity = cmd.v_t_mm_s * cmd.tangential_dir + v_n * cmd.plate_normal;
    log.samples.push_back({t, plant.position(), v_n, f});
    plant.step(velocity, cmd.dt_s);
  }
  return log;
}

namespace {

// Spatial error twist target vs current, rotation rows pre-scaled.
Eigen::Matrix<double, 6, 1> pose_error(const RigidTransform& target, const RigidTransform& cur,
                                       double rot_weight) {
  Eigen::Matrix<double, 6, 1> e;
  e.head<3>() = target.translation - cur.translation;
  e.tail<3>() = rot_weight * geom::rotation_to_rotvec(target.rotation * cur.rotation.transpose());
  return e;
}

}  // namespace

Joints ik_solve(const ArmModel& arm, const RigidTransform& target, const Joints& seed,
                const IkOptions& opts) {
  Joints q = sim::clamp_to_limits(arm, seed);
  double lambda = 1.0;

  auto error_norm = [&](const Joints& joints) {
    const auto e = pose_error(target, sim::forward_kinematics(arm, joints),
                              opts.rot_weight_mm_per_rad);
    return e.norm();
  };

  double err = error_norm(q);
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    const auto frames = sim::chain_frames(arm, q);
    const RigidTransform fk = frames[6];
    const Eigen::Matrix<double, 6, 1> e = pose_error(target, fk, opts.rot_weight_mm_per_rad);

    const Vector3d t_err = e.head<3>();
    const Vector3d r_err = e.tail<3>() / opts.rot_weight_mm_per_rad;
    if (t_err.norm() < opts.pos_tol_mm && r_err.norm() < opts.rot_tol_rad) return q;

    // Geometric Jacobian: joint i rotates about the z-axis of frame i.
    Eigen::Matrix<double, 6, 6> jac;
    for (int i = 0; i < 6; ++i) {
      const Vector3d axis = frames[i].rotation.col(2);
      jac.block<3, 1>(0, i) = axis.cross(fk.translation - frames[i].translation);
      jac.block<3, 1>(3, i) = opts.rot_weight_mm_per_rad * axis;
    }

    const Eigen::Matrix<double, 6, 6> jjt =
        jac * jac.transpose() + lambda * lambda * Eigen::Matrix<double, 6, 6>::Identity();
    Joints dq = jac.transpose() * jjt.ldlt().solve(e);
    const double dq_norm = dq.norm();
    if (dq_norm > opts.max_step_rad) dq *= opts.max_step_rad / dq_norm;

    const Joints q_new = sim::clamp_to_limits(arm, q + dq);
    const double err_new = error_norm(q_new);
    if (err_new < err) {
      q = q_new;
      err = err_new;
      lambda = std::max(lambda * 0.5, 1e-3);
    } else {
      lambda = std::min(lambda * 4.0, 1e7);
    }
  }

  bool pinned = false;
  for (int i = 0; i < 6; ++i)
    pinned |= q(i) <= arm.joints[i].limit_lo_rad + 1e-12 ||
              q(i) >= arm.joints[i].limit_hi_rad - 1e-12;
  if (pinned) throw Error(Errc::JointLimit, "IK pinned against a joint limit");
  throw Error(Errc::NotConverged, "IK did not reach the target tolerance");
}

namespace {

double point_box_distance(const Vector3d& p, const Box& box) {
  Vector3d clamped;
  for (int i = 0; i < 3; ++i) clamped(i) = std::clamp(p(i), box.min_corner(i), box.max_corner(i));
  return (p - clamped).norm();
}

bool edge_free(const ArmModel& arm, const Joints& a, const Joints& b,
               const std::vector<Box>& obstacles, const RrtOptions& opts) {
  const double span = (b - a).cwiseAbs().maxCoeff();
  const int steps = std::max(1, static_cast<int>(std::ceil(span / opts.collision_step_rad)));
  for (int s = 0; s <= steps; ++s) {
    const double u = static_cast<double>(s) / steps;
    if (config_collides(arm, a + u * (b - a), obstacles, opts.link_radius_mm)) return false;
  }
  return true;
}

}  // namespace

bool config_collides(const ArmModel& arm, const Joints& q, const std::vector<Box>& obstacles,
                     double link_radius_mm) {
  if (obstacles.empty()) return false;
  const auto origins = joint_origins(arm, q);
  for (int link = 0; link < 6; ++link) {
    const Vector3d& a = origins[link];
    const Vector3d& b = origins[link + 1];
    const double len = (b - a).norm();
    const int samples = std::max(1, static_cast<int>(std::ceil(len / link_radius_mm)));
    for (int s = 0; s <= samples; ++s) {
      const Vector3d p = a + (static_cast<double>(s) / samples) * (b - a);
      for (const auto& box : obstacles)
        if (point_box_distance(p, box) <= link_radius_mm) return true;
    }
  }
  return false;
}

std::vector<Joints> rrt_plan(const ArmModel& arm, const Joints& start, const Joints& goal,
                             const std::vector<Box>& obstacles, const RrtOptions& opts) {
  if (!sim::within_limits(arm, start) || !sim::within_limits(arm, goal))
    throw Error(Errc::JointLimit, "start or goal outside joint limits");
  if (config_collides(arm, start, obstacles, opts.link_radius_mm) ||
      config_collides(arm, goal, obstacles, opts.link_radius_mm))
    throw std::invalid_argument("start or goal configuration is in collision");

  if ((goal - start).norm() < 1e-12) return {start};
  if (edge_free(arm, start, goal, obstacles, opts)) return {start, goal};

  sim::Rng rng(opts.seed);
  std::vector<Joints> nodes{start};
  std::vector<int> parent{-1};

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    Joints sample;
    if (rng.uniform(0.0, 1.0) < opts.goal_bias) {
      sample = goal;
    } else {
      for (int i = 0; i < 6; ++i)
        sample(i) = rng.uniform(arm.joints[i].limit_lo_rad, arm.joints[i].limit_hi_rad);
    }

    size_t nearest = 0;
    double best = (nodes[0] - sample).squaredNorm();
    for (size_t i = 1; i < nodes.size(); ++i) {
      const double d = (nodes[i] - sample).squaredNorm();
      if (d < best) {
        best = d;
        nearest = i;
      }
    }

    Joints direction = sample - nodes[nearest];
    const double dist = direction.norm();
    if (dist < 1e-12) continue;
    const Joints q_new =
        dist > opts.step_rad ? Joints(nodes[nearest] + direction * (opts.step_rad / dist))
                             : sample;

    if (!edge_free(arm, nodes[nearest], q_new, obstacles, opts)) continue;
    nodes.push_back(q_new);
    parent.push_back(static_cast<int>(nearest));

    if ((q_new - goal).norm() <= opts.step_rad && edge_free(arm, q_new, goal, obstacles, opts)) {
      std::vector<Joints> path{goal};
      for (int i = static_cast<int>(nodes.size()) - 1; i >= 0; i = parent[i])
        path.push_back(nodes[i]);
      std::reverse(path.begin(), path.end());
      return path;
    }
  }
  throw Error(Errc::PlanningTimeout, "RRT iteration budget exhausted");
}

}  // namespace mammobot::motion
