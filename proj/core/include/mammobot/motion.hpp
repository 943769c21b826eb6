#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mammobot/forcecalib.hpp"
#include "mammobot/geometry.hpp"
#include "mammobot/simworld.hpp"

namespace mammobot::motion {

using geom::RigidTransform;
using sim::ArmModel;
using sim::Joints;
using Eigen::Vector3d;

struct PidGains {
  double kp = 0.4;           // mm/s per N
  double ti = 0.5;           // s
  double td = 0.0;           // s
  double output_limit = 10;  // mm/s

  bool valid() const { return kp > 0 && ti > 0 && td >= 0 && output_limit > 0; }
};

/// Discrete PID on the force error: trapezoidal integral, backward
/// difference derivative on the error, output clamped with the integral
/// frozen while the clamp is active.
class PidController {
 public:
  explicit PidController(const PidGains& gains);

  double step(double error_n, double dt_s);  // returns v_n, mm/s
  double integral() const { return integral_; }
  void reset();

 private:
  PidGains gains_;
  double integral_ = 0.0;
  double prev_error_ = 0.0;
  bool has_prev_ = false;
};

/// Standoff pose above the lesion: p + k0 * n, with n the outward plate
/// normal.
Vector3d standoff_target(const Vector3d& lesion_mm, const Vector3d& outward_normal,
                         double k0_mm);

double contact_force_magnitude(const forcecalib::Wrench& w);

struct ScanCommand {
  Vector3d tangential_dir;  // unit, in the plate plane
  Vector3d plate_normal;    // unit, pointing from the probe into the plate
  double v_t_mm_s = 7.27;
  double f_target_n = 5.0;
  double duration_s = 10.0;
  double dt_s = 0.01;

  void validate() const;
};

struct ScanSample {
  double t_s;
  Vector3d position_mm;
  double v_n_mm_s;  // commanded normal speed
  double force_n;
};

struct ScanEvent {
  std::string kind;
  double t_s;
  double value;
};

struct ScanLog {
  std::vector<ScanSample> samples;
  std::vector<ScanEvent> events;
};

/// Mean/std of the logged force from `after_s` on.
struct ForceStats {
  double mean_n = 0.0;
  double std_n = 0.0;
  double max_n = 0.0;
};
ForceStats force_stats(const ScanLog& log, double after_s);

void write_scanlog_csv(const std::string& path, const ScanLog& log);

struct DescendResult {
  double contact_time_s = 0.0;
  double stop_force_n = 0.0;
  double overshoot_n = 0.0;  // stop force minus threshold
};

/// Constant-speed descent along -n that stops at the first sample with
/// F >= f_threshold.
DescendResult descend_until_contact(sim::ContactPlant& plant, const Vector3d& outward_normal,
                                    double v_descend_mm_s, double f_threshold_n, double dt_s,
                                    double timeout_s);

/// Force-regulated lateral scan: v = v_t tau + v_n n with v_n from the PID
/// on e = F* - F. Reports CONTACT_LOST once if the force stays at zero for
/// more than 0.5 s after initial contact; the run continues.
ScanLog run_scan(sim::ContactPlant& plant, const ScanCommand& cmd, const PidGains& gains);

struct IkOptions {
  int max_iters = 500;
  double pos_tol_mm = 1e-6;
  double rot_tol_rad = 1e-6;
  double rot_weight_mm_per_rad = 100.0;  // balances the mixed-unit error twist
  double max_step_rad = 0.3;
};

/// Damped-least-squares IK from the seed. Joint limits are enforced by
/// clamping every update.
Joints ik_solve(const ArmModel& arm, const RigidTransform& target, const Joints& seed,
                const IkOptions& opts = {});

/// Axis-aligned workspace obstacle, mm.
struct Box {
  Vector3d min_corner;
  Vector3d max_corner;
};

struct RrtOptions {
  double step_rad = 0.1;
  double goal_bias = 0.1;
  int max_iters = 50000;
  double collision_step_rad = 0.05;
  double link_radius_mm = 40.0;
  uint64_t seed = 0;
};

/// True when any link-sphere at configuration q intersects an obstacle.
bool config_collides(const ArmModel& arm, const Joints& q, const std::vector<Box>& obstacles,
                     double link_radius_mm);

/// Joint-space RRT with a direct-connect attempt first. The returned path
/// starts at `start`, ends at `goal`, and is collision-free at
/// collision_step resolution along every segment.
std::vector<Joints> rrt_plan(const ArmModel& arm, const Joints& start, const Joints& goal,
                             const std::vector<Box>& obstacles, const RrtOptions& opts = {});

}  // namespace mammobot::motion
