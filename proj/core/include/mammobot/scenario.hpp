#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mammobot/imaging.hpp"
#include "mammobot/motion.hpp"
#include "mammobot/registration.hpp"
#include "mammobot/simworld.hpp"
#include "mammobot/uscalib.hpp"

namespace mammobot::sim {

using Eigen::Vector2d;

struct NoiseParams {
  double marker_rot_sigma_rad = 0.0;
  double marker_trans_sigma_mm = 0.0;
  double us_pixel_sigma = 0.0;
  double force_sigma_n = 0.0;
  double rf_background_sigma = 0.0;
  double visibility_halfwidth_mm = 1.0;     // lesion elevational profile sigma
  double crosswire_plane_sigma_mm = 0.0;    // out-of-plane placement spread
};

struct ControlParams {
  motion::PidGains gains;
  double f_target_n = 5.0;
  double v_t_mm_s = 7.27;
  double k0_mm = 60.0;
  double dt_s = 0.01;
  double descend_speed_mm_s = 5.0;
  double contact_threshold_n = 2.0;
  double descend_timeout_s = 30.0;
  double scan_length_mm = 30.0;
  double scan_duration_s = 10.0;
};

struct XrayParams {
  double pixel_size_mm = 0.2;
  int rows = 800;
  int cols = 800;
  Vector2d origin_px{400.0, 400.0};  // pixel of the plate origin
  double background_mean = 0.5;
  double background_sigma = 0.05;
  double marker_half_size_mm = 6.0;
  double lesion_radius_mm = 6.0;
  double lesion_contrast_sigma = 0.46;  // additive contrast in units of background sigma
};

/// US image geometry. Image units: u lateral (mm / lateral_spacing),
/// v axial (mm / axial_spacing); the image origin sits at the transducer
/// face center, so u spans [-cols/2, cols/2] and v = row index.
struct UsImageParams {
  int rows = 96;
  int cols = 64;
  double axial_spacing_mm = 0.5;
  double lateral_spacing_mm = 0.5;
  double reflector_amplitude = 1.0;
  double blob_sigma_mm = 1.5;
  double carrier_wavelength_mm = 2.0;
};

struct CalibrationProtocol {
  int handeye_poses = 21;
  int us_samples = 30;
  int force_samples = 500;
  int force_degree = 3;
  double us_init_rot_perturb_rad = 5.0 * M_PI / 180.0;
  double us_init_trans_perturb_mm = 5.0;
  double us_init_scale_perturb_rel = 0.05;
  bool use_solved = true;  // navigate with solved rather than true calibrations
};

/// Ground-truth world description. Everything the solvers are expected to
/// recover lives here, alongside the noise and control parameters of a run.
struct ScenarioConfig {
  uint64_t seed = 1;
  ArmModel arm;
  Joints start_joints = Joints::Zero();

  RigidTransform plate_pose;  // T_BP truth
  std::array<RigidTransform, 4> markers_in_plate;
  std::optional<std::array<Vector2d, 4>> markers_px;  // pinned mammogram pixels
  std::vector<Vector3d> lesions_base_mm;
  std::optional<std::vector<Vector2d>> lesions_px;

  RigidTransform t_ec;                 // truth
  RigidTransform t_eu;                 // truth
  RigidTransform camera_view_pose;     // nominal T_BC for marker observation

  double tool_mass_kg = 1.0;
  Vector3d tool_com_mm = Vector3d::Zero();
  Wrench sensor_bias;

  CrossWireFiducial crosswire;
  NoiseParams noise;
  PlantParams plant;
  ControlParams control;
  XrayParams xray;
  UsImageParams us;
  CalibrationProtocol calibration;
  std::vector<motion::Box> obstacles;

  RigidTransform marker_pose_base(int i) const {
    return compose(plate_pose, markers_in_plate[static_cast<size_t>(i)]);
  }
  uscalib::UsCalibration true_us_calibration() const {
    return {t_eu, Vector2d(us.lateral_spacing_mm, us.axial_spacing_mm)};
  }
};

ScenarioConfig default_scenario();
ScenarioConfig with_zero_noise(ScenarioConfig s);

ScenarioConfig load_scenario(const std::string& path);
void save_scenario(const std::string& path, const ScenarioConfig& s);
std::string scenario_to_json(const ScenarioConfig& s);
ScenarioConfig scenario_from_json(const std::string& text);

/// Noisy marker poses in the camera frame for a robot pose t_be. The truth
/// closes Fig-style loop T_BE * T_EC * T_CT_i = T_BT_i exactly at zero noise.
std::array<RigidTransform, 4> observe_markers(const ScenarioConfig& s, const RigidTransform& t_be,
                                              Rng& rng);

struct Mammogram {
  double pixel_size_mm = 1.0;
  std::array<Vector2d, 4> markers_px;
  std::vector<Vector2d> lesions_px;
  Eigen::MatrixXf raster;  // empty unless rendering was requested
};

/// Orthographic projection along the plate normal onto the pixel grid.
/// Marker and lesion pixel centers are exact; the raster (optional) renders
/// markers as bright squares and lesions as low-contrast disks over a noisy
/// background.
Mammogram xray_project(const ScenarioConfig& s, Rng& rng, bool render_raster = false);

/// Pixel coordinates of a base-frame point under the same projection.
Vector2d xray_pixel(const ScenarioConfig& s, const Vector3d& p_base);

/// Cross-wire fiducial observation: in-plane image position when the wire
/// crossing lies within the visibility slab and the image bounds, otherwise
/// absent.
std::optional<Vector2d> us_observe_crosswire(const RigidTransform& t_bu,
                                             const CrossWireFiducial& fid, const Vector2d& scales,
                                             double sigma_px, Rng& rng,
                                             const UsImageParams* bounds = nullptr);

/// Synthetic RF frame at probe pose t_bu: white background noise plus a
/// carrier-modulated reflector patch per lesion, with a Gaussian elevational
/// amplitude profile of sigma = visibility halfwidth.
imaging::RfFrame synth_rf_frame(const ScenarioConfig& s, const RigidTransform& t_bu, Rng& rng);

/// Hand-eye calibration dataset: robot poses looking at marker 0 from
/// varied orientations, and the marker's observed camera-frame poses.
struct HandeyeData {
  std::vector<RigidTransform> robot_poses;
  std::vector<RigidTransform> marker_poses;
};
HandeyeData generate_handeye_data(const ScenarioConfig& s, int n_poses, Rng& rng);

/// BXp calibration dataset from poses that keep the cross-wire inside the
/// image plane slab.
std::vector<uscalib::BxpSample> generate_bxp_samples(const ScenarioConfig& s, int n_samples,
                                                     Rng& rng);

/// Force-calibration sweep over a restricted orientation workspace.
std::vector<forcecalib::TrainingSample> generate_force_samples(const ScenarioConfig& s,
                                                               int n_samples, Rng& rng);

}  // namespace mammobot::sim
