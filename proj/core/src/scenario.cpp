#include "mammobot/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mammobot::sim {

using Eigen::Matrix3d;
using nlohmann::json;

ScenarioConfig default_scenario() {
  ScenarioConfig s;
  s.seed = 20240601;

  // Generic 6R table, roughly tabletop-arm scale. No fidelity claim to any
  // particular arm.
  s.arm.joints = {{
      {0.0, M_PI / 2, 150.0, 0.0, -M_PI, M_PI},
      {450.0, 0.0, 0.0, 0.0, -M_PI, M_PI},
      {380.0, 0.0, 0.0, 0.0, -M_PI, M_PI},
      {0.0, M_PI / 2, 130.0, 0.0, -M_PI, M_PI},
      {0.0, -M_PI / 2, 100.0, 0.0, -M_PI, M_PI},
      {0.0, 0.0, 90.0, 0.0, -M_PI, M_PI},
  }};
  s.start_joints << 0.2, -0.7, 1.2, -0.5, -1.3, 0.3;

  s.plate_pose.rotation = Matrix3d::Identity();
  s.plate_pose.translation << 550.0, 0.0, 250.0;
  auto marker_at = [](double x, double y) {
    RigidTransform t;
    t.translation << x, y, 0.0;
    return t;
  };
  s.markers_in_plate = {marker_at(-60, -60), marker_at(-60, 60), marker_at(60, 60),
                        marker_at(60, -60)};

  s.lesions_base_mm = {{555.0, -15.0, 230.0}, {530.0, 25.0, 232.0}};

  s.t_ec.rotation = geom::rotvec_to_rotation({0.15, -0.10, 0.08});
  s.t_ec.translation << 40.0, -30.0, 60.0;
  s.t_eu.rotation = geom::rotvec_to_rotation({3.05, 0.10, 0.05});
  s.t_eu.translation << 10.0, 20.0, 120.0;

  // Camera nominal view: above the plate center, optical axis pointing down.
  s.camera_view_pose.rotation << 1, 0, 0, 0, -1, 0, 0, 0, -1;
  s.camera_view_pose.translation << 550.0, 0.0, 650.0;

  s.tool_mass_kg = 1.2;
  s.tool_com_mm << 5.0, -8.0, 60.0;
  s.sensor_bias.force << 0.8, -0.4, 1.1;
  s.sensor_bias.torque << 30.0, -12.0, 8.0;

  s.crosswire.point = {480.0, 120.0, 150.0};
  s.crosswire.visibility_halfwidth = 1.0;

  s.noise.marker_rot_sigma_rad = 0.2 * M_PI / 180.0;
  s.noise.marker_trans_sigma_mm = 0.5;
  s.noise.us_pixel_sigma = 0.5;
  s.noise.force_sigma_n = 0.05;
  s.noise.rf_background_sigma = 0.02;
  s.noise.visibility_halfwidth_mm = 1.0;
  s.noise.crosswire_plane_sigma_mm = 0.2;

  s.plant.stiffness_n_per_mm = 1.0;
  s.plant.damping_n_s_per_mm = 0.05;
  s.plant.force_noise_sigma_n = 0.05;

  // Gains retuned against the acceptance envelope on the default plant.
  s.control.gains = {12.0, 0.35, 0.0, 10.0};
  s.control.f_target_n = 5.0;
  s.control.v_t_mm_s = 7.27;
  s.control.k0_mm = 60.0;
  s.control.dt_s = 0.01;
  s.control.descend_speed_mm_s = 5.0;
  s.control.contact_threshold_n = 2.0;
  s.control.descend_timeout_s = 60.0;
  s.control.scan_length_mm = 30.0;
  s.control.scan_duration_s = 10.0;

  return s;
}

ScenarioConfig with_zero_noise(ScenarioConfig s) {
  s.noise.marker_rot_sigma_rad = 0.0;
  s.noise.marker_trans_sigma_mm = 0.0;
  s.noise.us_pixel_sigma = 0.0;
  s.noise.force_sigma_n = 0.0;
  s.noise.rf_background_sigma = 0.0;
  s.noise.crosswire_plane_sigma_mm = 0.0;
  s.plant.force_noise_sigma_n = 0.0;
  s.xray.background_sigma = 0.0;
  return s;
}

namespace {

json transform_to_json(const RigidTransform& t) {
  std::vector<double> rot(9);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) rot[static_cast<size_t>(3 * r + c)] = t.rotation(r, c);
  return json{{"rotation", rot}, {"translation", {t.translation.x(), t.translation.y(),
                                                  t.translation.z()}}};
}

RigidTransform transform_from_json(const json& j) {
  RigidTransform t;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) t.rotation(r, c) = j.at("rotation").at(3 * r + c).get<double>();
  for (int i = 0; i < 3; ++i) t.translation(i) = j.at("translation").at(i).get<double>();
  if (!t.is_valid(1e-6)) throw Error(Errc::IoError, "rotation in file is not orthonormal");
  return t;
}

json vec3_to_json(const Vector3d& v) { return json{v.x(), v.y(), v.z()}; }
Vector3d vec3_from_json(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}
json vec2_to_json(const Vector2d& v) { return json{v.x(), v.y()}; }
Vector2d vec2_from_json(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

}  // namespace

std::string scenario_to_json(const ScenarioConfig& s) {
  json j;
  j["seed"] = s.seed;

  auto& arm = j["arm"]["dh"] = json::array();
  for (const auto& jt : s.arm.joints)
    arm.push_back({{"a_mm", jt.a_mm},
                   {"alpha_rad", jt.alpha_rad},
                   {"d_mm", jt.d_mm},
                   {"theta_offset_rad", jt.theta_offset_rad},
                   {"limit_lo_rad", jt.limit_lo_rad},
                   {"limit_hi_rad", jt.limit_hi_rad}});
  j["start_joints_rad"] = std::vector<double>(s.start_joints.data(), s.start_joints.data() + 6);

  j["plate"]["pose"] = transform_to_json(s.plate_pose);
  auto& markers = j["plate"]["markers_in_plate"] = json::array();
  for (const auto& m : s.markers_in_plate) markers.push_back(transform_to_json(m));
  if (s.markers_px) {
    auto& px = j["plate"]["markers_px"] = json::array();
    for (const auto& p : *s.markers_px) px.push_back(vec2_to_json(p));
  }

  auto& lesions = j["lesions_base_mm"] = json::array();
  for (const auto& l : s.lesions_base_mm) lesions.push_back(vec3_to_json(l));
  if (s.lesions_px) {
    auto& px = j["lesions_px"] = json::array();
    for (const auto& p : *s.lesions_px) px.push_back(vec2_to_json(p));
  }

  j["t_ec"] = transform_to_json(s.t_ec);
  j["t_eu"] = transform_to_json(s.t_eu);
  j["camera_view_pose"] = transform_to_json(s.camera_view_pose);

  j["tool"] = {{"mass_kg", s.tool_mass_kg},
               {"com_mm", vec3_to_json(s.tool_com_mm)},
               {"bias_force_n", vec3_to_json(s.sensor_bias.force)},
               {"bias_torque_nmm", vec3_to_json(s.sensor_bias.torque)}};

  j["crosswire"] = {{"point_base_mm", vec3_to_json(s.crosswire.point)},
                    {"visibility_halfwidth_mm", s.crosswire.visibility_halfwidth}};

  j["noise"] = {{"marker_rot_sigma_deg", s.noise.marker_rot_sigma_rad * 180.0 / M_PI},
                {"marker_trans_sigma_mm", s.noise.marker_trans_sigma_mm},
                {"us_pixel_sigma", s.noise.us_pixel_sigma},
                {"force_sigma_n", s.noise.force_sigma_n},
                {"rf_background_sigma", s.noise.rf_background_sigma},
                {"visibility_halfwidth_mm", s.noise.visibility_halfwidth_mm},
                {"crosswire_plane_sigma_mm", s.noise.crosswire_plane_sigma_mm}};

  j["plant"] = {{"stiffness_n_per_mm", s.plant.stiffness_n_per_mm},
                {"damping_n_s_per_mm", s.plant.damping_n_s_per_mm},
                {"force_noise_sigma_n", s.plant.force_noise_sigma_n}};

  j["control"] = {{"kp_mm_s_per_n", s.control.gains.kp},
                  {"ti_s", s.control.gains.ti},
                  {"td_s", s.control.gains.td},
                  {"output_limit_mm_s", s.control.gains.output_limit},
                  {"f_target_n", s.control.f_target_n},
                  {"v_t_mm_s", s.control.v_t_mm_s},
                  {"k0_mm", s.control.k0_mm},
                  {"dt_s", s.control.dt_s},
                  {"descend_speed_mm_s", s.control.descend_speed_mm_s},
                  {"contact_threshold_n", s.control.contact_threshold_n},
                  {"descend_timeout_s", s.control.descend_timeout_s},
                  {"scan_length_mm", s.control.scan_length_mm},
                  {"scan_duration_s", s.control.scan_duration_s}};

  j["xray"] = {{"pixel_size_mm", s.xray.pixel_size_mm},
               {"rows", s.xray.rows},
               {"cols", s.xray.cols},
               {"origin_px", vec2_to_json(s.xray.origin_px)},
               {"background_mean", s.xray.background_mean},
               {"background_sigma", s.xray.background_sigma},
               {"marker_half_size_mm", s.xray.marker_half_size_mm},
               {"lesion_radius_mm", s.xray.lesion_radius_mm},
               {"lesion_contrast_sigma", s.xray.lesion_contrast_sigma}};

  j["us"] = {{"rows", s.us.rows},
             {"cols", s.us.cols},
             {"axial_spacing_mm", s.us.axial_spacing_mm},
             {"lateral_spacing_mm", s.us.lateral_spacing_mm},
             {"reflector_amplitude", s.us.reflector_amplitude},
             {"blob_sigma_mm", s.us.blob_sigma_mm},
             {"carrier_wavelength_mm", s.us.carrier_wavelength_mm}};

  j["calibration"] = {{"handeye_poses", s.calibration.handeye_poses},
                      {"us_samples", s.calibration.us_samples},
                      {"force_samples", s.calibration.force_samples},
                      {"force_degree", s.calibration.force_degree},
                      {"us_init_rot_perturb_deg",
                       s.calibration.us_init_rot_perturb_rad * 180.0 / M_PI},
                      {"us_init_trans_perturb_mm", s.calibration.us_init_trans_perturb_mm},
                      {"us_init_scale_perturb_rel", s.calibration.us_init_scale_perturb_rel},
                      {"use_solved", s.calibration.use_solved}};

  auto& boxes = j["obstacles"] = json::array();
  for (const auto& b : s.obstacles)
    boxes.push_back({{"min_mm", vec3_to_json(b.min_corner)}, {"max_mm", vec3_to_json(b.max_corner)}});

  return j.dump(2) + "\n";
}

ScenarioConfig scenario_from_json(const std::string& text) {
  const json j = json::parse(text);
  ScenarioConfig s = default_scenario();

  s.seed = j.at("seed").get<uint64_t>();
  const auto& dh = j.at("arm").at("dh");
  for (int i = 0; i < 6; ++i) {
    const auto& row = dh.at(i);
    auto& jt = s.arm.joints[static_cast<size_t>(i)];
    jt.a_mm = row.at("a_mm").get<double>();
    jt.alpha_rad = row.at("alpha_rad").get<double>();
    jt.d_mm = row.at("d_mm").get<double>();
    jt.theta_offset_rad = row.at("theta_offset_rad").get<double>();
    jt.limit_lo_rad = row.at("limit_lo_rad").get<double>();
    jt.limit_hi_rad = row.at("limit_hi_rad").get<double>();
    if (!(jt.limit_lo_rad < jt.limit_hi_rad))
      throw Error(Errc::IoError, "joint limits must satisfy lo < hi");
  }
  for (int i = 0; i < 6; ++i) s.start_joints(i) = j.at("start_joints_rad").at(i).get<double>();

  s.plate_pose = transform_from_json(j.at("plate").at("pose"));
  for (int i = 0; i < 4; ++i)
    s.markers_in_plate[static_cast<size_t>(i)] =
        transform_from_json(j.at("plate").at("markers_in_plate").at(i));
  if (j.at("plate").contains("markers_px")) {
    std::array<Vector2d, 4> px;
    for (int i = 0; i < 4; ++i) px[static_cast<size_t>(i)] = vec2_from_json(j.at("plate").at("markers_px").at(i));
    s.markers_px = px;
  }

  s.lesions_base_mm.clear();
  for (const auto& l : j.at("lesions_base_mm")) s.lesions_base_mm.push_back(vec3_from_json(l));
  if (j.contains("lesions_px")) {
    std::vector<Vector2d> px;
    for (const auto& p : j.at("lesions_px")) px.push_back(vec2_from_json(p));
    s.lesions_px = px;
  }

  s.t_ec = transform_from_json(j.at("t_ec"));
  s.t_eu = transform_from_json(j.at("t_eu"));
  s.camera_view_pose = transform_from_json(j.at("camera_view_pose"));

  s.tool_mass_kg = j.at("tool").at("mass_kg").get<double>();
  s.tool_com_mm = vec3_from_json(j.at("tool").at("com_mm"));
  s.sensor_bias.force = vec3_from_json(j.at("tool").at("bias_force_n"));
  s.sensor_bias.torque = vec3_from_json(j.at("tool").at("bias_torque_nmm"));

  s.crosswire.point = vec3_from_json(j.at("crosswire").at("point_base_mm"));
  s.crosswire.visibility_halfwidth = j.at("crosswire").at("visibility_halfwidth_mm").get<double>();

  const auto& noise = j.at("noise");
  s.noise.marker_rot_sigma_rad = noise.at("marker_rot_sigma_deg").get<double>() * M_PI / 180.0;
  s.noise.marker_trans_sigma_mm = noise.at("marker_trans_sigma_mm").get<double>();
  s.noise.us_pixel_sigma = noise.at("us_pixel_sigma").get<double>();
  s.noise.force_sigma_n = noise.at("force_sigma_n").get<double>();
  s.noise.rf_background_sigma = noise.at("rf_background_sigma").get<double>();
  s.noise.visibility_halfwidth_mm = noise.at("visibility_halfwidth_mm").get<double>();
  s.noise.crosswire_plane_sigma_mm = noise.at("crosswire_plane_sigma_mm").get<double>();

  const auto& plant = j.at("plant");
  s.plant.stiffness_n_per_mm = plant.at("stiffness_n_per_mm").get<double>();
  s.plant.damping_n_s_per_mm = plant.at("damping_n_s_per_mm").get<double>();
  s.plant.force_noise_sigma_n = plant.at("force_noise_sigma_n").get<double>();

  const auto& control = j.at("control");
  s.control.gains.kp = control.at("kp_mm_s_per_n").get<double>();
  s.control.gains.ti = control.at("ti_s").get<double>();
  s.control.gains.td = control.at("td_s").get<double>();
  s.control.gains.output_limit = control.at("output_limit_mm_s").get<double>();
  s.control.f_target_n = control.at("f_target_n").get<double>();
  s.control.v_t_mm_s = control.at("v_t_mm_s").get<double>();
  s.control.k0_mm = control.at("k0_mm").get<double>();
  s.control.dt_s = control.at("dt_s").get<double>();
  s.control.descend_speed_mm_s = control.at("descend_speed_mm_s").get<double>();
  s.control.contact_threshold_n = control.at("contact_threshold_n").get<double>();
  s.control.descend_timeout_s = control.at("descend_timeout_s").get<double>();
  s.control.scan_length_mm = control.at("scan_length_mm").get<double>();
  s.control.scan_duration_s = control.at("scan_duration_s").get<double>();

  const auto& xray = j.at("xray");
  s.xray.pixel_size_mm = xray.at("pixel_size_mm").get<double>();
  s.xray.rows = xray.at("rows").get<int>();
  s.xray.cols = xray.at("cols").get<int>();
  s.xray.origin_px = vec2_from_json(xray.at("origin_px"));
  s.xray.background_mean = xray.at("background_mean").get<double>();
  s.xray.background_sigma = xray.at("background_sigma").get<double>();
  s.xray.marker_half_size_mm = xray.at("marker_half_size_mm").get<double>();
  s.xray.lesion_radius_mm = xray.at("lesion_radius_mm").get<double>();
  s.xray.lesion_contrast_sigma = xray.at("lesion_contrast_sigma").get<double>();

  const auto& us = j.at("us");
  s.us.rows = us.at("rows").get<int>();
  s.us.cols = us.at("cols").get<int>();
  s.us.axial_spacing_mm = us.at("axial_spacing_mm").get<double>();
  s.us.lateral_spacing_mm = us.at("lateral_spacing_mm").get<double>();
  s.us.reflector_amplitude = us.at("reflector_amplitude").get<double>();
  s.us.blob_sigma_mm = us.at("blob_sigma_mm").get<double>();
  s.us.carrier_wavelength_mm = us.at("carrier_wavelength_mm").get<double>();

  const auto& cal = j.at("calibration");
  s.calibration.handeye_poses = cal.at("handeye_poses").get<int>();
  s.calibration.us_samples = cal.at("us_samples").get<int>();
  s.calibration.force_samples = cal.at("force_samples").get<int>();
  s.calibration.force_degree = cal.at("force_degree").get<int>();
  s.calibration.us_init_rot_perturb_rad =
      cal.at("us_init_rot_perturb_deg").get<double>() * M_PI / 180.0;
  s.calibration.us_init_trans_perturb_mm = cal.at("us_init_trans_perturb_mm").get<double>();
  s.calibration.us_init_scale_perturb_rel = cal.at("us_init_scale_perturb_rel").get<double>();
  s.calibration.use_solved = cal.at("use_solved").get<bool>();

  s.obstacles.clear();
  for (const auto& b : j.at("obstacles"))
    s.obstacles.push_back({vec3_from_json(b.at("min_mm")), vec3_from_json(b.at("max_mm"))});

  return s;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return scenario_from_json(ss.str());
}

void save_scenario(const std::string& path, const ScenarioConfig& s) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot open " + path);
  out << scenario_to_json(s);
}

std::array<RigidTransform, 4> observe_markers(const ScenarioConfig& s, const RigidTransform& t_be,
                                              Rng& rng) {
  const RigidTransform t_bc = compose(t_be, s.t_ec);
  const RigidTransform t_cb = invert(t_bc);
  std::array<RigidTransform, 4> obs;
  for (int i = 0; i < 4; ++i) {
    RigidTransform t_ct = compose(t_cb, s.marker_pose_base(i));
    if (t_ct.translation.z() <= 0.0)
      throw Error(Errc::MarkerBehindCamera, "marker " + std::to_string(i) + " behind the camera");
    const double angle = rng.normal(s.noise.marker_rot_sigma_rad);
    const Vector3d axis = rng.unit_vector();
    t_ct.rotation = t_ct.rotation * geom::rotvec_to_rotation(axis * angle);
    t_ct.translation += rng.normal3(s.noise.marker_trans_sigma_mm);
    obs[static_cast<size_t>(i)] = t_ct;
  }
  return obs;
}

Vector2d xray_pixel(const ScenarioConfig& s, const Vector3d& p_base) {
  const Vector3d q = geom::transform_point(geom::invert(s.plate_pose), p_base);
  return {s.xray.origin_px.x() + q.x() / s.xray.pixel_size_mm,
          s.xray.origin_px.y() + q.y() / s.xray.pixel_size_mm};
}

Mammogram xray_project(const ScenarioConfig& s, Rng& rng, bool render_raster) {
  // The projection runs along the plate normal; a device axis tilted more
  // than 30 degrees from it would make that approximation dishonest.
  const double tilt = std::acos(std::clamp(s.plate_pose.rotation.col(2).dot(Vector3d::UnitZ()),
                                           -1.0, 1.0));
  if (tilt > M_PI / 6.0)
    throw std::invalid_argument("plate normal tilted beyond 30 degrees from the device axis");

  Mammogram m;
  m.pixel_size_mm = s.xray.pixel_size_mm;
  for (int i = 0; i < 4; ++i)
    m.markers_px[static_cast<size_t>(i)] =
        s.markers_px ? (*s.markers_px)[static_cast<size_t>(i)]
                     : xray_pixel(s, s.marker_pose_base(i).translation);
  for (size_t i = 0; i < s.lesions_base_mm.size(); ++i)
    m.lesions_px.push_back(s.lesions_px ? (*s.lesions_px)[i]
                                        : xray_pixel(s, s.lesions_base_mm[i]));

  if (render_raster) {
    const int rows = s.xray.rows, cols = s.xray.cols;
    m.raster.resize(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        m.raster(r, c) =
            static_cast<float>(s.xray.background_mean + rng.normal(s.xray.background_sigma));

    const double marker_half_px = s.xray.marker_half_size_mm / s.xray.pixel_size_mm;
    for (const auto& px : m.markers_px) {
      for (int r = std::max(0, static_cast<int>(px.y() - marker_half_px));
           r <= std::min(rows - 1, static_cast<int>(px.y() + marker_half_px)); ++r)
        for (int c = std::max(0, static_cast<int>(px.x() - marker_half_px));
             c <= std::min(cols - 1, static_cast<int>(px.x() + marker_half_px)); ++c)
          m.raster(r, c) = static_cast<float>(s.xray.background_mean +
                                              10.0 * std::max(s.xray.background_sigma, 0.05));
    }
    const double radius_px = s.xray.lesion_radius_mm / s.xray.pixel_size_mm;
    const double contrast = s.xray.lesion_contrast_sigma * s.xray.background_sigma;
    for (const auto& px : m.lesions_px) {
      for (int r = std::max(0, static_cast<int>(px.y() - radius_px));
           r <= std::min(rows - 1, static_cast<int>(px.y() + radius_px)); ++r)
        for (int c = std::max(0, static_cast<int>(px.x() - radius_px));
             c <= std::min(cols - 1, static_cast<int>(px.x() + radius_px)); ++c)
          if ((Vector2d(c, r) - px).norm() <= radius_px)
            m.raster(r, c) += static_cast<float>(contrast);
    }
  }
  return m;
}

std::optional<Vector2d> us_observe_crosswire(const RigidTransform& t_bu,
                                             const CrossWireFiducial& fid, const Vector2d& scales,
                                             double sigma_px, Rng& rng,
                                             const UsImageParams* bounds) {
  const Vector3d q = geom::transform_point(geom::invert(t_bu), fid.point);
  if (std::abs(q.z()) > fid.visibility_halfwidth) return std::nullopt;
  Vector2d p(q.x() / scales.x(), q.y() / scales.y());
  if (bounds) {
    if (std::abs(p.x()) > bounds->cols / 2.0 || p.y() < 0.0 || p.y() > bounds->rows)
      return std::nullopt;
  }
  p.x() += rng.normal(sigma_px);
  p.y() += rng.normal(sigma_px);
  return p;
}

imaging::RfFrame synth_rf_frame(const ScenarioConfig& s, const RigidTransform& t_bu, Rng& rng) {
  imaging::RfFrame frame;
  frame.axial_spacing = s.us.axial_spacing_mm;
  frame.lateral_spacing = s.us.lateral_spacing_mm;
  frame.samples.resize(s.us.rows, s.us.cols);
  for (int r = 0; r < s.us.rows; ++r)
    for (int c = 0; c < s.us.cols; ++c)
      frame.samples(r, c) = static_cast<float>(rng.normal(s.noise.rf_background_sigma));

  const RigidTransform t_ub = geom::invert(t_bu);
  const double hw = s.noise.visibility_halfwidth_mm;
  for (const auto& lesion : s.lesions_base_mm) {
    const Vector3d q = geom::transform_point(t_ub, lesion);
    const double elev_amp = s.us.reflector_amplitude * std::exp(-q.z() * q.z() / (2.0 * hw * hw));
    if (elev_amp < 1e-4 * s.us.reflector_amplitude) continue;

    const double col_f = q.x() / s.us.lateral_spacing_mm + s.us.cols / 2.0;
    const double row_f = q.y() / s.us.axial_spacing_mm;
    const double sigma = s.us.blob_sigma_mm;
    const int reach_r = static_cast<int>(std::ceil(3.0 * sigma / s.us.axial_spacing_mm));
    const int reach_c = static_cast<int>(std::ceil(3.0 * sigma / s.us.lateral_spacing_mm));
    for (int r = std::max(0, static_cast<int>(row_f) - reach_r);
         r <= std::min(s.us.rows - 1, static_cast<int>(row_f) + reach_r); ++r) {
      const double carrier =
          std::sin(2.0 * M_PI * (r * s.us.axial_spacing_mm) / s.us.carrier_wavelength_mm + 0.7);
      for (int c = std::max(0, static_cast<int>(col_f) - reach_c);
           c <= std::min(s.us.cols - 1, static_cast<int>(col_f) + reach_c); ++c) {
        const double dy = (r - row_f) * s.us.axial_spacing_mm;
        const double dx = (c - col_f) * s.us.lateral_spacing_mm;
        const double blob = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
        frame.samples(r, c) += static_cast<float>(elev_amp * blob * carrier);
      }
    }
  }
  return frame;
}

HandeyeData generate_handeye_data(const ScenarioConfig& s, int n_poses, Rng& rng) {
  if (n_poses < 3) throw Error(Errc::TooFewPoses, "need at least 3 poses");
  HandeyeData data;
  const RigidTransform t_ce = invert(s.t_ec);
  while (static_cast<int>(data.robot_poses.size()) < n_poses) {
    // Random view pose around the nominal one; keep only poses where the
    // markers stay in front of the camera.
    RigidTransform view = s.camera_view_pose;
    view.rotation = view.rotation * geom::rotvec_to_rotation(rng.unit_vector() *
                                                             rng.uniform(0.1, 0.7));
    view.translation += Vector3d(rng.uniform(-80, 80), rng.uniform(-80, 80),
                                 rng.uniform(-60, 60));
    const RigidTransform t_be = compose(view, t_ce);
    try {
      const auto obs = observe_markers(s, t_be, rng);
      data.robot_poses.push_back(t_be);
      data.marker_poses.push_back(obs[0]);
    } catch (const Error& e) {
      if (e.code() != Errc::MarkerBehindCamera) throw;
    }
  }
  return data;
}

std::vector<uscalib::BxpSample> generate_bxp_samples(const ScenarioConfig& s, int n_samples,
                                                     Rng& rng) {
  std::vector<uscalib::BxpSample> samples;
  const uscalib::UsCalibration truth = s.true_us_calibration();
  const RigidTransform t_ue = invert(s.t_eu);
  Eigen::Matrix3d down;
  down << 1, 0, 0, 0, -1, 0, 0, 0, -1;  // probe looking down

  while (static_cast<int>(samples.size()) < n_samples) {
    RigidTransform t_bu;
    t_bu.rotation = down * geom::rotvec_to_rotation(rng.unit_vector() * rng.uniform(0.05, 0.6));
    const double u = rng.uniform(-s.us.cols / 2.0 + 6.0, s.us.cols / 2.0 - 6.0);
    const double v = rng.uniform(8.0, s.us.rows - 8.0);
    double z_off = rng.normal(s.noise.crosswire_plane_sigma_mm);
    z_off = std::clamp(z_off, -s.crosswire.visibility_halfwidth, s.crosswire.visibility_halfwidth);
    const Vector3d in_image(truth.scale.x() * u, truth.scale.y() * v, z_off);
    t_bu.translation = s.crosswire.point - t_bu.rotation * in_image;

    const RigidTransform t_be = compose(t_bu, t_ue);
    const auto obs = us_observe_crosswire(compose(t_be, s.t_eu), s.crosswire, truth.scale,
                                          s.noise.us_pixel_sigma, rng, &s.us);
    if (!obs) continue;
    samples.push_back({t_be, *obs});
  }
  return samples;
}

std::vector<forcecalib::TrainingSample> generate_force_samples(const ScenarioConfig& s,
                                                               int n_samples, Rng& rng) {
  std::vector<forcecalib::TrainingSample> samples;
  samples.reserve(static_cast<size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) {
    // Restricted orientation workspace, mirroring a real arm that cannot
    // reach every pose while collecting compensation data.
    const Vector3d rotvec(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2),
                          rng.uniform(-1.2, 1.2));
    const Vector3d trans(rng.uniform(350, 750), rng.uniform(-250, 250), rng.uniform(100, 500));
    forcecalib::TrainingSample sample;
    sample.pose << rotvec, trans;
    const Eigen::Matrix3d r = geom::rotvec_to_rotation(rotvec);
    forcecalib::Wrench w = gravity_wrench(s.tool_mass_kg, s.tool_com_mm, r, s.sensor_bias);
    w.force += rng.normal3(s.noise.force_sigma_n);
    w.torque += rng.normal3(10.0 * s.noise.force_sigma_n);
    samples.push_back(sample);
    samples.back().reading = w;
  }
  return samples;
}

}  // namespace mammobot::sim
