#include "mammobot/registration.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace mammobot::registration {

using Eigen::Matrix;
using Eigen::MatrixXd;
using Eigen::VectorXd;

PlatePose estimate_plate_pose(const std::array<RigidTransform, 4>& marker_poses_base) {
  Vector3d nz_sum = Vector3d::Zero();
  for (const auto& m : marker_poses_base) nz_sum += m.rotation.col(2);
  const Vector3d ref = marker_poses_base[0].rotation.col(2);
  for (const auto& m : marker_poses_base) {
    if (ref.dot(m.rotation.col(2)) < std::cos(M_PI / 4.0))
      throw std::invalid_argument("marker z-axes disagree by more than 45 degrees");
  }
  const Vector3d nz = nz_sum.normalized();

  const Vector3d& p1 = marker_poses_base[0].translation;
  const Vector3d& p2 = marker_poses_base[1].translation;
  const Vector3d& p3 = marker_poses_base[2].translation;
  const Vector3d& p4 = marker_poses_base[3].translation;

  const Vector3d edge = (p4 - p1) + (p3 - p2);
  if (edge.norm() < 1e-9)
    throw Error(Errc::DegenerateMarkers, "bounding-box edge direction vanished");
  const Vector3d ny_prime = edge.normalized();

  const Vector3d ny_raw = ny_prime - ny_prime.dot(nz) * nz;
  if (ny_raw.norm() < 1e-9)
    throw Error(Errc::DegenerateMarkers, "edge direction parallel to plate normal");
  const Vector3d ny = ny_raw.normalized();
  const Vector3d nx = ny.cross(nz);

  PlatePose pp;
  pp.t_bp.rotation.col(0) = nx;
  pp.t_bp.rotation.col(1) = ny;
  pp.t_bp.rotation.col(2) = nz;
  pp.t_bp.translation = 0.25 * (p1 + p2 + p3 + p4);
  for (int i = 0; i < 4; ++i) {
    const Vector3d q = geom::transform_point(geom::invert(pp.t_bp),
                                             marker_poses_base[i].translation);
    pp.marker_centers_plate[i] = q.head<2>();
  }
  return pp;
}

PlateProjection project_to_plate(const PlatePose& pp, const Vector3d& p_base) {
  const Vector3d q = geom::transform_point(geom::invert(pp.t_bp), p_base);
  return {HomogeneousPoint2(q.x(), q.y(), 1.0), q.z()};
}

namespace {

// Similarity that moves the dehomogenized points to centroid 0 with mean
// distance sqrt(2).
Matrix3d conditioning_transform(const std::array<HomogeneousPoint2, 4>& pts) {
  Vector2d centroid = Vector2d::Zero();
  std::array<Vector2d, 4> e;
  for (int i = 0; i < 4; ++i) {
    e[i] = pts[i].head<2>() / pts[i].z();
    centroid += e[i];
  }
  centroid /= 4.0;
  double mean_dist = 0.0;
  for (const auto& p : e) mean_dist += (p - centroid).norm();
  mean_dist /= 4.0;
  const double s = mean_dist > 1e-12 ? std::sqrt(2.0) / mean_dist : 1.0;
  Matrix3d t = Matrix3d::Identity();
  t(0, 0) = t(1, 1) = s;
  t(0, 2) = -s * centroid.x();
  t(1, 2) = -s * centroid.y();
  return t;
}

double triangle_area2(const Vector2d& a, const Vector2d& b, const Vector2d& c) {
  return 0.5 * std::abs((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
}

Matrix3d normalize_sign(Matrix3d h) {
  h /= h.norm();
  if (h(2, 2) < 0) h = -h;
  return h;
}

}  // namespace

Homography estimate_homography_dlt(const std::array<Correspondence, 4>& corrs,
                                   const DltOptions& opts) {
  std::array<HomogeneousPoint2, 4> src, dst;
  for (int i = 0; i < 4; ++i) {
    if (std::abs(corrs[i].mammogram.z()) < 1e-15 || std::abs(corrs[i].plate.z()) < 1e-15)
      throw std::invalid_argument("correspondence w-component is zero");
    src[i] = corrs[i].mammogram;
    dst[i] = corrs[i].plate;
  }

  // No three mammogram points may be collinear.
  std::array<Vector2d, 4> px;
  for (int i = 0; i < 4; ++i) px[i] = src[i].head<2>() / src[i].z();
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      for (int l = j + 1; l < 4; ++l)
        if (triangle_area2(px[i], px[j], px[l]) < 1e-6)
          throw Error(Errc::DegenerateConfiguration, "three mammogram points are collinear");

  Matrix3d t_src = Matrix3d::Identity(), t_dst = Matrix3d::Identity();
  if (opts.normalize) {
    t_src = conditioning_transform(src);
    t_dst = conditioning_transform(dst);
    for (int i = 0; i < 4; ++i) {
      src[i] = t_src * src[i];
      dst[i] = t_dst * dst[i];
    }
  }

  // Two rows per correspondence for dst ~ H src, h stacked row-major.
  Matrix<double, 8, 9> a;
  for (int i = 0; i < 4; ++i) {
    const auto& x = src[i];
    const auto& y = dst[i];
    a.row(2 * i) << Eigen::RowVector3d::Zero(), -y.z() * x.transpose(), y.y() * x.transpose();
    a.row(2 * i + 1) << y.z() * x.transpose(), Eigen::RowVector3d::Zero(), -y.x() * x.transpose();
  }

  Eigen::JacobiSVD<Matrix<double, 8, 9>> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // With 8 equations in 9 unknowns the smallest singular value is zero by
  // construction; the solution is unique only while the next one stays away
  // from it.
  if (sv(7) <= 1e-9 * sv(0))
    throw Error(Errc::RankAmbiguity, "homography nullspace is not one-dimensional");
  const VectorXd h = svd.matrixV().col(8);

  Matrix3d hm;
  hm << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  if (opts.normalize) hm = t_dst.inverse() * hm * t_src;

  if (std::abs(hm.determinant()) < 1e-15 * std::pow(hm.norm(), 3))
    throw Error(Errc::DegenerateConfiguration, "estimated homography is singular");

  return {normalize_sign(hm)};
}

Vector3d map_lesion(const PlatePose& pp, const Homography& h,
                    const HomogeneousPoint2& lesion_px) {
  const HomogeneousPoint2 q = h.h * lesion_px;
  if (std::abs(q.z()) <= 1e-12)
    throw Error(Errc::PointAtInfinity, "mapped lesion has (near) zero w");
  const Vector3d on_plate(q.x() / q.z(), q.y() / q.z(), 0.0);
  return geom::transform_point(pp.t_bp, on_plate);
}

void save_annotation(const std::string& path, const Annotation& ann) {
  nlohmann::json j;
  auto& markers = j["markers_px"] = nlohmann::json::array();
  for (const auto& m : ann.markers_px) markers.push_back({m.x(), m.y()});
  auto& lesions = j["lesions_px"] = nlohmann::json::array();
  for (const auto& l : ann.lesions_px) lesions.push_back({l.x(), l.y()});
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot open " + path);
  out << j.dump(2) << '\n';
}

Annotation load_annotation(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  nlohmann::json j;
  in >> j;
  Annotation ann;
  for (int i = 0; i < 4; ++i)
    ann.markers_px[i] = {j.at("markers_px").at(i).at(0).get<double>(),
                         j.at("markers_px").at(i).at(1).get<double>()};
  for (const auto& l : j.at("lesions_px"))
    ann.lesions_px.push_back({l.at(0).get<double>(), l.at(1).get<double>()});
  return ann;
}

}  // namespace mammobot::registration
