#pragma once

#include <array>
#include <string>
#include <vector>

#include "mammobot/geometry.hpp"

namespace mammobot::registration {

using geom::HomogeneousPoint2;
using geom::RigidTransform;
using Eigen::Matrix3d;
using Eigen::Vector2d;
using Eigen::Vector3d;

/// Compression-plate frame built from the four markers, plus each marker
/// center expressed in that frame.
struct PlatePose {
  RigidTransform t_bp;
  std::array<Vector2d, 4> marker_centers_plate;  // mm, z dropped
};

/// 3x3 projective map, Frobenius norm 1, sign fixed so h(2,2) >= 0.
/// Maps mammogram pixels to plate mm.
struct Homography {
  Matrix3d h = Matrix3d::Identity() / std::sqrt(3.0);
};

struct Correspondence {
  HomogeneousPoint2 plate;      // (x, y, 1) mm
  HomogeneousPoint2 mammogram;  // pixels
};

/// Plate frame per the bounding-box construction: n_z averages the marker
/// z-axes, n_y' runs along the box edge (p4-p1)+(p3-p2), n_y is n_y'
/// re-orthogonalized against n_z, n_x = n_y x n_z, origin at the centroid.
PlatePose estimate_plate_pose(const std::array<RigidTransform, 4>& marker_poses_base);

struct PlateProjection {
  HomogeneousPoint2 point;  // (x, y, 1)
  double z_residual;        // discarded out-of-plane component, mm
};

PlateProjection project_to_plate(const PlatePose& pp, const Vector3d& p_base);

struct DltOptions {
  // Hartley-style conditioning (centroid-centered, sqrt(2) mean distance),
  // undone after the solve. Disable to compare against the raw
  // eigendecomposition oracle.
  bool normalize = true;
};

/// Four-point DLT estimate of the mammogram->plate homography via the
/// smallest singular vector of the stacked constraint matrix.
Homography estimate_homography_dlt(const std::array<Correspondence, 4>& corrs,
                                   const DltOptions& opts = {});

/// Mammogram pixel -> robot base target: q = h * lesion_px, dehomogenize,
/// lift to the plate plane as (q_x, q_y, 0), then map by t_bp.
Vector3d map_lesion(const PlatePose& pp, const Homography& h,
                    const HomogeneousPoint2& lesion_px);

/// Mammogram annotation file: {"markers_px": [[u,v] x4], "lesions_px":
/// [[u,v]...]}; pixel origin top-left, x right, y down.
struct Annotation {
  std::array<Vector2d, 4> markers_px;
  std::vector<Vector2d> lesions_px;
};

void save_annotation(const std::string& path, const Annotation& ann);
Annotation load_annotation(const std::string& path);

}  // namespace mammobot::registration
