#pragma once

#include <string>

#include "mammobot/imaging.hpp"

namespace mammobot::rasterio {

/// Volume raster: little-endian float32, frame-major then row-major, with a
/// JSON sidecar at <path>.json describing shape and spacings.
void save_volume(const std::string& path, const imaging::UsVolume& volume);
imaging::UsVolume load_volume(const std::string& path);

/// Single image raster with a one-frame sidecar.
void save_image(const std::string& path, const Eigen::MatrixXf& image,
                double axial_spacing = 1.0, double lateral_spacing = 1.0);
Eigen::MatrixXf load_image(const std::string& path);

/// 8-bit binary PGM for quick inspection; input values are clamped to [0, 1].
void save_pgm(const std::string& path, const Eigen::MatrixXf& image);

}  // namespace mammobot::rasterio
