#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mammobot/errors.hpp"

namespace mammobot::imaging {

/// One RF frame: rows are axial samples, columns are scan lines.
struct RfFrame {
  Eigen::MatrixXf samples;
  double axial_spacing = 1.0;    // mm per sample
  double lateral_spacing = 1.0;  // mm per line
};

/// Ordered stack of equally shaped frames along the elevational axis.
struct UsVolume {
  std::vector<Eigen::MatrixXf> frames;
  double axial_spacing = 1.0;
  double lateral_spacing = 1.0;
  double frame_spacing = 1.0;  // mm, elevational

  double elevational_extent() const {
    return frames.empty() ? 0.0 : (static_cast<double>(frames.size()) - 1.0) * frame_spacing;
  }
};

struct Roi {
  int row0 = 0;
  int col0 = 0;
  int rows = 1;
  int cols = 1;

  bool contained_in(Eigen::Index image_rows, Eigen::Index image_cols) const {
    return row0 >= 0 && col0 >= 0 && rows >= 1 && cols >= 1 &&
           row0 + rows <= image_rows && col0 + cols <= image_cols;
  }
};

/// Magnitude of the analytic signal, computed in the frequency domain
/// (positive frequencies doubled, negative zeroed, DC and Nyquist kept).
std::vector<double> hilbert_envelope(const std::vector<double>& line);

/// Log-compressed envelope image in [0, 1]. Envelopes are normalized by the
/// frame's own maximum unless `global_max` pins a volume-wide reference.
Eigen::MatrixXf bmode(const RfFrame& frame, double dynamic_range_db,
                      std::optional<double> global_max = std::nullopt);

/// Per-frame envelope maximum, for volume-global B-mode normalization.
double envelope_max(const RfFrame& frame);

UsVolume assemble_volume(const std::vector<Eigen::MatrixXf>& frames, double frame_spacing,
                         double axial_spacing = 1.0, double lateral_spacing = 1.0);

struct PeakLocation {
  int frame = 0;
  int row = 0;
  int col = 0;
  float value = 0.0f;
};

/// Global intensity argmax; ties break to the lowest (frame, row, col) in
/// scan order.
PeakLocation locate_peak(const UsVolume& volume);

/// |mean(target) - mean(background)| / population std(background).
double cnr(const Eigen::MatrixXf& image, const Roi& target, const Roi& background);

}  // namespace mammobot::imaging
