#include "mammobot/imaging.hpp"

#include <cmath>
#include <mutex>

#include <fftw3.h>

namespace mammobot::imaging {

namespace {

// FFTW's planner is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  fftw_complex* data;
  explicit FftwBuffer(size_t n) : data(fftw_alloc_complex(n)) {}
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
};

}  // namespace

std::vector<double> hilbert_envelope(const std::vector<double>& line) {
  const size_t n = line.size();
  if (n < 2) throw std::invalid_argument("line must have at least 2 samples");

  FftwBuffer buf(n), spec(n);
  for (size_t i = 0; i < n; ++i) {
    buf.data[i][0] = line[i];
    buf.data[i][1] = 0.0;
  }

  fftw_plan fwd, inv;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fwd = fftw_plan_dft_1d(static_cast<int>(n), buf.data, spec.data, FFTW_FORWARD,
                           FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
    inv = fftw_plan_dft_1d(static_cast<int>(n), spec.data, buf.data, FFTW_BACKWARD,
                           FFTW_ESTIMATE);
  }
  fftw_execute(fwd);

  // Analytic-signal weights: keep DC (and Nyquist for even n), double the
  // positive frequencies, zero the negative ones.
  const size_t half = n / 2;
  for (size_t k = 1; k < half; ++k) {
    spec.data[k][0] *= 2.0;
    spec.data[k][1] *= 2.0;
  }
  if (n % 2 == 1) {
    spec.data[half][0] *= 2.0;
    spec.data[half][1] *= 2.0;
  }
  for (size_t k = half + 1; k < n; ++k) {
    spec.data[k][0] = 0.0;
    spec.data[k][1] = 0.0;
  }

  fftw_execute(inv);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
  }

  std::vector<double> env(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (size_t i = 0; i < n; ++i)
    env[i] = std::hypot(buf.data[i][0] * scale, buf.data[i][1] * scale);
  return env;
}

namespace {

Eigen::MatrixXd envelope_image(const RfFrame& frame) {
  const auto rows = frame.samples.rows();
  const auto cols = frame.samples.cols();
  if (rows < 2 || cols < 1) throw std::invalid_argument("frame too small");
  Eigen::MatrixXd env(rows, cols);
  std::vector<double> line(rows);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) line[r] = frame.samples(r, c);
    const auto e = hilbert_envelope(line);
    for (Eigen::Index r = 0; r < rows; ++r) env(r, c) = e[r];
  }
  return env;
}

}  // namespace

double envelope_max(const RfFrame& frame) { return envelope_image(frame).maxCoeff(); }

Eigen::MatrixXf bmode(const RfFrame& frame, double dynamic_range_db,
                      std::optional<double> global_max) {
  if (dynamic_range_db <= 0) throw std::invalid_argument("dynamic range must be positive");
  const Eigen::MatrixXd env = envelope_image(frame);
  const double peak = global_max.value_or(env.maxCoeff());
  if (!(peak > 0)) throw Error(Errc::AllZeroFrame, "envelope maximum is zero");

  Eigen::MatrixXf out(env.rows(), env.cols());
  for (Eigen::Index c = 0; c < env.cols(); ++c) {
    for (Eigen::Index r = 0; r < env.rows(); ++r) {
      const double e = env(r, c);
      double db = e > 0 ? 20.0 * std::log10(e / peak) : -dynamic_range_db;
      db = std::clamp(db, -dynamic_range_db, 0.0);
      out(r, c) = static_cast<float>(db / dynamic_range_db + 1.0);
    }
  }
  return out;
}

UsVolume assemble_volume(const std::vector<Eigen::MatrixXf>& frames, double frame_spacing,
                         double axial_spacing, double lateral_spacing) {
  if (frames.empty()) throw std::invalid_argument("no frames");
  if (frame_spacing <= 0) throw std::invalid_argument("frame spacing must be positive");
  for (const auto& f : frames)
    if (f.rows() != frames[0].rows() || f.cols() != frames[0].cols())
      throw Error(Errc::ShapeMismatch, "frames differ in shape");
  return {frames, axial_spacing, lateral_spacing, frame_spacing};
}

PeakLocation locate_peak(const UsVolume& volume) {
  if (volume.frames.empty()) throw std::invalid_argument("empty volume");
  PeakLocation best{0, 0, 0, volume.frames[0](0, 0)};
  for (size_t f = 0; f < volume.frames.size(); ++f) {
    const auto& img = volume.frames[f];
    for (Eigen::Index r = 0; r < img.rows(); ++r)
      for (Eigen::Index c = 0; c < img.cols(); ++c)
        if (img(r, c) > best.value) best = {static_cast<int>(f), static_cast<int>(r),
                                            static_cast<int>(c), img(r, c)};
  }
  return best;
}

double cnr(const Eigen::MatrixXf& image, const Roi& target, const Roi& background) {
  if (!target.contained_in(image.rows(), image.cols()) ||
      !background.contained_in(image.rows(), image.cols()))
    throw std::invalid_argument("ROI out of image bounds");

  auto mean_of = [&](const Roi& roi) {
    double sum = 0.0;
    for (int r = roi.row0; r < roi.row0 + roi.rows; ++r)
      for (int c = roi.col0; c < roi.col0 + roi.cols; ++c) sum += image(r, c);
    return sum / (static_cast<double>(roi.rows) * roi.cols);
  };

  const double mt = mean_of(target);
  const double mb = mean_of(background);
  double var = 0.0;
  for (int r = background.row0; r < background.row0 + background.rows; ++r)
    for (int c = background.col0; c < background.col0 + background.cols; ++c) {
      const double d = image(r, c) - mb;
      var += d * d;
    }
  var /= static_cast<double>(background.rows) * background.cols;  // population
  const double sigma = std::sqrt(var);
  if (!(sigma > 0)) throw Error(Errc::ZeroBackgroundVariance, "background std is zero");
  return std::abs(mt - mb) / sigma;
}

}  // namespace mammobot::imaging
