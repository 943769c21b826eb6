#include "mammobot/rasterio.hpp"

#include <bit>
#include <cstdint>
#include <fstream>

#include <json.hpp>

static_assert(std::endian::native == std::endian::little,
              "raster format is little-endian float32");

namespace mammobot::rasterio {

namespace {

void write_sidecar(const std::string& path, Eigen::Index rows, Eigen::Index cols,
                   size_t frames, double axial, double lateral, double elevational) {
  nlohmann::json j;
  j["rows"] = rows;
  j["cols"] = cols;
  j["frames"] = frames;
  j["spacings"] = {{"axial_mm", axial}, {"lateral_mm", lateral}, {"frame_mm", elevational}};
  std::ofstream out(path + ".json");
  if (!out) throw Error(Errc::IoError, "cannot open " + path + ".json");
  out << j.dump(2) << '\n';
}

nlohmann::json read_sidecar(const std::string& path) {
  std::ifstream in(path + ".json");
  if (!in) throw Error(Errc::IoError, "cannot open " + path + ".json");
  nlohmann::json j;
  in >> j;
  return j;
}

void write_frame(std::ofstream& out, const Eigen::MatrixXf& frame) {
  // Row-major on disk.
  for (Eigen::Index r = 0; r < frame.rows(); ++r)
    for (Eigen::Index c = 0; c < frame.cols(); ++c) {
      const float v = frame(r, c);
      out.write(reinterpret_cast<const char*>(&v), sizeof(float));
    }
}

Eigen::MatrixXf read_frame(std::ifstream& in, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXf frame(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      float v;
      in.read(reinterpret_cast<char*>(&v), sizeof(float));
      frame(r, c) = v;
    }
  if (!in) throw Error(Errc::IoError, "raster truncated");
  return frame;
}

}  // namespace

void save_volume(const std::string& path, const imaging::UsVolume& volume) {
  if (volume.frames.empty()) throw std::invalid_argument("empty volume");
  write_sidecar(path, volume.frames[0].rows(), volume.frames[0].cols(),
                volume.frames.size(), volume.axial_spacing, volume.lateral_spacing,
                volume.frame_spacing);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot open " + path);
  for (const auto& f : volume.frames) write_frame(out, f);
}

imaging::UsVolume load_volume(const std::string& path) {
  const auto j = read_sidecar(path);
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto frames = j.at("frames").get<size_t>();
  imaging::UsVolume v;
  v.axial_spacing = j.at("spacings").at("axial_mm").get<double>();
  v.lateral_spacing = j.at("spacings").at("lateral_mm").get<double>();
  v.frame_spacing = j.at("spacings").at("frame_mm").get<double>();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  v.frames.reserve(frames);
  for (size_t f = 0; f < frames; ++f) v.frames.push_back(read_frame(in, rows, cols));
  return v;
}

void save_image(const std::string& path, const Eigen::MatrixXf& image, double axial_spacing,
                double lateral_spacing) {
  write_sidecar(path, image.rows(), image.cols(), 1, axial_spacing, lateral_spacing, 1.0);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot open " + path);
  write_frame(out, image);
}

Eigen::MatrixXf load_image(const std::string& path) {
  const auto j = read_sidecar(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  return read_frame(in, j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
}

void save_pgm(const std::string& path, const Eigen::MatrixXf& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot open " + path);
  out << "P5\n" << image.cols() << ' ' << image.rows() << "\n255\n";
  for (Eigen::Index r = 0; r < image.rows(); ++r)
    for (Eigen::Index c = 0; c < image.cols(); ++c) {
      const float v = std::clamp(image(r, c), 0.0f, 1.0f);
      const auto byte = static_cast<uint8_t>(std::lround(v * 255.0f));
      out.write(reinterpret_cast<const char*>(&byte), 1);
    }
}

}  // namespace mammobot::rasterio
