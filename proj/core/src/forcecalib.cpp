#include "mammobot/forcecalib.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace mammobot::forcecalib {

using Eigen::MatrixXd;
using Eigen::VectorXd;

int BiasModel::basis_size() const {
  int k = 1;
  for (int d : degrees) k *= d + 1;
  return k;
}

Eigen::VectorXd bernstein_basis(double u, int degree, bool* clamped) {
  if (clamped) *clamped = u < 0.0 || u > 1.0;
  u = std::clamp(u, 0.0, 1.0);
  VectorXd b(degree + 1);
  // C(n,k) u^k (1-u)^(n-k) via the stable forward recurrence on k.
  double coeff = 1.0;
  for (int k = 0; k <= degree; ++k) {
    b(k) = coeff * std::pow(u, k) * std::pow(1.0 - u, degree - k);
    coeff = coeff * (degree - k) / (k + 1.0);
  }
  return b;
}

namespace {

double normalize_input(double v, const std::pair<double, double>& range) {
  return (v - range.first) / (range.second - range.first);
}

VectorXd tensor_basis(const BiasModel& model, const Pose6& pose, bool* clamped) {
  std::array<VectorXd, 6> per_dim;
  bool any_clamped = false;
  for (int d = 0; d < 6; ++d) {
    bool c = false;
    per_dim[d] = bernstein_basis(normalize_input(pose(d), model.normalization[d]),
                                 model.degrees[d], &c);
    any_clamped |= c;
  }
  if (clamped) *clamped = any_clamped;

  VectorXd basis(model.basis_size());
  // Lexicographic tensor product, dimension 0 slowest.
  for (int i = 0; i < basis.size(); ++i) {
    int rest = i;
    double v = 1.0;
    for (int d = 5; d >= 0; --d) {
      const int width = model.degrees[d] + 1;
      v *= per_dim[d](rest % width);
      rest /= width;
    }
    basis(i) = v;
  }
  return basis;
}

}  // namespace

BiasModel fit_bias_model(const std::vector<TrainingSample>& samples, int degree,
                         FitReport* report) {
  if (degree < 0) throw std::invalid_argument("degree must be non-negative");

  BiasModel model;
  // Full 6-D tensor basis only when the data can support it; otherwise the
  // basis covers the rotation inputs alone.
  long full_size = 1;
  for (int d = 0; d < 6; ++d) full_size *= degree + 1;
  const bool full = static_cast<long>(samples.size()) >= full_size;
  for (int d = 0; d < 6; ++d) model.degrees[d] = (d < 3 || full) ? degree : 0;

  if (static_cast<int>(samples.size()) < model.basis_size())
    throw Error(Errc::TooFewSamples, "fewer samples than basis functions");

  for (int d = 0; d < 6; ++d) {
    double lo = samples[0].pose(d), hi = samples[0].pose(d);
    for (const auto& s : samples) {
      lo = std::min(lo, s.pose(d));
      hi = std::max(hi, s.pose(d));
    }
    if (!(lo < hi)) {
      // Constant input: widen to a unit box so normalization stays defined.
      lo -= 0.5;
      hi += 0.5;
    }
    model.normalization[d] = {lo, hi};
  }

  const auto m = static_cast<Eigen::Index>(samples.size());
  const int k = model.basis_size();
  MatrixXd design(m, k);
  MatrixXd targets(m, 6);
  bool any_clamped = false;
  for (Eigen::Index i = 0; i < m; ++i) {
    bool c = false;
    design.row(i) = tensor_basis(model, samples[i].pose, &c).transpose();
    any_clamped |= c;
    targets.row(i).segment<3>(0) = samples[i].reading.force.transpose();
    targets.row(i).segment<3>(3) = samples[i].reading.torque.transpose();
  }

  Eigen::BDCSVD<MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& sv = svd.singularValues();
  // sigma_min^2 / sigma_max^2 is the relative conditioning of the normal
  // equations; reject below 1e-10.
  if (sv(sv.size() - 1) < 1e-5 * sv(0))
    throw Error(Errc::RankDeficient, "insufficient pose diversity for the requested degree");

  model.coefficients = svd.solve(targets).transpose();  // 6 x k

  if (report) {
    const MatrixXd resid = design * model.coefficients.transpose() - targets;
    report->training_rms = std::sqrt(resid.squaredNorm() / static_cast<double>(resid.size()));
    for (int ch = 0; ch < 6; ++ch)
      report->channel_rms[ch] =
          std::sqrt(resid.col(ch).squaredNorm() / static_cast<double>(m));
    report->any_input_clamped = any_clamped;
  }
  return model;
}

Wrench predict(const BiasModel& model, const Pose6& pose) {
  const VectorXd basis = tensor_basis(model, pose, nullptr);
  const Eigen::Matrix<double, 6, 1> out = model.coefficients * basis;
  Wrench w;
  w.force = out.segment<3>(0);
  w.torque = out.segment<3>(3);
  return w;
}

Wrench compensate(const BiasModel& model, const Pose6& pose, const Wrench& reading) {
  const Wrench bias = predict(model, pose);
  return {reading.force - bias.force, reading.torque - bias.torque};
}

void save_bias_model(const std::string& path, const BiasModel& model) {
  nlohmann::json j;
  j["degrees"] = model.degrees;
  auto& norm = j["normalization"] = nlohmann::json::array();
  for (const auto& [lo, hi] : model.normalization) norm.push_back({lo, hi});
  auto& rows = j["coefficients"] = nlohmann::json::array();
  for (int ch = 0; ch < 6; ++ch) {
    std::vector<double> row(model.coefficients.cols());
    for (int i = 0; i < model.coefficients.cols(); ++i) row[i] = model.coefficients(ch, i);
    rows.push_back(row);
  }
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot open " + path);
  out << j.dump(2) << '\n';
}

BiasModel load_bias_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  nlohmann::json j;
  in >> j;
  BiasModel model;
  for (int d = 0; d < 6; ++d) {
    model.degrees[d] = j.at("degrees").at(d).get<int>();
    model.normalization[d] = {j.at("normalization").at(d).at(0).get<double>(),
                              j.at("normalization").at(d).at(1).get<double>()};
  }
  const auto& rows = j.at("coefficients");
  model.coefficients.resize(6, model.basis_size());
  for (int ch = 0; ch < 6; ++ch)
    for (int i = 0; i < model.coefficients.cols(); ++i)
      model.coefficients(ch, i) = rows.at(ch).at(i).get<double>();
  return model;
}

}  // namespace mammobot::forcecalib
