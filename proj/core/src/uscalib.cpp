#include "mammobot/uscalib.hpp"

#include <cmath>
#include <fstream>

namespace mammobot::uscalib {

using Eigen::Matrix3d;

ParamVector pack_params(const UsCalibration& calib) {
  ParamVector p;
  p.segment<3>(0) = geom::rotation_to_rotvec(calib.x.rotation);
  p.segment<3>(3) = calib.x.translation;
  p.segment<2>(6) = calib.scale;
  return p;
}

UsCalibration unpack_params(const ParamVector& p) {
  UsCalibration calib;
  calib.x.rotation = geom::rotvec_to_rotation(p.segment<3>(0));
  calib.x.translation = p.segment<3>(3);
  calib.scale = p.segment<2>(6);
  return calib;
}

namespace {

Vector3d image_point(const BxpSample& s, const Vector2d& scale) {
  return {scale.x() * s.p_img.x(), scale.y() * s.p_img.y(), 0.0};
}

// Gradient evaluated at an explicit parameter vector, so the solver can
// differentiate at its own (not necessarily canonical) rotation vector.
ParamVector gradient_at(const std::vector<BxpSample>& samples, const ParamVector& p) {
  if (samples.size() < 2) throw Error(Errc::TooFewSamples, "need at least 2 samples");
  const size_t n = samples.size();
  const Vector3d rotvec = p.segment<3>(0);
  const auto drot = geom::rotation_jacobian_rotvec(rotvec);
  const Matrix3d rx = geom::rotvec_to_rotation(rotvec);
  const Vector3d tx = p.segment<3>(3);
  const Vector2d scale = p.segment<2>(6);

  std::vector<Vector3d> pts(n);
  Vector3d mean = Vector3d::Zero();
  for (size_t i = 0; i < n; ++i) {
    const Vector3d s = image_point(samples[i], scale);
    pts[i] = samples[i].b.rotation * (rx * s + tx) + samples[i].b.translation;
    mean += pts[i];
  }
  mean /= static_cast<double>(n);

  // Sum_i (q_i - mean) = 0, so the mean's own derivative drops out and
  // dC/dp = sum_i 2 (q_i - mean)^T dq_i/dp.
  ParamVector g = ParamVector::Zero();
  for (size_t i = 0; i < n; ++i) {
    const Vector3d d = 2.0 * (pts[i] - mean);
    const Matrix3d& rb = samples[i].b.rotation;
    const Vector3d s = image_point(samples[i], scale);
    for (int k = 0; k < 3; ++k) g(k) += d.dot(rb * (drot[k] * s));
    g.segment<3>(3) += rb.transpose() * d;
    g(6) += d.dot(rb * (rx * Vector3d(samples[i].p_img.x(), 0, 0)));
    g(7) += d.dot(rb * (rx * Vector3d(0, samples[i].p_img.y(), 0)));
  }
  return g;
}

}  // namespace

Vector3d bxp_point(const BxpSample& sample, const UsCalibration& calib) {
  return geom::transform_point(sample.b,
                               geom::transform_point(calib.x, image_point(sample, calib.scale)));
}

double bxp_cost(const std::vector<BxpSample>& samples, const UsCalibration& calib) {
  if (samples.size() < 2) throw Error(Errc::TooFewSamples, "need at least 2 samples");
  Vector3d mean = Vector3d::Zero();
  std::vector<Vector3d> pts(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    pts[i] = bxp_point(samples[i], calib);
    mean += pts[i];
  }
  mean /= static_cast<double>(samples.size());
  double cost = 0.0;
  for (const auto& q : pts) cost += (q - mean).squaredNorm();
  return cost;
}

ParamVector bxp_gradient(const std::vector<BxpSample>& samples, const UsCalibration& calib) {
  return gradient_at(samples, pack_params(calib));
}

UsCalibration solve_bxp(const std::vector<BxpSample>& samples, const UsCalibration& init,
                        const SolveOptions& opts, SolveReport* report) {
  ParamVector p = pack_params(init);
  double cost = bxp_cost(samples, unpack_params(p));
  if (!std::isfinite(cost)) throw Error(Errc::Diverged, "initial cost is not finite");

  SolveReport rep;
  ParamVector grad = gradient_at(samples, p);
  if (opts.freeze_scale) grad.segment<2>(6).setZero();

  double step = opts.learning_rate;
  ParamVector prev_p = p, prev_grad = grad;
  bool have_prev = false;

  int it = 0;
  for (; it < opts.max_iters; ++it) {
    const double gnorm = grad.norm();
    rep.trace.push_back({it, cost, gnorm, step});
    if (gnorm < opts.grad_tol) {
      rep.converged = true;
      break;
    }

    // Barzilai-Borwein trial step, falling back to the configured rate.
    double trial = opts.learning_rate;
    if (have_prev) {
      const ParamVector dp = p - prev_p;
      const ParamVector dg = grad - prev_grad;
      const double dgg = dg.dot(dg);
      if (dgg > 1e-300) {
        const double bb = std::abs(dp.dot(dg)) / dgg;
        if (std::isfinite(bb) && bb > 0) trial = std::clamp(bb, 1e-15, 1e8);
      }
    }

    // Armijo backtracking; accepted cost never increases.
    const double g2 = grad.squaredNorm();
    double new_cost = 0.0;
    ParamVector cand;
    bool accepted = false;
    for (int bt = 0; bt < 80; ++bt) {
      cand = p - trial * grad;
      new_cost = bxp_cost(samples, unpack_params(cand));
      if (!std::isfinite(new_cost)) throw Error(Errc::Diverged, "cost became non-finite");
      if (new_cost <= cost - opts.armijo_c * trial * g2) {
        accepted = true;
        break;
      }
      trial *= opts.backtrack_factor;
    }
    if (!accepted) break;  // step underflow: report non-convergence

    prev_p = p;
    prev_grad = grad;
    have_prev = true;
    p = cand;
    cost = new_cost;
    step = trial;
    grad = gradient_at(samples, p);
    if (opts.freeze_scale) grad.segment<2>(6).setZero();
  }

  rep.iterations = it;
  rep.final_cost = cost;
  rep.final_grad_norm = grad.norm();
  if (report) *report = rep;
  return unpack_params(p);
}

void write_trace_csv(const std::string& path, const std::vector<TracePoint>& trace) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot open " + path);
  out << "iter,cost,grad_norm,step\n";
  out.precision(17);
  for (const auto& t : trace)
    out << t.iter << ',' << t.cost << ',' << t.grad_norm << ',' << t.step << '\n';
}

}  // namespace mammobot::uscalib
