#include "artsep/hmm.hpp"

#include <cmath>
#include <limits>

#include "artsep/common.hpp"
#include "artsep/par.hpp"

namespace artsep {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}  // namespace

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

void Gaussian::refresh_log_norm() {
  double s = 0.0;
  for (double v : var) s += std::log(v);
  log_norm = -0.5 * (static_cast<double>(mean.size()) * kLog2Pi + s);
}

double Gaussian::log_pdf(const double* x) const {
  double q = 0.0;
  const std::size_t d = mean.size();
  for (std::size_t i = 0; i < d; ++i) {
    const double diff = x[i] - mean[i];
    q += diff * diff / var[i];
  }
  return log_norm - 0.5 * q;
}

double GmmState::log_pdf(const double* x) const {
  double acc = kNegInf;
  for (std::size_t k = 0; k < comp.size(); ++k)
    acc = log_add(acc, log_weight[k] + comp[k].log_pdf(x));
  return acc;
}

namespace {

void fill_log_obs_row(const std::vector<const GmmState*>& states, const FrameFeatures& feat,
                      std::size_t t, double* out) {
  const double* x = feat.row(t);
  for (std::size_t j = 0; j < states.size(); ++j) out[j] = states[j]->log_pdf(x);
}

}  // namespace

MatD gmm_log_obs(const std::vector<const GmmState*>& states, const FrameFeatures& feat) {
  MatD out(feat.frames, states.size());
  const long n = static_cast<long>(feat.frames);
#pragma omp parallel for schedule(static) num_threads(par::worker_count())
  for (long t = 0; t < n; ++t)
    fill_log_obs_row(states, feat, static_cast<std::size_t>(t), out.row(t));
  return out;
}

namespace ref {
MatD gmm_log_obs(const std::vector<const GmmState*>& states, const FrameFeatures& feat) {
  MatD out(feat.frames, states.size());
  for (std::size_t t = 0; t < feat.frames; ++t) fill_log_obs_row(states, feat, t, out.row(t));
  return out;
}
}  // namespace ref

}  // namespace artsep
