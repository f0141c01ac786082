#include "artsep/separator.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "artsep/par.hpp"

namespace artsep {

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Forward pass keeping the hidden activations for backprop.
void refnet_forward_full(const RefNet& net, const MatD& x, MatD* hidden_out, MatD& y,
                         bool parallel) {
  const std::size_t n = x.rows, d = net.d, h = net.hidden;
  y = MatD(n, d);
  if (hidden_out) *hidden_out = MatD(n, h);
  const long rows = static_cast<long>(n);
#pragma omp parallel for schedule(static) num_threads(par::worker_count()) if (parallel)
  for (long r = 0; r < rows; ++r) {
    const double* in = x.row(r);
    std::vector<double> hid(h);
    for (std::size_t j = 0; j < h; ++j) {
      double a = net.b1[j];
      for (std::size_t i = 0; i < d; ++i) a += in[i] * net.w1(i, j);
      hid[j] = std::tanh(a);
    }
    double* out = y.row(r);
    for (std::size_t k = 0; k < d; ++k) {
      double a = net.b2[k];
      for (std::size_t j = 0; j < h; ++j) a += hid[j] * net.w2(j, k);
      out[k] = logistic(a);
    }
    if (hidden_out) std::copy(hid.begin(), hid.end(), hidden_out->row(r));
  }
}

void check_dim(const RefNet& net, const MatD& fused) {
  if (fused.cols != net.d)
    throw DataError("mask estimator expects " + std::to_string(net.d) +
                    "-dim features, got " + std::to_string(fused.cols));
}

}  // namespace

RefNet RefNet::init(std::size_t d, std::size_t hidden, Rng& rng) {
  RefNet net;
  net.d = d;
  net.hidden = hidden;
  net.w1 = MatD(d, hidden);
  net.b1.assign(hidden, 0.0);
  net.w2 = MatD(hidden, d);
  net.b2.assign(d, 0.0);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(d));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (auto& w : net.w1.v) w = rng.normal(0.0, s1);
  for (auto& w : net.w2.v) w = rng.normal(0.0, s2);
  return net;
}

MatD refnet_forward(const RefNet& net, const MatD& fused) {
  check_dim(net, fused);
  MatD y;
  refnet_forward_full(net, fused, nullptr, y, true);
  return y;
}

namespace ref {
MatD refnet_forward(const RefNet& net, const MatD& fused) {
  check_dim(net, fused);
  MatD y;
  refnet_forward_full(net, fused, nullptr, y, false);
  return y;
}
}  // namespace ref

MatD RefNetEstimator::backward(const MatD& fused, const MatD& dmask,
                               std::vector<double>& grads) const {
  check_dim(net_, fused);
  if (!fused.same_shape(dmask)) throw DataError("backward: gradient shape mismatch");
  if (grads.size() < param_count()) throw DataError("backward: gradient buffer too small");

  const std::size_t n = fused.rows, d = net_.d, h = net_.hidden;
  MatD hid, y;
  refnet_forward_full(net_, fused, &hid, y, true);

  // All loops below write disjoint outputs with serial reductions over
  // frames, so results do not depend on the thread count.
  MatD dz(n, d), dxh(n, h), dx(n, d);
  const long rows = static_cast<long>(n);
#pragma omp parallel for schedule(static) num_threads(par::worker_count())
  for (long r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < d; ++k) {
      const double yk = y(r, k);
      dz(r, k) = dmask(r, k) * yk * (1.0 - yk);
    }
    for (std::size_t j = 0; j < h; ++j) {
      double a = 0.0;
      for (std::size_t k = 0; k < d; ++k) a += dz(r, k) * net_.w2(j, k);
      dxh(r, j) = a * (1.0 - hid(r, j) * hid(r, j));
    }
    for (std::size_t i = 0; i < d; ++i) {
      double a = 0.0;
      for (std::size_t j = 0; j < h; ++j) a += dxh(r, j) * net_.w1(i, j);
      dx(r, i) = a;
    }
  }

  double* gw1 = grads.data();
  double* gb1 = gw1 + d * h;
  double* gw2 = gb1 + h;
  double* gb2 = gw2 + h * d;

  const long dim = static_cast<long>(d);
#pragma omp parallel for schedule(static) num_threads(par::worker_count())
  for (long i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < h; ++j) {
      double a = 0.0;
      for (std::size_t r = 0; r < n; ++r) a += fused(r, i) * dxh(r, j);
      gw1[i * h + j] += a;
    }
  const long hl = static_cast<long>(h);
#pragma omp parallel for schedule(static) num_threads(par::worker_count())
  for (long j = 0; j < hl; ++j) {
    double a = 0.0;
    for (std::size_t r = 0; r < n; ++r) a += dxh(r, j);
    gb1[j] += a;
    for (std::size_t k = 0; k < d; ++k) {
      double w = 0.0;
      for (std::size_t r = 0; r < n; ++r) w += hid(r, j) * dz(r, k);
      gw2[j * d + k] += w;
    }
  }
#pragma omp parallel for schedule(static) num_threads(par::worker_count())
  for (long k = 0; k < dim; ++k) {
    double a = 0.0;
    for (std::size_t r = 0; r < n; ++r) a += dz(r, k);
    gb2[k] += a;
  }
  return dx;
}

std::vector<std::span<double>> RefNetEstimator::params() {
  return {std::span<double>(net_.w1.v), std::span<double>(net_.b1),
          std::span<double>(net_.w2.v), std::span<double>(net_.b2)};
}

std::size_t RefNetEstimator::param_count() const {
  return net_.w1.v.size() + net_.b1.size() + net_.w2.v.size() + net_.b2.size();
}

double mag_l1_loss(const MatD& estimate_mag, const MatD& target_mag) {
  if (!estimate_mag.same_shape(target_mag)) throw DataError("loss: shape mismatch");
  if (estimate_mag.v.empty()) throw DataError("loss: empty spectra");
  double s = 0.0;
  for (std::size_t i = 0; i < estimate_mag.v.size(); ++i)
    s += std::abs(estimate_mag.v[i] - target_mag.v[i]);
  return s / static_cast<double>(estimate_mag.v.size());
}

double sep_loss_and_grads(const MaskEstimator& model, const knowledge::Projector& proj,
                          const std::vector<TrainItem>& batch, std::vector<double>& grads) {
  if (batch.empty()) throw DataError("training batch is empty");
  const std::size_t n_model = model.param_count();
  const std::size_t n_proj = proj.w.v.size() + proj.b.size();
  grads.assign(n_model + n_proj, 0.0);

  std::size_t total_cells = 0;
  for (const auto& item : batch) {
    if (!item.mix_mag.same_shape(item.target_mag))
      throw DataError("training item spectra shapes differ");
    if (item.artic.rows != item.mix_mag.rows)
      throw DataError("training item class matrix rows do not match spectra frames");
    total_cells += item.mix_mag.v.size();
  }
  if (total_cells == 0) throw DataError("training batch has no frames");
  const double inv_cells = 1.0 / static_cast<double>(total_cells);

  double* gproj_w = grads.data() + n_model;
  double* gproj_b = gproj_w + proj.w.v.size();

  double loss_sum = 0.0;
  for (const auto& item : batch) {
    const MatD embedded = knowledge::project(item.artic, proj);
    const MatD fused = knowledge::fuse(item.mix_mag, embedded);
    const MatD mask = model.forward(fused);

    MatD dmask(mask.rows, mask.cols);
    for (std::size_t i = 0; i < mask.v.size(); ++i) {
      const double est = mask.v[i] * item.mix_mag.v[i];
      const double diff = est - item.target_mag.v[i];
      loss_sum += std::abs(diff);
      const double dest = diff > 0.0 ? inv_cells : (diff < 0.0 ? -inv_cells : 0.0);
      dmask.v[i] = dest * item.mix_mag.v[i];
    }

    const MatD dfused = model.backward(fused, dmask, grads);

    // Projector gradients: embedded = artic * W + b.
    for (std::size_t r = 0; r < dfused.rows; ++r) {
      const double* dr = dfused.row(r);
      const std::uint8_t* ar = item.artic.row(r);
      for (std::size_t c = 0; c < item.artic.cols; ++c) {
        if (!ar[c]) continue;
        double* gw = gproj_w + c * proj.w.cols;
        for (std::size_t k = 0; k < proj.w.cols; ++k) gw[k] += dr[k];
      }
      for (std::size_t k = 0; k < proj.b.size(); ++k) gproj_b[k] += dr[k];
    }
  }
  return loss_sum * inv_cells;
}

void Adam::update(const std::vector<std::span<double>>& params, const std::vector<double>& grads) {
  std::size_t total = 0;
  for (const auto& p : params) total += p.size();
  if (total != grads.size() || total != m_.size())
    throw DataError("optimizer parameter/gradient size mismatch");

  ++t_;
  const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  std::size_t i = 0;
  for (const auto& p : params)
    for (double& theta : p) {
      const double g = grads[i];
      m_[i] = b1_ * m_[i] + (1.0 - b1_) * g;
      v_[i] = b2_ * v_[i] + (1.0 - b2_) * g * g;
      const double mhat = m_[i] / c1;
      const double vhat = v_[i] / c2;
      theta -= lr_ * mhat / (std::sqrt(vhat) + eps_);
      ++i;
    }
}

SepTrainer::SepTrainer(std::unique_ptr<MaskEstimator> model, knowledge::Projector proj,
                       TrainConfig cfg)
    : model_(std::move(model)),
      proj_(std::move(proj)),
      cfg_(cfg),
      adam_(model_->param_count() + proj_.w.v.size() + proj_.b.size(), cfg) {
  if (cfg_.batch_size <= 0 || cfg_.steps < 0 || cfg_.lr < 0.0)
    throw ConfigError("training hyperparameters must be positive");
}

double SepTrainer::train_step(const std::vector<TrainItem>& batch) {
  std::vector<double> grads;
  const double loss = sep_loss_and_grads(*model_, proj_, batch, grads);
  ++step_;
  if (!std::isfinite(loss))
    throw NumericalError("training aborted: non-finite loss at step " + std::to_string(step_));

  auto params = model_->params();
  params.push_back(std::span<double>(proj_.w.v));
  params.push_back(std::span<double>(proj_.b));
  adam_.update(params, grads);
  return loss;
}

AudioClip extract(const MaskEstimator& model, const knowledge::Projector& proj,
                  const AudioClip& mixture, const MatU8& artic, const StftParams& stft_params,
                  double chunk_seconds) {
  if (mixture.samples.empty()) throw DataError("extract: empty mixture");
  Spectrogram spec = stft(mixture, stft_params);
  if (model.feature_dim() != spec.bins)
    throw ConfigError("mask estimator dimension " + std::to_string(model.feature_dim()) +
                      " does not match " + std::to_string(spec.bins) + " spectrum bins");
  if (artic.rows != spec.frames)
    throw DataError("extract: class matrix has " + std::to_string(artic.rows) +
                    " frames, spectrum has " + std::to_string(spec.frames));

  const MatD mag = magnitude(spec);
  const MatD fused = knowledge::fuse(mag, knowledge::project(artic, proj));

  const std::size_t n = spec.frames;
  const double frames_per_s =
      static_cast<double>(mixture.sample_rate) / static_cast<double>(spec.hop);
  const std::size_t seg = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::llround(chunk_seconds * frames_per_s)));

  MatD mask(n, spec.bins);
  if (n <= seg) {
    mask = model.forward(fused);
  } else {
    // 50% overlapping segments, triangular cross-fade, normalized at edges.
    const std::size_t step = seg / 2;
    MatD acc(n, spec.bins, 0.0);
    std::vector<double> wsum(n, 0.0);
    for (std::size_t s = 0;; s += step) {
      const std::size_t len = std::min(seg, n - s);
      MatD piece(len, fused.cols);
      std::copy(fused.row(s), fused.row(s) + len * fused.cols, piece.v.begin());
      const MatD m = model.forward(piece);
      for (std::size_t k = 0; k < len; ++k) {
        const double w = static_cast<double>(std::min(k + 1, len - k));
        wsum[s + k] += w;
        double* a = acc.row(s + k);
        const double* src = m.row(k);
        for (std::size_t b = 0; b < spec.bins; ++b) a[b] += w * src[b];
      }
      if (s + len >= n) break;
    }
    for (std::size_t f = 0; f < n; ++f) {
      double* a = acc.row(f);
      double* o = mask.row(f);
      for (std::size_t b = 0; b < spec.bins; ++b) o[b] = a[b] / wsum[f];
    }
  }

  for (std::size_t i = 0; i < spec.v.size(); ++i) spec.v[i] *= mask.v[i];
  return istft(spec, mixture.samples.size());
}

// ---------------------------------------------------------------------------
// Checkpoint container

namespace {

constexpr char kSepMagic[4] = {'A', 'S', 'E', 'P'};
constexpr std::uint32_t kSepVersion = 1;

template <class T>
void put(std::ostream& f, T v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& f, const std::string& path) {
  T v{};
  f.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!f) throw DataError("truncated checkpoint: " + path);
  return v;
}

void put_doubles(std::ostream& f, const std::vector<double>& v) {
  f.write(reinterpret_cast<const char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> get_doubles(std::istream& f, std::size_t n, const std::string& path) {
  std::vector<double> v(n);
  f.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!f) throw DataError("truncated checkpoint: " + path);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const RefNet& net,
                     const knowledge::Projector& proj, const ModelMeta& meta) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot create checkpoint: " + path);
  f.write(kSepMagic, 4);
  put<std::uint32_t>(f, kSepVersion);
  put<std::uint32_t>(f, static_cast<std::uint32_t>(meta.tool_version.size()));
  f.write(meta.tool_version.data(), static_cast<std::streamsize>(meta.tool_version.size()));
  put<std::uint64_t>(f, meta.config_hash);
  put<std::uint64_t>(f, meta.seed);
  put<std::uint64_t>(f, net.d);
  put<std::uint64_t>(f, net.hidden);
  put<std::uint64_t>(f, proj.w.rows);
  put_doubles(f, net.w1.v);
  put_doubles(f, net.b1);
  put_doubles(f, net.w2.v);
  put_doubles(f, net.b2);
  put_doubles(f, proj.w.v);
  put_doubles(f, proj.b);
  if (!f) throw DataError("write failed: " + path);
}

SepCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open checkpoint: " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, kSepMagic, 4) != 0)
    throw DataError("not a checkpoint file (bad magic): " + path);
  if (get<std::uint32_t>(f, path) != kSepVersion)
    throw DataError("unsupported checkpoint version: " + path);

  SepCheckpoint ck;
  const auto vlen = get<std::uint32_t>(f, path);
  if (vlen > 4096) throw DataError("corrupt checkpoint: " + path);
  ck.meta.tool_version.resize(vlen);
  f.read(ck.meta.tool_version.data(), vlen);
  ck.meta.config_hash = get<std::uint64_t>(f, path);
  ck.meta.seed = get<std::uint64_t>(f, path);

  const auto d = static_cast<std::size_t>(get<std::uint64_t>(f, path));
  const auto hidden = static_cast<std::size_t>(get<std::uint64_t>(f, path));
  const auto proj_in = static_cast<std::size_t>(get<std::uint64_t>(f, path));
  if (d == 0 || d > 65536 || hidden == 0 || hidden > 65536 || proj_in == 0 || proj_in > 64)
    throw DataError("corrupt checkpoint: " + path);

  ck.net.d = d;
  ck.net.hidden = hidden;
  ck.net.w1 = MatD(d, hidden);
  ck.net.w1.v = get_doubles(f, d * hidden, path);
  ck.net.b1 = get_doubles(f, hidden, path);
  ck.net.w2 = MatD(hidden, d);
  ck.net.w2.v = get_doubles(f, hidden * d, path);
  ck.net.b2 = get_doubles(f, d, path);
  ck.proj.w = MatD(proj_in, d);
  ck.proj.w.v = get_doubles(f, proj_in * d, path);
  ck.proj.b = get_doubles(f, d, path);
  return ck;
}

}  // namespace artsep
