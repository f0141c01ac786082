#include "artsep/stft.hpp"

#include <cmath>

#include "artsep/common.hpp"
#include "artsep/fft.hpp"
#include "artsep/par.hpp"

namespace artsep {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void check_params(const StftParams& p) {
  if (p.n_fft == 0 || (p.n_fft & (p.n_fft - 1)) != 0)
    throw ConfigError("stft: n_fft must be a power of two");
  if (p.hop == 0) throw ConfigError("stft: hop must be positive");
  if (p.hop > p.n_fft)
    throw ConfigError("stft: hop larger than the window violates COLA");
}

std::size_t frame_count(std::size_t n_samples, const StftParams& p) {
  if (n_samples == 0) return 0;
  // Padded length is n_samples + n_fft, so (padded - n_fft) / hop + 1 frames.
  return n_samples / p.hop + 1;
}

// Windowed frame f of the virtually padded signal, then FFT.
void analyse_frame(const AudioClip& clip, const StftParams& p, const std::vector<double>& win,
                   std::size_t f, std::complex<double>* out) {
  const std::size_t n = p.n_fft;
  const long half = static_cast<long>(n / 2);
  const long n_samples = static_cast<long>(clip.samples.size());
  std::vector<double> buf(n, 0.0);
  const long start = static_cast<long>(f * p.hop) - half;
  for (std::size_t i = 0; i < n; ++i) {
    const long t = start + static_cast<long>(i);
    if (t >= 0 && t < n_samples) buf[i] = clip.samples[t] * win[i];
  }
  auto bins = rfft(buf, n);
  for (std::size_t k = 0; k < bins.size(); ++k) out[k] = bins[k];
}

Spectrogram make_spec(const AudioClip& clip, const StftParams& p) {
  Spectrogram s;
  s.n_fft = p.n_fft;
  s.hop = p.hop;
  s.sample_rate = clip.sample_rate;
  s.bins = p.n_fft / 2 + 1;
  s.frames = frame_count(clip.samples.size(), p);
  s.v.assign(s.frames * s.bins, {0.0, 0.0});
  return s;
}

}  // namespace

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 * (1.0 - std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(n)));
  return w;
}

Spectrogram stft(const AudioClip& clip, const StftParams& params) {
  check_params(params);
  Spectrogram s = make_spec(clip, params);
  const std::vector<double> win = hann_window(params.n_fft);
  const long nf = static_cast<long>(s.frames);
#pragma omp parallel for schedule(static) num_threads(par::worker_count())
  for (long f = 0; f < nf; ++f)
    analyse_frame(clip, params, win, static_cast<std::size_t>(f), s.v.data() + f * s.bins);
  return s;
}

namespace ref {
Spectrogram stft(const AudioClip& clip, const StftParams& params) {
  check_params(params);
  Spectrogram s = make_spec(clip, params);
  const std::vector<double> win = hann_window(params.n_fft);
  for (std::size_t f = 0; f < s.frames; ++f)
    analyse_frame(clip, params, win, f, s.v.data() + f * s.bins);
  return s;
}
}  // namespace ref

AudioClip istft(const Spectrogram& spec, std::size_t out_len) {
  StftParams p{spec.n_fft, spec.hop};
  check_params(p);
  if (spec.bins != spec.n_fft / 2 + 1)
    throw ConfigError("istft: spectrogram bin count does not match n_fft");

  AudioClip out;
  out.sample_rate = spec.sample_rate;
  out.samples.assign(out_len, 0.0);
  if (spec.frames == 0) return out;

  const std::size_t n = spec.n_fft;
  const std::size_t half = n / 2;
  const std::vector<double> win = hann_window(n);

  const std::size_t padded = (spec.frames - 1) * spec.hop + n;
  std::vector<double> acc(padded, 0.0);
  std::vector<double> norm(padded, 0.0);

  std::vector<std::complex<double>> bins(spec.bins);
  for (std::size_t f = 0; f < spec.frames; ++f) {
    for (std::size_t k = 0; k < spec.bins; ++k) bins[k] = spec.at(f, k);
    std::vector<double> frame = irfft(bins, n);
    const std::size_t base = f * spec.hop;
    for (std::size_t i = 0; i < n; ++i) {
      acc[base + i] += frame[i] * win[i];
      norm[base + i] += win[i] * win[i];
    }
  }

  for (std::size_t t = 0; t < out_len; ++t) {
    const std::size_t src = t + half;
    if (src < padded && norm[src] > 1e-12) out.samples[t] = acc[src] / norm[src];
  }
  return out;
}

MatD magnitude(const Spectrogram& spec) {
  MatD m(spec.frames, spec.bins);
  const long nf = static_cast<long>(spec.frames);
#pragma omp parallel for schedule(static) num_threads(par::worker_count())
  for (long f = 0; f < nf; ++f)
    for (std::size_t k = 0; k < spec.bins; ++k) m.v[f * spec.bins + k] = std::abs(spec.at(f, k));
  return m;
}

}  // namespace artsep
