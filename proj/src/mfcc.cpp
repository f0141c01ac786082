#include "artsep/mfcc.hpp"

#include <cmath>

#include "artsep/common.hpp"
#include "artsep/fft.hpp"
#include "artsep/par.hpp"

namespace artsep {

namespace {

constexpr double kPi = 3.141592653589793238462643383279;

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::size_t fft_size_for(std::size_t frame_len) {
  std::size_t n = 1;
  while (n < frame_len) n <<= 1;
  return n;
}

// Triangular mel filterbank over FFT bin magnitudes.
struct MelBank {
  std::size_t n_bins;
  std::vector<std::vector<double>> weights;  // n_mels x n_bins

  MelBank(const MfccConfig& cfg, std::size_t n_fft) {
    n_bins = n_fft / 2 + 1;
    const double mel_lo = hz_to_mel(cfg.fmin_hz);
    const double mel_hi = hz_to_mel(cfg.fmax_hz);
    std::vector<double> edges(cfg.n_mels + 2);
    for (int i = 0; i < cfg.n_mels + 2; ++i)
      edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (cfg.n_mels + 1));
    weights.assign(cfg.n_mels, std::vector<double>(n_bins, 0.0));
    const double bin_hz = static_cast<double>(cfg.target_rate) / static_cast<double>(n_fft);
    for (int m = 0; m < cfg.n_mels; ++m) {
      const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
      for (std::size_t k = 0; k < n_bins; ++k) {
        const double f = k * bin_hz;
        if (f > lo && f < mid)
          weights[m][k] = (f - lo) / (mid - lo);
        else if (f >= mid && f < hi)
          weights[m][k] = (hi - f) / (hi - mid);
      }
    }
  }
};

struct Dct {
  std::vector<std::vector<double>> table;  // n_cepstra x n_mels, rows i=1..n_cepstra

  Dct(int n_cepstra, int n_mels) {
    table.assign(n_cepstra, std::vector<double>(n_mels));
    const double scale = std::sqrt(2.0 / n_mels);
    for (int i = 1; i <= n_cepstra; ++i)
      for (int j = 1; j <= n_mels; ++j)
        table[i - 1][j - 1] = scale * std::cos(kPi * i * (j - 0.5) / n_mels);
  }
};

// One frame: pre-emphasis, energy, Hamming, FFT, mel, log, DCT.
void static_frame(const double* x, std::size_t frame_len, std::size_t n_fft,
                  const MfccConfig& cfg, const MelBank& mel, const Dct& dct,
                  const std::vector<double>& window, double* out) {
  std::vector<double> buf(frame_len);
  buf[0] = x[0] * (1.0 - cfg.preemphasis);
  for (std::size_t i = 1; i < frame_len; ++i) buf[i] = x[i] - cfg.preemphasis * x[i - 1];

  double energy = 0.0;
  for (std::size_t i = 0; i < frame_len; ++i) energy += buf[i] * buf[i];
  if (energy < cfg.energy_floor) energy = cfg.energy_floor;

  for (std::size_t i = 0; i < frame_len; ++i) buf[i] *= window[i];
  auto bins = rfft(buf, n_fft);

  std::vector<double> mag(mel.n_bins);
  for (std::size_t k = 0; k < mel.n_bins; ++k) mag[k] = std::abs(bins[k]);

  std::vector<double> logmel(cfg.n_mels);
  for (int m = 0; m < cfg.n_mels; ++m) {
    double e = 0.0;
    for (std::size_t k = 0; k < mel.n_bins; ++k) e += mag[k] * mel.weights[m][k];
    logmel[m] = std::log(e < cfg.energy_floor ? cfg.energy_floor : e);
  }

  for (int i = 0; i < cfg.n_cepstra; ++i) {
    double c = 0.0;
    for (int j = 0; j < cfg.n_mels; ++j) c += logmel[j] * dct.table[i][j];
    out[i] = c;
  }
  out[cfg.n_cepstra] = std::log(energy);
}

// +/- delta_context regression; edges replicate the first/last frame.
void add_deltas(FrameFeatures& feat, std::size_t src_off, std::size_t dst_off) {
  const int ctx = feat.config.delta_context;
  double denom = 0.0;
  for (int t = 1; t <= ctx; ++t) denom += 2.0 * t * t;
  const std::size_t d = feat.config.static_dim();
  const long n = static_cast<long>(feat.frames);
  for (long f = 0; f < n; ++f) {
    for (std::size_t k = 0; k < d; ++k) {
      double acc = 0.0;
      for (int t = 1; t <= ctx; ++t) {
        long lo = f - t < 0 ? 0 : f - t;
        long hi = f + t >= n ? n - 1 : f + t;
        acc += t * (feat.row(hi)[src_off + k] - feat.row(lo)[src_off + k]);
      }
      feat.row(f)[dst_off + k] = acc / denom;
    }
  }
}

FrameFeatures mfcc_impl(const AudioClip& clip, const MfccConfig& cfg, bool parallel) {
  AudioClip work = clip.sample_rate == cfg.target_rate ? clip : resample(clip, cfg.target_rate);

  FrameFeatures feat;
  feat.config = cfg;
  feat.dim = cfg.total_dim();
  const std::size_t flen = cfg.frame_len();
  const std::size_t fhop = cfg.frame_hop();
  if (work.samples.size() < flen) return feat;  // shorter than one window -> empty
  feat.frames = (work.samples.size() - flen) / fhop + 1;
  feat.v.assign(feat.frames * feat.dim, 0.0);

  const std::size_t n_fft = fft_size_for(flen);
  const MelBank mel(cfg, n_fft);
  const Dct dct(cfg.n_cepstra, cfg.n_mels);
  std::vector<double> window(flen);
  for (std::size_t i = 0; i < flen; ++i)
    window[i] = 0.54 - 0.46 * std::cos(2.0 * kPi * i / (flen - 1));

  const long n = static_cast<long>(feat.frames);
  if (parallel) {
#pragma omp parallel for schedule(static) num_threads(par::worker_count())
    for (long f = 0; f < n; ++f)
      static_frame(work.samples.data() + f * fhop, flen, n_fft, cfg, mel, dct, window,
                   feat.row(f));
  } else {
    for (long f = 0; f < n; ++f)
      static_frame(work.samples.data() + f * fhop, flen, n_fft, cfg, mel, dct, window,
                   feat.row(f));
  }

  const std::size_t d = cfg.static_dim();
  add_deltas(feat, 0, d);       // deltas from statics
  add_deltas(feat, d, 2 * d);   // delta-deltas from deltas
  return feat;
}

}  // namespace

std::uint64_t MfccConfig::fingerprint() const {
  // FNV-1a over the numeric fields.
  auto mix = [](std::uint64_t h, std::uint64_t x) {
    h ^= x;
    return h * 0x100000001B3ULL;
  };
  std::uint64_t h = 0xCBF29CE484222325ULL;
  h = mix(h, static_cast<std::uint64_t>(target_rate));
  h = mix(h, static_cast<std::uint64_t>(frame_ms * 1000));
  h = mix(h, static_cast<std::uint64_t>(hop_ms * 1000));
  h = mix(h, static_cast<std::uint64_t>(preemphasis * 1e6));
  h = mix(h, static_cast<std::uint64_t>(n_mels));
  h = mix(h, static_cast<std::uint64_t>(n_cepstra));
  h = mix(h, static_cast<std::uint64_t>(fmax_hz));
  h = mix(h, static_cast<std::uint64_t>(delta_context));
  return h;
}

AudioClip resample(const AudioClip& clip, int new_rate) {
  if (new_rate <= 0) throw ConfigError("resample: rate must be positive");
  if (clip.sample_rate == new_rate || clip.samples.empty()) {
    AudioClip out = clip;
    out.sample_rate = new_rate;
    return out;
  }

  constexpr int kTaps = 64;
  constexpr int kHalf = kTaps / 2;
  const double ratio = static_cast<double>(clip.sample_rate) / new_rate;
  const double cutoff = 0.5 * std::min(1.0, 1.0 / ratio);  // cycles per input sample

  AudioClip out;
  out.sample_rate = new_rate;
  const std::size_t n_out = static_cast<std::size_t>(
      static_cast<double>(clip.samples.size()) * new_rate / clip.sample_rate);
  out.samples.assign(n_out, 0.0);
  const long n_in = static_cast<long>(clip.samples.size());

  const long n = static_cast<long>(n_out);
#pragma omp parallel for schedule(static) num_threads(par::worker_count())
  for (long i = 0; i < n; ++i) {
    const double center = i * ratio;
    const long k0 = static_cast<long>(std::floor(center)) - kHalf + 1;
    double acc = 0.0, wsum = 0.0;
    for (long k = k0; k < k0 + kTaps; ++k) {
      const double tau = center - k;
      const double win = 0.5 * (1.0 + std::cos(kPi * tau / kHalf));
      double sinc = (tau == 0.0) ? 2.0 * cutoff
                                 : std::sin(2.0 * kPi * cutoff * tau) / (kPi * tau);
      const double w = sinc * win;
      wsum += w;
      if (k >= 0 && k < n_in) acc += clip.samples[k] * w;
    }
    out.samples[i] = wsum != 0.0 ? acc / wsum : 0.0;
  }
  return out;
}

FrameFeatures mfcc(const AudioClip& clip, const MfccConfig& config) {
  return mfcc_impl(clip, config, true);
}

namespace ref {
FrameFeatures mfcc(const AudioClip& clip, const MfccConfig& config) {
  return mfcc_impl(clip, config, false);
}
}  // namespace ref

}  // namespace artsep
