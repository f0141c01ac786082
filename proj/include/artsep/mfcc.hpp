#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "artsep/audio.hpp"

namespace artsep {

// HTK-flavoured MFCC front end for the alignment path. The input is resampled
// to target_rate internally; windows are 25 ms Hamming frames every 10 ms.
struct MfccConfig {
  int target_rate = 16000;
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  double preemphasis = 0.97;
  int n_mels = 26;
  int n_cepstra = 12;  // plus log energy -> 13 static dims
  double fmin_hz = 0.0;
  double fmax_hz = 8000.0;
  double energy_floor = 1e-10;
  int delta_context = 2;

  std::size_t frame_len() const {
    return static_cast<std::size_t>(frame_ms * 1e-3 * target_rate + 0.5);
  }
  std::size_t frame_hop() const {
    return static_cast<std::size_t>(hop_ms * 1e-3 * target_rate + 0.5);
  }
  std::size_t static_dim() const { return static_cast<std::size_t>(n_cepstra) + 1; }
  std::size_t total_dim() const { return 3 * static_dim(); }

  // Compact fingerprint so models can verify they see the features they were
  // trained on.
  std::uint64_t fingerprint() const;
};

// N x 39 feature rows: 12 cepstra + log energy, then deltas, then delta-deltas.
struct FrameFeatures {
  std::size_t frames = 0;
  std::size_t dim = 0;
  std::vector<double> v;  // row-major
  MfccConfig config;

  double* row(std::size_t f) { return v.data() + f * dim; }
  const double* row(std::size_t f) const { return v.data() + f * dim; }
};

// Windowed-sinc resampler (64 taps, Hann-windowed, DC-normalized).
AudioClip resample(const AudioClip& clip, int new_rate);

FrameFeatures mfcc(const AudioClip& clip, const MfccConfig& config = {});

namespace ref {
FrameFeatures mfcc(const AudioClip& clip, const MfccConfig& config = {});
}  // namespace ref

}  // namespace artsep
