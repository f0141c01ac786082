#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "artsep/audio.hpp"
#include "artsep/matrix.hpp"

namespace artsep {

struct StftParams {
  std::size_t n_fft = 2048;
  std::size_t hop = 300;
};

// Complex STFT frames, one row per analysis frame, n_fft/2 + 1 bins per row.
// Frames are centered: frame f's window is centered on sample f*hop of the
// original signal (the input is zero-padded by n_fft/2 on both ends).
struct Spectrogram {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::size_t n_fft = 2048;
  std::size_t hop = 300;
  int sample_rate = 44100;
  std::vector<std::complex<double>> v;  // row-major frames x bins

  std::complex<double>& at(std::size_t f, std::size_t b) { return v[f * bins + b]; }
  const std::complex<double>& at(std::size_t f, std::size_t b) const { return v[f * bins + b]; }

  // Center time of frame f in seconds.
  double frame_time(std::size_t f) const {
    return static_cast<double>(f) * static_cast<double>(hop) / sample_rate;
  }
};

// Periodic Hann analysis window of length n.
std::vector<double> hann_window(std::size_t n);

Spectrogram stft(const AudioClip& clip, const StftParams& params = {});

// Weighted overlap-add inverse with the same Hann window, normalized by the
// summed squared window. Output is truncated or zero-padded to out_len.
AudioClip istft(const Spectrogram& spec, std::size_t out_len);

MatD magnitude(const Spectrogram& spec);

namespace ref {
// Serial reference implementation, kept for testing the OpenMP kernel.
Spectrogram stft(const AudioClip& clip, const StftParams& params = {});
}  // namespace ref

}  // namespace artsep
