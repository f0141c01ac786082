#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "artsep/align.hpp"
#include "artsep/matrix.hpp"
#include "artsep/rng.hpp"
#include "artsep/script.hpp"

namespace artsep::knowledge {

// Frame-center grid of a spectrogram: frame n sits at n*hop/rate seconds.
struct FrameGrid {
  std::size_t frames = 0;
  std::size_t hop = 300;
  int sample_rate = 44100;

  double time(std::size_t n) const {
    return static_cast<double>(n) * static_cast<double>(hop) / sample_rate;
  }
};

// Frames x 7 binary matrix; each row is one-hot (one active manner class) or
// all-zero (no speech token covers the frame center).
MatU8 rasterize(const std::vector<GlobalToken>& tokens, const FrameGrid& grid);

// Tokens overlapping [off_s, off_s + span_s), shifted to window-local time
// and clamped to the window.
std::vector<GlobalToken> window_tokens(const std::vector<GlobalToken>& tokens, double off_s,
                                       double span_s);

// Frame-wise linear map from class indicators to the feature dimension.
struct Projector {
  MatD w;                  // in_dim x d
  std::vector<double> b;   // d

  std::size_t in_dim() const { return w.rows; }
  std::size_t out_dim() const { return w.cols; }

  // Zero-mean Gaussian weights (sigma 0.01), zero bias: a freshly initialized
  // projector barely perturbs the audio features.
  static Projector init(std::size_t in_dim, std::size_t d, Rng& rng);
};

// row_n = matrix_n * W + b.
MatD project(const MatU8& matrix, const Projector& proj);

// Elementwise sum of audio features and projected class features.
MatD fuse(const MatD& audio_features, const MatD& projected);

enum class VaMode { SelectionOnly, ExtraDim };

// Per-frame speech-presence flags from script line intervals (frames x 1).
MatU8 va_from_script(const std::vector<ScriptLine>& script, const FrameGrid& grid);

// Appends VA flags as an extra column (for VaMode::ExtraDim conditioning).
MatU8 append_va_column(const MatU8& matrix, const MatU8& va);

// Debug dump: rows as JSON arrays.
void save_matrix_json(const std::string& path, const MatU8& m);

}  // namespace artsep::knowledge
