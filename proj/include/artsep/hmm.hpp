#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "artsep/common.hpp"
#include "artsep/lexicon.hpp"
#include "artsep/matrix.hpp"
#include "artsep/mfcc.hpp"

namespace artsep {

inline constexpr int kStatesPerManner = 5;
inline constexpr int kSilStates = 3;
inline constexpr int kDefaultMixtures = 4;
inline constexpr int kSilClass = kNumManners;  // 7: silence/background model

struct Gaussian {
  std::vector<double> mean;
  std::vector<double> var;  // diagonal
  double log_norm = 0.0;    // cached -(D/2)log(2pi) - 0.5*sum(log var)

  void refresh_log_norm();
  double log_pdf(const double* x) const;
  bool operator==(const Gaussian&) const = default;
};

struct GmmState {
  std::vector<double> log_weight;
  std::vector<Gaussian> comp;
  double log_self = 0.0;
  double log_next = 0.0;

  double log_pdf(const double* x) const;
  bool operator==(const GmmState&) const = default;
};

// Strict left-to-right, no-skip HMM for one manner class (or silence).
struct GmmHmm {
  int cls = -1;  // 0..6 manner index, or kSilClass
  std::vector<GmmState> states;
  bool operator==(const GmmHmm&) const = default;
};

struct GmmHmmSet {
  std::array<GmmHmm, kNumManners> models;
  std::optional<GmmHmm> sil;
  std::vector<double> var_floor;  // per-dim, fixed at initialization
  std::uint64_t feature_fingerprint = 0;
  std::size_t dim = 0;

  const GmmHmm& model_for(Manner m) const { return models[static_cast<int>(m)]; }
  bool operator==(const GmmHmmSet&) const = default;
};

// Per-frame per-state emission log-likelihoods, frames x states. This is the
// hot loop shared by EM and Viterbi; parallel over frames.
MatD gmm_log_obs(const std::vector<const GmmState*>& states, const FrameFeatures& feat);

namespace ref {
MatD gmm_log_obs(const std::vector<const GmmState*>& states, const FrameFeatures& feat);
}  // namespace ref

// Versioned binary model container ("AHMM", f64 little-endian parameters).
void save_hmm_set(const std::string& path, const GmmHmmSet& set, const ModelMeta& meta);
GmmHmmSet load_hmm_set(const std::string& path, ModelMeta* meta = nullptr);

double log_add(double a, double b);  // log(exp(a) + exp(b)) with -inf handling

}  // namespace artsep
