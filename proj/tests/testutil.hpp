// Shared helpers for the unit and acceptance suites: synthetic corpora with
// known class-conditional emissions, hand-built model sets, and scratch dirs.
#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "artsep/align.hpp"
#include "artsep/hmm.hpp"
#include "artsep/mfcc.hpp"
#include "artsep/rng.hpp"

namespace testutil {

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("artsep_" + tag + "_" + std::to_string(counter_++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  static inline int counter_ = 0;
  std::filesystem::path path_;
};

inline artsep::FrameFeatures make_features(std::size_t frames, std::size_t dim) {
  artsep::FrameFeatures f;
  f.frames = frames;
  f.dim = dim;
  f.v.assign(frames * dim, 0.0);
  return f;
}

inline artsep::FrameFeatures random_features(artsep::Rng& rng, std::size_t frames,
                                             std::size_t dim, double scale = 1.0) {
  artsep::FrameFeatures f = make_features(frames, dim);
  for (auto& x : f.v) x = rng.normal(0.0, scale);
  return f;
}

// Class-conditional emission center: well separated across the 7 classes.
inline double class_center(int cls) { return -6.0 + 2.0 * cls; }

// One corpus line whose frames are drawn from per-class Gaussians, with the
// true token boundaries returned through frames_per_token.
inline artsep::CorpusLine synthetic_line(artsep::Rng& rng, const std::string& utt, int line_id,
                                         const std::vector<artsep::Manner>& classes,
                                         const std::vector<int>& frames_per_token,
                                         std::size_t dim = 3, double noise = 0.5) {
  artsep::CorpusLine line;
  line.utt = utt;
  line.line_id = line_id;
  line.line_start_s = 0.0;
  std::size_t total = 0;
  for (int n : frames_per_token) total += static_cast<std::size_t>(n);
  line.feats = make_features(total, dim);
  std::size_t at = 0;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const double c = class_center(static_cast<int>(classes[i]));
    for (int k = 0; k < frames_per_token[i]; ++k, ++at)
      for (std::size_t d = 0; d < dim; ++d)
        line.feats.row(at)[d] = c + 0.3 * static_cast<double>(d) + rng.normal(0.0, noise);
    line.tokens.push_back({classes[i], std::string("p") + std::to_string(static_cast<int>(classes[i]))});
  }
  return line;
}

// Corpus touching all 7 classes with randomized token lengths.
inline std::vector<artsep::CorpusLine> synthetic_corpus(artsep::Rng& rng, int n_lines,
                                                        std::size_t dim = 3,
                                                        double noise = 0.5) {
  std::vector<artsep::CorpusLine> corpus;
  for (int l = 0; l < n_lines; ++l) {
    std::vector<artsep::Manner> classes;
    std::vector<int> lens;
    const int n_tok = 3 + static_cast<int>(rng.below(3));
    for (int t = 0; t < n_tok; ++t) {
      classes.push_back(static_cast<artsep::Manner>((l + 2 * t + static_cast<int>(rng.below(3))) %
                                                    artsep::kNumManners));
      lens.push_back(6 + static_cast<int>(rng.below(7)));
    }
    corpus.push_back(synthetic_line(rng, "utt" + std::to_string(l / 2), l % 2, classes, lens, dim,
                                    noise));
  }
  // Every class must appear somewhere for flat_start.
  std::vector<artsep::Manner> all;
  std::vector<int> lens;
  for (int c = 0; c < artsep::kNumManners; ++c) {
    all.push_back(static_cast<artsep::Manner>(c));
    lens.push_back(7);
  }
  corpus.push_back(synthetic_line(rng, "uttx", 0, all, lens, dim, noise));
  return corpus;
}

// Hand-built single-component state with unit-ish variances.
inline artsep::GmmState random_state(artsep::Rng& rng, std::size_t dim) {
  artsep::GmmState st;
  artsep::Gaussian g;
  for (std::size_t d = 0; d < dim; ++d) {
    g.mean.push_back(rng.normal(0.0, 2.0));
    g.var.push_back(0.5 + rng.uniform());
  }
  g.refresh_log_norm();
  st.comp.push_back(g);
  st.log_weight.push_back(0.0);
  const double a = 0.3 + 0.4 * rng.uniform();
  st.log_self = std::log(a);
  st.log_next = std::log(1.0 - a);
  return st;
}

// Model set with random single-Gaussian emissions for every class.
inline artsep::GmmHmmSet random_model_set(artsep::Rng& rng, std::size_t dim,
                                          bool with_sil = false) {
  artsep::GmmHmmSet set;
  set.dim = dim;
  set.var_floor.assign(dim, 1e-8);
  for (int c = 0; c < artsep::kNumManners; ++c) {
    set.models[c].cls = c;
    for (int s = 0; s < artsep::kStatesPerManner; ++s)
      set.models[c].states.push_back(random_state(rng, dim));
  }
  if (with_sil) {
    artsep::GmmHmm sil;
    sil.cls = artsep::kSilClass;
    for (int s = 0; s < artsep::kSilStates; ++s) sil.states.push_back(random_state(rng, dim));
    set.sil = sil;
  }
  return set;
}

inline bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

inline bool close_rel(double a, double b, double rel, double abs_floor = 1e-12) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) <= std::max(rel * scale, abs_floor);
}

}  // namespace testutil
