#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "artsep/align.hpp"
#include "artsep/audio.hpp"
#include "artsep/common.hpp"
#include "artsep/lexicon.hpp"

namespace artsep {

// Reported stand-in for a perfect reconstruction (true value +infinity).
inline constexpr double kSdrReportCap = 300.0;

// Plain energy-ratio SDR: 10*log10(|s|^2 / |s - s_hat|^2). Returns +infinity
// when the residual energy is below 1e-30.
double sdr(std::span<const double> estimate, std::span<const double> reference);

// Scale-invariant SDR: both signals mean-removed, estimate projected onto the
// reference before the energy ratio.
double si_sdr(std::span<const double> estimate, std::span<const double> reference);

// SDR after muting every sample outside the category's aligned intervals in
// BOTH the estimate and the reference. Absent when the category has no
// aligned duration.
std::optional<double> per_category_sdr(std::span<const double> estimate,
                                       std::span<const double> reference,
                                       const std::vector<GlobalToken>& alignments,
                                       Manner category, int sample_rate);

struct EvalResult {
  std::string utt;
  double sdr_db = 0.0;
  double sisdr_db = 0.0;
  std::array<std::optional<double>, kNumManners> per_cat;
};

struct EvalUtterance {
  std::string utt;
  AudioClip estimate;
  AudioClip reference;
  std::vector<GlobalToken> tokens;
};

struct CorpusEval {
  std::vector<EvalResult> per_utt;
  double mean_sdr = 0.0;
  double mean_sisdr = 0.0;
  // Arithmetic dB mean over utterances where the category is present.
  std::array<std::optional<double>, kNumManners> mean_per_cat;
};

CorpusEval evaluate_corpus(const std::vector<EvalUtterance>& inputs);

// Caps infinities for reporting.
double report_db(double v);

// CSV: utt,sdr_db,sisdr_db then one column per class in report order; final
// "mean" row. JSON carries the same numbers plus the reproducibility stamp.
void write_results_csv(const std::string& path, const CorpusEval& eval);
void write_results_json(const std::string& path, const CorpusEval& eval, const ModelMeta& meta);

}  // namespace artsep
