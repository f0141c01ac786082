#pragma once

#include <string>
#include <vector>

#include "artsep/hmm.hpp"
#include "artsep/lexicon.hpp"
#include "artsep/mfcc.hpp"

namespace artsep {

// Per-token boundary on the 10 ms feature grid. Frames are 1-based and the
// end frame is inclusive, so a line's first token always has start_frame 1.
struct TokenAlignment {
  int token_index = 0;  // 1-based position in the line
  Manner manner = Manner::VWL;
  std::string phoneme;
  long start_frame = 0;
  long end_frame = 0;
  int line_id = 0;
};

// One transcript line prepared for training or alignment.
struct CorpusLine {
  std::string utt;
  int line_id = 0;
  double line_start_s = 0.0;
  FrameFeatures feats;
  std::vector<MannerToken> tokens;
};

struct AlignResult {
  std::vector<TokenAlignment> tokens;
  double score = 0.0;  // best-path log-likelihood
};

// Token boundary in absolute utterance time.
struct GlobalToken {
  std::string utt;
  int line_id = 0;
  int token_index = 0;
  Manner manner = Manner::VWL;
  std::string phoneme;
  double start_s = 0.0;
  double end_s = 0.0;
  double line_start_s = 0.0;  // kept for overlap resolution when rasterizing
};

// Uniform-segmentation initialization: single Gaussian per state from segment
// moments, then split to kDefaultMixtures by +/-0.2 sigma perturbation.
GmmHmmSet flat_start(const std::vector<CorpusLine>& corpus, int mixtures = kDefaultMixtures);

struct EmResult {
  GmmHmmSet models;
  std::vector<double> ll_per_iter;  // total log-likelihood before each update
  std::size_t total_frames = 0;
};

// Embedded Baum-Welch over token-concatenated line HMMs. Stops early when the
// per-frame improvement drops below 1e-4.
EmResult train_em(const GmmHmmSet& models, const std::vector<CorpusLine>& corpus, int iters);

// Flat-start + EM for the 3-state silence model from inter-line regions.
GmmHmm train_sil(const std::vector<FrameFeatures>& regions, const GmmHmmSet& base, int iters);

// Exact Viterbi forced alignment of one line. With allow_sil, optional silence
// segments may be inserted between tokens and at the line edges.
AlignResult forced_align(const FrameFeatures& feats, const std::vector<MannerToken>& tokens,
                         const GmmHmmSet& models, bool allow_sil);

struct AlignedLine {
  std::string utt;
  int line_id = 0;
  double line_start_s = 0.0;
  AlignResult result;
};

// Aligns every line; parallel across lines, deterministic output order.
std::vector<AlignedLine> align_corpus(const std::vector<CorpusLine>& corpus,
                                      const GmmHmmSet& models, bool allow_sil);

// Total forced-alignment score over a corpus divided by its frame count.
double corpus_align_score_per_frame(const std::vector<CorpusLine>& corpus,
                                    const GmmHmmSet& models, bool allow_sil);

struct TwoStageResult {
  GmmHmmSet models;
  std::vector<AlignedLine> alignments;
};

// Pseudo-label refinement: align mixtures, retrain on the aligned segments,
// repeat; then re-align with the final models.
TwoStageResult two_stage_fa(const GmmHmmSet& model1, const std::vector<CorpusLine>& mixtures,
                            int refine_iters, int em_iters, bool allow_sil);

// 10 ms frame indices -> absolute seconds.
std::vector<GlobalToken> line_to_global(const std::vector<TokenAlignment>& tokens,
                                        double line_start_s, const std::string& utt = "",
                                        double frame_period_s = 0.010);

// JSON Lines alignment file: one record per token.
void save_alignments_jsonl(const std::string& path, const std::vector<GlobalToken>& tokens);
std::vector<GlobalToken> load_alignments_jsonl(const std::string& path);

}  // namespace artsep
