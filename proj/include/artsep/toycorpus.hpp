#pragma once

#include <cstdint>
#include <string>

namespace artsep {

// Deterministic synthetic dataset in the standard layout:
// <root>/<split>/<utt_id>/{mix,speech,music,sfx}.wav + script.json.
// Speech is built from class-characteristic phoneme sounds driven by the
// built-in lexicon, so transcripts, timings and stems are all consistent.
struct ToyConfig {
  std::uint64_t seed = 17;
  int n_train = 6;
  int n_val = 2;
  int n_test = 2;
  double utt_seconds = 9.0;
  int sample_rate = 44100;
};

void generate_toy_corpus(const std::string& root, const ToyConfig& cfg);

}  // namespace artsep
