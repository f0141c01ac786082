#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "artsep/audio.hpp"
#include "artsep/script.hpp"

namespace artsep {

// One dataset entry: aligned stems, their linear mixture, and the script.
struct Utterance {
  std::string id;
  AudioClip mix;
  AudioClip speech;
  AudioClip music;
  AudioClip sfx;
  std::vector<ScriptLine> script;
};

struct MixSpec {
  double p_direct = 0.25;
  double p_drop_music = 0.20;
  double p_drop_fx = 0.20;
  double gain_lo = 0.7;
  double gain_hi = 1.3;
  double chunk_s = 6.0;
  std::uint64_t seed = 0;
};

// Everything needed to regenerate a chunk bit-exactly.
struct ChunkProvenance {
  std::uint64_t draw = 0;
  bool direct = false;
  std::string utt_a;
  double off_a_s = 0.0;
  double gain_s = 1.0;
  bool drop_music = false;
  std::string utt_b;
  double off_b_s = 0.0;
  double gain_m = 1.0;
  bool drop_fx = false;
  std::string utt_c;
  double off_c_s = 0.0;
  double gain_f = 1.0;
};

nlohmann::json provenance_to_json(const ChunkProvenance& p);
ChunkProvenance provenance_from_json(const nlohmann::json& j);

struct MixChunk {
  std::vector<double> mixture;
  std::vector<double> target;  // speech stem after scaling
  int sample_rate = 44100;
  ChunkProvenance prov;
};

// Maximal intervals where the clip is louder than db_floor (dBFS RMS) for at
// least min_s seconds, measured on a 0.1 s cell grid.
std::vector<std::pair<double, double>> nonsilent_regions(const AudioClip& clip,
                                                         double db_floor = -60.0,
                                                         double min_s = 0.2);

// Chunk start offsets (0.1 s grid) whose window overlaps a script line or a
// non-silent region of the speech stem. Windows may run past the end; the
// sampled chunk is then zero-padded on the right.
std::vector<double> nonsilent_speech_windows(const Utterance& u, double chunk_s);

// Non-overlapping mixture segments covering all speech: script line intervals
// merged, padded to at least 6 s (shifted to stay inside the utterance), and
// re-merged.
std::vector<std::pair<double, double>> eval_segments(const Utterance& u);

// Draws one training chunk. Each draw index consumes a fixed 12-value random
// sequence from its own stream, so chunks can be generated in any order or in
// parallel with identical results.
MixChunk sample_chunk(const std::vector<Utterance>& dataset, const MixSpec& spec,
                      std::uint64_t draw_index);

// Rebuilds the exact chunk described by a provenance record.
MixChunk chunk_from_provenance(const std::vector<Utterance>& dataset, const MixSpec& spec,
                               const ChunkProvenance& prov);

// Loads <root>/<split>/<utt_id>/{mix,speech,music,sfx}.wav + script.json.
std::vector<Utterance> load_dataset(const std::string& root, const std::string& split);

}  // namespace artsep
