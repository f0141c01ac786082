#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace artsep {

// Pipeline-wide settings. Loaded from a key = value file, then overridden by
// command-line flags (flags win). The hash of the effective config is stamped
// into every artifact.
struct RunConfig {
  std::string dataset_root = "data/toy";
  std::string lexicon_path;  // empty -> built-in lexicon
  std::string manner_path;   // empty -> built-in manner table
  std::string out_dir = "out";
  std::uint64_t seed = 17;

  int em_iters = 8;        // acoustic model training iterations
  int sil_iters = 3;       // silence model training iterations
  int refine_iters = 2;    // alignment refinement rounds
  int train_steps = 60;    // separator optimizer steps
  int batch_size = 2;
  double learning_rate = 1e-3;
  int hidden = 64;         // mask network hidden width
  int mix_chunks = 16;     // chunks emitted by the mixing command
  double chunk_seconds = 6.0;
  std::string va_mode = "selection_only";  // or "extra_dim"

  bool va_extra_dim() const { return va_mode == "extra_dim"; }
  std::size_t proj_in_dim() const;
};

// overrides are (key, value) pairs applied after the file, last writer wins.
RunConfig load_run_config(const std::string& path,
                          const std::vector<std::pair<std::string, std::string>>& overrides);

// FNV-1a over the canonical serialization of every field.
std::uint64_t config_hash(const RunConfig& cfg);

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t seed = 14695981039346656037ULL);

}  // namespace artsep
