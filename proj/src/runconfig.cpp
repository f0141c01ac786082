#include "artsep/runconfig.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>

#include "artsep/common.hpp"
#include "artsep/lexicon.hpp"

namespace artsep {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

long long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' expects an integer, got '" + value + "'");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' expects a number, got '" + value + "'");
  }
}

void apply(RunConfig& cfg, const std::string& key, const std::string& raw) {
  const std::string value = unquote(raw);
  if (key == "dataset_root")
    cfg.dataset_root = value;
  else if (key == "lexicon_path")
    cfg.lexicon_path = value;
  else if (key == "manner_path")
    cfg.manner_path = value;
  else if (key == "out_dir")
    cfg.out_dir = value;
  else if (key == "seed")
    cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
  else if (key == "em_iters")
    cfg.em_iters = static_cast<int>(parse_int(key, value));
  else if (key == "sil_iters")
    cfg.sil_iters = static_cast<int>(parse_int(key, value));
  else if (key == "refine_iters")
    cfg.refine_iters = static_cast<int>(parse_int(key, value));
  else if (key == "train_steps")
    cfg.train_steps = static_cast<int>(parse_int(key, value));
  else if (key == "batch_size")
    cfg.batch_size = static_cast<int>(parse_int(key, value));
  else if (key == "learning_rate")
    cfg.learning_rate = parse_double(key, value);
  else if (key == "hidden")
    cfg.hidden = static_cast<int>(parse_int(key, value));
  else if (key == "mix_chunks")
    cfg.mix_chunks = static_cast<int>(parse_int(key, value));
  else if (key == "chunk_seconds")
    cfg.chunk_seconds = parse_double(key, value);
  else if (key == "va_mode")
    cfg.va_mode = value;
  else
    throw ConfigError("unknown config key: " + key);
}

void validate(const RunConfig& cfg) {
  if (cfg.va_mode != "selection_only" && cfg.va_mode != "extra_dim")
    throw ConfigError("va_mode must be selection_only or extra_dim, got '" + cfg.va_mode + "'");
  if (cfg.em_iters < 0 || cfg.sil_iters < 0 || cfg.refine_iters < 0 || cfg.train_steps < 0)
    throw ConfigError("iteration counts must be non-negative");
  if (cfg.batch_size <= 0 || cfg.hidden <= 0 || cfg.mix_chunks < 0)
    throw ConfigError("batch_size and hidden must be positive");
  if (cfg.learning_rate < 0.0 || cfg.chunk_seconds <= 0.0)
    throw ConfigError("learning_rate must be >= 0 and chunk_seconds > 0");
  if ((cfg.lexicon_path.empty()) != (cfg.manner_path.empty()))
    throw ConfigError("lexicon_path and manner_path must be given together");
}

}  // namespace

std::size_t RunConfig::proj_in_dim() const {
  return static_cast<std::size_t>(kNumManners) + (va_extra_dim() ? 1 : 0);
}

RunConfig load_run_config(const std::string& path,
                          const std::vector<std::pair<std::string, std::string>>& overrides) {
  RunConfig cfg;
  if (!path.empty()) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
      ++lineno;
      const std::string s = trim(line);
      if (s.empty() || s[0] == '#' || s[0] == '[') continue;  // [section] headers ignored
      const auto eq = s.find('=');
      if (eq == std::string::npos)
        throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
      apply(cfg, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    }
  }
  for (const auto& [key, value] : overrides) apply(cfg, key, value);
  validate(cfg);
  return cfg;
}

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t config_hash(const RunConfig& cfg) {
  char buf[1024];
  const int n = std::snprintf(
      buf, sizeof buf,
      "dataset_root=%s\nlexicon_path=%s\nmanner_path=%s\nout_dir=%s\nseed=%llu\n"
      "em_iters=%d\nsil_iters=%d\nrefine_iters=%d\ntrain_steps=%d\nbatch_size=%d\n"
      "learning_rate=%.17g\nhidden=%d\nmix_chunks=%d\nchunk_seconds=%.17g\nva_mode=%s\n",
      cfg.dataset_root.c_str(), cfg.lexicon_path.c_str(), cfg.manner_path.c_str(),
      cfg.out_dir.c_str(), static_cast<unsigned long long>(cfg.seed), cfg.em_iters,
      cfg.sil_iters, cfg.refine_iters, cfg.train_steps, cfg.batch_size, cfg.learning_rate,
      cfg.hidden, cfg.mix_chunks, cfg.chunk_seconds, cfg.va_mode.c_str());
  if (n < 0) throw ConfigError("config serialization failed");
  return fnv1a(buf, static_cast<std::size_t>(n));
}

}  // namespace artsep
