#include "artsep/mixer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "artsep/common.hpp"
#include "artsep/rng.hpp"

namespace fs = std::filesystem;

namespace artsep {

namespace {

constexpr double kOffsetGrid = 0.1;  // seconds

using Interval = std::pair<double, double>;

std::vector<Interval> merge_intervals(std::vector<Interval> xs) {
  std::sort(xs.begin(), xs.end());
  std::vector<Interval> out;
  for (const auto& x : xs) {
    if (!out.empty() && x.first <= out.back().second)
      out.back().second = std::max(out.back().second, x.second);
    else
      out.push_back(x);
  }
  return out;
}

// Copies chunk_s seconds starting at off_s, zero-padding past the end.
std::vector<double> slice_padded(const AudioClip& clip, double off_s, double chunk_s) {
  const auto start = static_cast<long>(std::llround(off_s * clip.sample_rate));
  const auto len = static_cast<std::size_t>(std::llround(chunk_s * clip.sample_rate));
  std::vector<double> out(len, 0.0);
  const long n = static_cast<long>(clip.samples.size());
  for (std::size_t i = 0; i < len; ++i) {
    const long s = start + static_cast<long>(i);
    if (s >= 0 && s < n) out[i] = clip.samples[s];
  }
  return out;
}

std::size_t find_utt(const std::vector<Utterance>& dataset, const std::string& id) {
  for (std::size_t i = 0; i < dataset.size(); ++i)
    if (dataset[i].id == id) return i;
  throw DataError("provenance references unknown utterance: " + id);
}

MixChunk assemble(const std::vector<Utterance>& dataset, const MixSpec& spec,
                  const ChunkProvenance& prov) {
  MixChunk chunk;
  chunk.prov = prov;

  const Utterance& a = dataset[find_utt(dataset, prov.utt_a)];
  chunk.sample_rate = a.speech.sample_rate;

  if (prov.direct) {
    chunk.mixture = slice_padded(a.mix, prov.off_a_s, spec.chunk_s);
    chunk.target = slice_padded(a.speech, prov.off_a_s, spec.chunk_s);
    return chunk;
  }

  std::vector<double> speech = slice_padded(a.speech, prov.off_a_s, spec.chunk_s);
  for (double& v : speech) v *= prov.gain_s;

  std::vector<double> mixture = speech;
  if (!prov.drop_music) {
    const Utterance& b = dataset[find_utt(dataset, prov.utt_b)];
    std::vector<double> music = slice_padded(b.music, prov.off_b_s, spec.chunk_s);
    for (std::size_t i = 0; i < mixture.size(); ++i) mixture[i] += prov.gain_m * music[i];
  }
  if (!prov.drop_fx) {
    const Utterance& c = dataset[find_utt(dataset, prov.utt_c)];
    std::vector<double> sfx = slice_padded(c.sfx, prov.off_c_s, spec.chunk_s);
    for (std::size_t i = 0; i < mixture.size(); ++i) mixture[i] += prov.gain_f * sfx[i];
  }

  chunk.mixture = std::move(mixture);
  chunk.target = std::move(speech);
  return chunk;
}

// Unconstrained chunk offsets for background stems: the 0.1 s grid over
// [0, duration - chunk_s], always at least one offset.
std::size_t background_offset_count(const AudioClip& clip, double chunk_s) {
  const double span = clip.duration_s() - chunk_s;
  if (span <= 0.0) return 1;
  return static_cast<std::size_t>(std::floor(span / kOffsetGrid + 1e-9)) + 1;
}

}  // namespace

std::vector<Interval> nonsilent_regions(const AudioClip& clip, double db_floor, double min_s) {
  const auto cell = static_cast<std::size_t>(std::llround(kOffsetGrid * clip.sample_rate));
  if (cell == 0 || clip.samples.empty()) return {};
  const std::size_t n_cells = (clip.samples.size() + cell - 1) / cell;
  const std::size_t min_cells =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(min_s / kOffsetGrid)));

  std::vector<bool> loud(n_cells, false);
  for (std::size_t c = 0; c < n_cells; ++c) {
    const std::size_t s0 = c * cell;
    const std::size_t s1 = std::min(clip.samples.size(), s0 + cell);
    double e = 0.0;
    for (std::size_t s = s0; s < s1; ++s) e += clip.samples[s] * clip.samples[s];
    const double rms = std::sqrt(e / static_cast<double>(s1 - s0));
    loud[c] = 20.0 * std::log10(rms + 1e-300) > db_floor;
  }

  std::vector<Interval> out;
  std::size_t run_start = 0, run_len = 0;
  for (std::size_t c = 0; c <= n_cells; ++c) {
    if (c < n_cells && loud[c]) {
      if (run_len == 0) run_start = c;
      ++run_len;
    } else {
      if (run_len >= min_cells)
        out.push_back({static_cast<double>(run_start) * kOffsetGrid,
                       static_cast<double>(run_start + run_len) * kOffsetGrid});
      run_len = 0;
    }
  }
  return out;
}

std::vector<double> nonsilent_speech_windows(const Utterance& u, double chunk_s) {
  std::vector<Interval> intervals;
  for (const auto& line : u.script) intervals.push_back({line.start_s, line.end_s});
  for (const auto& r : nonsilent_regions(u.speech)) intervals.push_back(r);
  if (intervals.empty()) return {};
  intervals = merge_intervals(std::move(intervals));

  const double dur = u.speech.duration_s();
  std::vector<double> offsets;
  for (std::size_t i = 0;; ++i) {
    const double o = static_cast<double>(i) * kOffsetGrid;
    if (o >= dur) break;
    for (const auto& [s, e] : intervals)
      if (o < e && o + chunk_s > s) {  // positive-measure overlap
        offsets.push_back(o);
        break;
      }
  }
  return offsets;
}

std::vector<Interval> eval_segments(const Utterance& u) {
  constexpr double kMinSeg = 6.0;
  std::vector<Interval> lines;
  for (const auto& line : u.script) lines.push_back({line.start_s, line.end_s});
  if (lines.empty()) return {};
  lines = merge_intervals(std::move(lines));

  const double dur = u.mix.duration_s();
  for (auto& [s, e] : lines) {
    const double need = kMinSeg - (e - s);
    if (need > 0.0) {
      s -= need / 2.0;
      e += need / 2.0;
    }
    // Shift padded windows back inside the utterance, then clamp.
    if (s < 0.0) {
      e -= s;
      s = 0.0;
    }
    if (e > dur) {
      s -= e - dur;
      e = dur;
    }
    s = std::max(s, 0.0);
  }
  return merge_intervals(std::move(lines));
}

MixChunk sample_chunk(const std::vector<Utterance>& dataset, const MixSpec& spec,
                      std::uint64_t draw_index) {
  if (dataset.empty()) throw DataError("sample_chunk: empty dataset");
  const std::uint64_t n = dataset.size();

  // Fixed per-draw sequence (12 values, always consumed so that the mapping
  // from draw index to chunk never depends on branch outcomes). The high bits
  // tag the stream domain so other subsystems on the same seed stay disjoint.
  Rng rng = Rng::stream(spec.seed, 0x4D495800000000ULL + draw_index);
  const double u_direct = rng.uniform();
  const std::uint64_t idx_a = rng.below(n);
  const std::uint64_t pick_a = rng.next_u64();
  const bool drop_music = rng.uniform() < spec.p_drop_music;
  const std::uint64_t idx_b = rng.below(n);
  const std::uint64_t pick_b = rng.next_u64();
  const bool drop_fx = rng.uniform() < spec.p_drop_fx;
  const std::uint64_t idx_c = rng.below(n);
  const std::uint64_t pick_c = rng.next_u64();
  const double gain_s = rng.uniform(spec.gain_lo, spec.gain_hi);
  const double gain_m = rng.uniform(spec.gain_lo, spec.gain_hi);
  const double gain_f = rng.uniform(spec.gain_lo, spec.gain_hi);

  // Speech source: first utterance at or after idx_a with admissible windows.
  std::vector<double> windows;
  std::uint64_t a = idx_a;
  for (std::uint64_t k = 0; k < n; ++k) {
    a = (idx_a + k) % n;
    windows = nonsilent_speech_windows(dataset[a], spec.chunk_s);
    if (!windows.empty()) break;
  }
  if (windows.empty())
    throw DataError("sample_chunk: no utterance has non-silent speech");

  ChunkProvenance prov;
  prov.draw = draw_index;
  prov.direct = u_direct < spec.p_direct;
  prov.utt_a = dataset[a].id;
  prov.off_a_s = windows[pick_a % windows.size()];
  prov.gain_s = gain_s;
  prov.drop_music = drop_music;
  prov.utt_b = dataset[idx_b].id;
  prov.off_b_s = static_cast<double>(pick_b % background_offset_count(dataset[idx_b].music,
                                                                     spec.chunk_s)) *
                 kOffsetGrid;
  prov.gain_m = gain_m;
  prov.drop_fx = drop_fx;
  prov.utt_c = dataset[idx_c].id;
  prov.off_c_s = static_cast<double>(pick_c % background_offset_count(dataset[idx_c].sfx,
                                                                     spec.chunk_s)) *
                 kOffsetGrid;
  prov.gain_f = gain_f;

  return assemble(dataset, spec, prov);
}

MixChunk chunk_from_provenance(const std::vector<Utterance>& dataset, const MixSpec& spec,
                               const ChunkProvenance& prov) {
  return assemble(dataset, spec, prov);
}

nlohmann::json provenance_to_json(const ChunkProvenance& p) {
  return {{"draw", p.draw},
          {"branch", p.direct ? "direct" : "remix"},
          {"utt_a", p.utt_a},
          {"off_a_s", p.off_a_s},
          {"gain_s", p.gain_s},
          {"drop_music", p.drop_music},
          {"utt_b", p.utt_b},
          {"off_b_s", p.off_b_s},
          {"gain_m", p.gain_m},
          {"drop_fx", p.drop_fx},
          {"utt_c", p.utt_c},
          {"off_c_s", p.off_c_s},
          {"gain_f", p.gain_f}};
}

ChunkProvenance provenance_from_json(const nlohmann::json& j) {
  ChunkProvenance p;
  p.draw = j.at("draw").get<std::uint64_t>();
  p.direct = j.at("branch").get<std::string>() == "direct";
  p.utt_a = j.at("utt_a").get<std::string>();
  p.off_a_s = j.at("off_a_s").get<double>();
  p.gain_s = j.at("gain_s").get<double>();
  p.drop_music = j.at("drop_music").get<bool>();
  p.utt_b = j.at("utt_b").get<std::string>();
  p.off_b_s = j.at("off_b_s").get<double>();
  p.gain_m = j.at("gain_m").get<double>();
  p.drop_fx = j.at("drop_fx").get<bool>();
  p.utt_c = j.at("utt_c").get<std::string>();
  p.off_c_s = j.at("off_c_s").get<double>();
  p.gain_f = j.at("gain_f").get<double>();
  return p;
}

std::vector<Utterance> load_dataset(const std::string& root, const std::string& split) {
  const fs::path dir = fs::path(root) / split;
  if (!fs::is_directory(dir))
    throw DataError("dataset split directory not found: " + dir.string());

  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_directory()) ids.push_back(entry.path().filename().string());
  std::sort(ids.begin(), ids.end());
  if (ids.empty()) throw DataError("dataset split is empty: " + dir.string());

  std::vector<Utterance> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    const fs::path u = dir / id;
    Utterance utt;
    utt.id = id;
    utt.mix = read_wav((u / "mix.wav").string());
    utt.speech = read_wav((u / "speech.wav").string());
    utt.music = read_wav((u / "music.wav").string());
    utt.sfx = read_wav((u / "sfx.wav").string());
    utt.script = load_script_json((u / "script.json").string());

    const std::size_t len = utt.mix.samples.size();
    const int rate = utt.mix.sample_rate;
    for (const AudioClip* c : {&utt.speech, &utt.music, &utt.sfx})
      if (c->samples.size() != len || c->sample_rate != rate)
        throw DataError("utterance " + id + ": stems differ in length or rate");
    validate_script(utt.script, utt.mix.duration_s(), id);
    out.push_back(std::move(utt));
  }
  return out;
}

}  // namespace artsep
