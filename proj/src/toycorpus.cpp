#include "artsep/toycorpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iterator>
#include <vector>

#include "artsep/audio.hpp"
#include "artsep/common.hpp"
#include "artsep/lexicon.hpp"
#include "artsep/rng.hpp"
#include "artsep/script.hpp"

namespace fs = std::filesystem;

namespace artsep {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Fixed sentence pool; utterance u speaks lines 2u and 2u+1. Every word is in
// the built-in lexicon and each split covers all seven manner classes.
constexpr const char* kLines[] = {
    "the water is cold",       "butter on the bread",       // u00
    "watch the little cat",    "sing a summer song",        // u01
    "think about the matter",  "jump over the river",       // u02
    "a better city garden",    "the letter came early",     // u03
    "children catch the mouse", "mother made warm dinner",  // u04
    "the king may answer",     "water under the mountain",  // u05
    "which question was that", "the horse ran north",       // u06
    "little yellow letter",    "the young bird may fly",    // u07
    "watch the fire change",   "people walk together",      // u08
    "the butter was yellow",   "music in the morning",      // u09
};
constexpr int kNumSentences = static_cast<int>(std::size(kLines));

void add_edge_ramps(std::vector<double>& x, int rate) {
  const std::size_t r = std::min<std::size_t>(x.size() / 2, rate / 200);  // 5 ms
  for (std::size_t i = 0; i < r; ++i) {
    const double w = 0.5 - 0.5 * std::cos(kTwoPi * 0.5 * (i + 1) / (r + 1));
    x[i] *= w;
    x[x.size() - 1 - i] *= w;
  }
}

// Class-characteristic sounds: distinct enough in spectrum and envelope that
// cepstral features separate the classes.
std::vector<double> synth_token(Manner m, double dur_s, int rate, Rng& rng) {
  const auto n = static_cast<std::size_t>(std::llround(dur_s * rate));
  std::vector<double> x(n, 0.0);
  const double dt = 1.0 / rate;
  switch (m) {
    case Manner::VWL: {
      const double f0 = 130.0 + rng.uniform(-10.0, 10.0);
      for (int k = 1; k <= 12; ++k) {
        const double f = f0 * k;
        const double a = std::exp(-std::pow((f - 650.0) / 300.0, 2)) +
                         0.7 * std::exp(-std::pow((f - 1150.0) / 400.0, 2));
        const double ph = rng.uniform(0.0, kTwoPi);
        for (std::size_t i = 0; i < n; ++i)
          x[i] += 0.10 * a * std::sin(kTwoPi * f * i * dt + ph);
      }
      break;
    }
    case Manner::NAS: {
      const double f = 240.0 + rng.uniform(-15.0, 15.0);
      const double ph = rng.uniform(0.0, kTwoPi);
      for (std::size_t i = 0; i < n; ++i)
        x[i] = 0.20 * std::sin(kTwoPi * f * i * dt + ph) +
               0.08 * std::sin(kTwoPi * 2.0 * f * i * dt + 1.3 * ph);
      break;
    }
    case Manner::APR: {
      const double f_lo = 350.0 + rng.uniform(-20.0, 20.0);
      const double f_hi = 750.0 + rng.uniform(-30.0, 30.0);
      double phase = rng.uniform(0.0, kTwoPi);
      for (std::size_t i = 0; i < n; ++i) {
        const double f = f_lo + (f_hi - f_lo) * (n > 1 ? static_cast<double>(i) / (n - 1) : 0.0);
        phase += kTwoPi * f * dt;
        x[i] = 0.20 * std::sin(phase);
      }
      break;
    }
    case Manner::FLP: {
      // Short damped low thud.
      const double f = 180.0 + rng.uniform(-15.0, 15.0);
      for (std::size_t i = 0; i < n; ++i)
        x[i] = 0.25 * std::exp(-30.0 * i * dt) * std::sin(kTwoPi * f * i * dt);
      break;
    }
    case Manner::STP: {
      // Closure then a decaying high-frequency burst.
      const std::size_t burst = n - std::min(n, n * 3 / 5);
      double prev = 0.0;
      for (std::size_t i = n - burst; i < n; ++i) {
        const double w = rng.normal();
        const double hp = w - prev;  // first difference tilts the burst high
        prev = w;
        x[i] = 0.22 * hp * std::exp(-60.0 * (i - (n - burst)) * dt);
      }
      break;
    }
    case Manner::FRC: {
      double prev = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double w = rng.normal();
        x[i] = 0.13 * (w - prev);
        prev = w;
      }
      break;
    }
    case Manner::AFR: {
      // Stop release flowing into a hiss.
      const std::size_t burst = n * 2 / 5;
      double prev = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double w = rng.normal();
        const double hp = w - prev;
        prev = w;
        const double env = i < burst ? std::exp(-50.0 * i * dt) : 0.6;
        x[i] = 0.16 * hp * env;
      }
      break;
    }
  }
  add_edge_ramps(x, rate);
  return x;
}

double token_duration(Manner m, Rng& rng) {
  switch (m) {
    case Manner::VWL: return rng.uniform(0.14, 0.20);
    case Manner::NAS: return rng.uniform(0.09, 0.13);
    case Manner::APR: return rng.uniform(0.08, 0.12);
    case Manner::FLP: return rng.uniform(0.035, 0.050);
    case Manner::STP: return rng.uniform(0.07, 0.11);
    case Manner::FRC: return rng.uniform(0.09, 0.14);
    case Manner::AFR: return rng.uniform(0.10, 0.14);
  }
  return 0.1;
}

void mix_into(std::vector<double>& dst, const std::vector<double>& src, std::size_t at) {
  for (std::size_t i = 0; i < src.size() && at + i < dst.size(); ++i) dst[at + i] += src[i];
}

struct SpeechTrack {
  std::vector<double> samples;
  std::vector<ScriptLine> script;
};

SpeechTrack synth_speech(const Lexicon& lex, int utt_index, std::size_t n_samples, int rate,
                         Rng& rng) {
  SpeechTrack out;
  out.samples.assign(n_samples, 0.0);

  double cursor_s = 0.5 + rng.uniform(0.0, 0.2);
  for (int li = 0; li < 2; ++li) {
    const std::string text = kLines[(2 * utt_index + li) % kNumSentences];
    const auto tokens = lex.tokens_for_text(text);

    const double line_start = cursor_s;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      const double dur = token_duration(tokens[t].manner, rng);
      const auto sound = synth_token(tokens[t].manner, dur, rate, rng);
      mix_into(out.samples, sound, static_cast<std::size_t>(std::llround(cursor_s * rate)));
      cursor_s += dur;
    }
    ScriptLine line;
    line.start_s = line_start;
    line.end_s = cursor_s;
    line.text = text;
    line.line_id = li;
    out.script.push_back(line);

    cursor_s += rng.uniform(1.0, 1.5);  // inter-line silence
  }
  return out;
}

std::vector<double> synth_music(std::size_t n_samples, int rate, Rng& rng) {
  std::vector<double> x(n_samples, 0.0);
  const double roots[] = {110.0, 130.8, 98.0};
  const double dt = 1.0 / rate;
  const double trem_f = rng.uniform(0.2, 0.5);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const int chord = static_cast<int>(i * dt / 2.0) % 3;
    const double r = roots[chord];
    const double trem = 0.8 + 0.2 * std::sin(kTwoPi * trem_f * i * dt);
    x[i] = 0.035 * trem *
           (std::sin(kTwoPi * r * i * dt) + 0.8 * std::sin(kTwoPi * r * 1.5 * i * dt) +
            0.6 * std::sin(kTwoPi * r * 2.0 * i * dt));
  }
  return x;
}

std::vector<double> synth_sfx(std::size_t n_samples, int rate, Rng& rng) {
  std::vector<double> x(n_samples, 0.0);
  const int events = 3 + static_cast<int>(rng.below(3));
  const double dur_total = static_cast<double>(n_samples) / rate;
  for (int e = 0; e < events; ++e) {
    const double at = rng.uniform(0.0, dur_total - 0.5);
    const double dur = rng.uniform(0.15, 0.40);
    const auto n = static_cast<std::size_t>(dur * rate);
    std::vector<double> burst(n);
    double lp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      lp = 0.9 * lp + 0.1 * rng.normal();  // low-passed rumble
      burst[i] = 1.1 * lp * std::exp(-6.0 * static_cast<double>(i) / rate);
    }
    add_edge_ramps(burst, rate);
    mix_into(x, burst, static_cast<std::size_t>(std::llround(at * rate)));
  }
  return x;
}

// Quantizes to f32 grid so that stored stems sum bit-closely to the stored mix.
void quantize_f32(std::vector<double>& x) {
  for (double& v : x) v = static_cast<double>(static_cast<float>(v));
}

}  // namespace

void generate_toy_corpus(const std::string& root, const ToyConfig& cfg) {
  if (cfg.n_train <= 0 || cfg.n_val < 0 || cfg.n_test < 0 || cfg.utt_seconds < 6.0)
    throw ConfigError("toy corpus: need n_train > 0 and utt_seconds >= 6");
  const Lexicon lex = Lexicon::builtin_demo();
  const auto n_samples =
      static_cast<std::size_t>(std::llround(cfg.utt_seconds * cfg.sample_rate));

  struct SplitPlan {
    const char* name;
    int count;
  };
  const SplitPlan plan[] = {{"train", cfg.n_train}, {"val", cfg.n_val}, {"test", cfg.n_test}};

  int utt_index = 0;
  for (const auto& split : plan) {
    for (int k = 0; k < split.count; ++k, ++utt_index) {
      // Stream domain tag keeps toy synthesis disjoint from other subsystems
      // running on the same seed.
      Rng rng = Rng::stream(cfg.seed, 0x544F5900000000ULL + static_cast<std::uint64_t>(utt_index));

      SpeechTrack sp = synth_speech(lex, utt_index, n_samples, cfg.sample_rate, rng);
      std::vector<double> music = synth_music(n_samples, cfg.sample_rate, rng);
      std::vector<double> sfx = synth_sfx(n_samples, cfg.sample_rate, rng);

      quantize_f32(sp.samples);
      quantize_f32(music);
      quantize_f32(sfx);
      std::vector<double> mix(n_samples);
      for (std::size_t i = 0; i < n_samples; ++i) mix[i] = sp.samples[i] + music[i] + sfx[i];

      char name[16];
      std::snprintf(name, sizeof name, "u%02d", utt_index);
      const fs::path dir = fs::path(root) / split.name / name;
      fs::create_directories(dir);

      const auto wav = [&](const char* file, std::vector<double>&& samples) {
        AudioClip clip;
        clip.samples = std::move(samples);
        clip.sample_rate = cfg.sample_rate;
        write_wav((dir / file).string(), clip, WavFormat::Float32);
      };
      wav("speech.wav", std::move(sp.samples));
      wav("music.wav", std::move(music));
      wav("sfx.wav", std::move(sfx));
      wav("mix.wav", std::move(mix));
      save_script_json((dir / "script.json").string(), sp.script);
    }
  }
}

}  // namespace artsep
