#include <cmath>
#include <numbers>

#include <doctest.h>

#include "artsep/mfcc.hpp"
#include "artsep/rng.hpp"
#include "testutil.hpp"

using namespace artsep;

namespace {

AudioClip tone(double freq, double seconds, int rate) {
  AudioClip c;
  c.sample_rate = rate;
  c.samples.resize(static_cast<std::size_t>(seconds * rate));
  for (std::size_t i = 0; i < c.samples.size(); ++i)
    c.samples[i] = 0.5 * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / rate);
  return c;
}

}  // namespace

TEST_SUITE("mfcc") {

TEST_CASE("shape: 39 dims, 10 ms hop") {
  const AudioClip c = tone(440.0, 1.0, 16000);
  const FrameFeatures f = mfcc(c);
  CHECK(f.dim == 39);
  // 1 s at 16 kHz, 400-sample window, 160-sample hop -> (16000-400)/160 + 1.
  CHECK(f.frames == 98);
  CHECK(f.v.size() == f.frames * f.dim);
}

TEST_CASE("features are finite and deterministic") {
  Rng rng(11);
  AudioClip c;
  c.sample_rate = 44100;
  c.samples.resize(22050);
  for (auto& s : c.samples) s = rng.uniform(-0.5, 0.5);

  const FrameFeatures a = mfcc(c);
  const FrameFeatures b = mfcc(c);
  REQUIRE(a.v.size() == b.v.size());
  for (std::size_t i = 0; i < a.v.size(); ++i) {
    CHECK(std::isfinite(a.v[i]));
    CHECK(a.v[i] == b.v[i]);
  }
}

TEST_CASE("serial reference and parallel kernel agree exactly") {
  Rng rng(12);
  AudioClip c;
  c.sample_rate = 44100;
  c.samples.resize(44100);
  for (auto& s : c.samples) s = rng.uniform(-0.5, 0.5);
  const FrameFeatures a = mfcc(c);
  const FrameFeatures b = ref::mfcc(c);
  REQUIRE(a.frames == b.frames);
  REQUIRE(a.dim == b.dim);
  for (std::size_t i = 0; i < a.v.size(); ++i) CHECK(a.v[i] == b.v[i]);
}

TEST_CASE("log energy rises with amplitude") {
  const AudioClip quiet = tone(300.0, 0.5, 16000);
  AudioClip loud = quiet;
  for (auto& s : loud.samples) s *= 4.0;
  const FrameFeatures fq = mfcc(quiet);
  const FrameFeatures fl = mfcc(loud);
  // Dim 12 is the log-energy slot; compare a mid frame.
  const std::size_t fr = fq.frames / 2;
  CHECK(fl.row(fr)[12] > fq.row(fr)[12] + 1.0);
}

TEST_CASE("different tones produce different cepstra") {
  const FrameFeatures a = mfcc(tone(300.0, 0.5, 16000));
  const FrameFeatures b = mfcc(tone(2500.0, 0.5, 16000));
  const std::size_t fr = std::min(a.frames, b.frames) / 2;
  double dist = 0.0;
  for (int d = 0; d < 12; ++d) dist += std::abs(a.row(fr)[d] - b.row(fr)[d]);
  CHECK(dist > 1.0);
}

TEST_CASE("deltas of a constant static track are zero") {
  // Constant signal -> every frame identical -> deltas must vanish.
  AudioClip c;
  c.sample_rate = 16000;
  c.samples.assign(8000, 0.25);
  const FrameFeatures f = mfcc(c);
  const std::size_t fr = f.frames / 2;
  for (std::size_t d = 13; d < 39; ++d) CHECK(std::abs(f.row(fr)[d]) < 1e-9);
}

TEST_CASE("resampler preserves a band-limited tone") {
  const AudioClip c = tone(1000.0, 0.5, 44100);
  const AudioClip r = resample(c, 16000);
  CHECK(r.sample_rate == 16000);
  CHECK(testutil::close_rel(static_cast<double>(r.samples.size()),
                            c.samples.size() * 16000.0 / 44100.0, 1e-3));
  // RMS is preserved away from the edges.
  auto rms = [](const AudioClip& x, std::size_t lo, std::size_t hi) {
    double e = 0.0;
    for (std::size_t i = lo; i < hi; ++i) e += x.samples[i] * x.samples[i];
    return std::sqrt(e / static_cast<double>(hi - lo));
  };
  const double orig = rms(c, 2000, c.samples.size() - 2000);
  const double res = rms(r, 1000, r.samples.size() - 1000);
  CHECK(testutil::close_rel(orig, res, 0.02));
}

TEST_CASE("fingerprint tracks the configuration") {
  const MfccConfig a;
  MfccConfig b;
  CHECK(a.fingerprint() == b.fingerprint());
  b.n_mels = 30;
  CHECK(a.fingerprint() != b.fingerprint());
  MfccConfig c;
  c.hop_ms = 12.5;
  CHECK(a.fingerprint() != c.fingerprint());
}

}  // TEST_SUITE
