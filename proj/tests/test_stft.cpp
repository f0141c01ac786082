#include <cmath>
#include <numbers>

#include <doctest.h>

#include "artsep/rng.hpp"
#include "artsep/stft.hpp"
#include "testutil.hpp"

using namespace artsep;

namespace {

AudioClip random_clip(std::uint64_t seed, std::size_t n, int rate = 44100) {
  AudioClip c;
  c.sample_rate = rate;
  c.samples.resize(n);
  Rng rng(seed);
  for (auto& s : c.samples) s = rng.uniform(-0.8, 0.8);
  return c;
}

}  // namespace

TEST_SUITE("stft") {

TEST_CASE("frame count and layout") {
  const StftParams p;
  const AudioClip c = random_clip(1, 44100);
  const Spectrogram s = stft(c, p);
  CHECK(s.frames == c.samples.size() / p.hop + 1);
  CHECK(s.bins == p.n_fft / 2 + 1);
  CHECK(s.sample_rate == c.sample_rate);
  CHECK(s.frame_time(0) == 0.0);
  CHECK(s.frame_time(147) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("round trip error below 1e-6") {
  // Length deliberately not a multiple of the hop.
  const AudioClip c = random_clip(2, 44100 + 137);
  const Spectrogram s = stft(c);
  const AudioClip back = istft(s, c.samples.size());
  REQUIRE(back.samples.size() == c.samples.size());
  double max_err = 0.0;
  for (std::size_t i = 0; i < c.samples.size(); ++i)
    max_err = std::max(max_err, std::abs(back.samples[i] - c.samples[i]));
  CHECK(max_err < 1e-6);
}

TEST_CASE("round trip with a short signal") {
  const AudioClip c = random_clip(3, 512);  // shorter than one window
  const Spectrogram s = stft(c);
  const AudioClip back = istft(s, c.samples.size());
  for (std::size_t i = 0; i < c.samples.size(); ++i)
    CHECK(std::abs(back.samples[i] - c.samples[i]) < 1e-6);
}

TEST_CASE("pure tone concentrates energy at its bin") {
  AudioClip c;
  c.sample_rate = 44100;
  c.samples.resize(16384);
  const double f = 430.66406250;  // exactly bin 20 for n_fft 2048 at 44.1 kHz
  for (std::size_t i = 0; i < c.samples.size(); ++i)
    c.samples[i] = std::sin(2.0 * std::numbers::pi * f * static_cast<double>(i) / 44100.0);
  const Spectrogram s = stft(c);
  const MatD mag = magnitude(s);
  // Mid-signal frame: peak bin 20 dominates its neighbours outside the
  // main lobe by orders of magnitude.
  const std::size_t fr = s.frames / 2;
  CHECK(mag(fr, 20) > 100.0 * mag(fr, 25));
  CHECK(mag(fr, 20) > 100.0 * mag(fr, 15));
}

TEST_CASE("serial reference and parallel kernel agree exactly") {
  const AudioClip c = random_clip(4, 30000);
  const Spectrogram a = stft(c);
  const Spectrogram b = ref::stft(c);
  REQUIRE(a.frames == b.frames);
  REQUIRE(a.bins == b.bins);
  for (std::size_t i = 0; i < a.v.size(); ++i) CHECK(a.v[i] == b.v[i]);
}

TEST_CASE("magnitude matrix matches complex moduli") {
  const AudioClip c = random_clip(5, 4000);
  const Spectrogram s = stft(c);
  const MatD mag = magnitude(s);
  REQUIRE(mag.rows == s.frames);
  REQUIRE(mag.cols == s.bins);
  for (std::size_t f = 0; f < s.frames; ++f)
    for (std::size_t b = 0; b < s.bins; ++b) CHECK(mag(f, b) == std::abs(s.at(f, b)));
}

TEST_CASE("bad parameters are rejected") {
  const AudioClip c = random_clip(6, 1000);
  CHECK_THROWS_AS(stft(c, StftParams{1000, 300}), ConfigError);  // not a power of two
  CHECK_THROWS_AS(stft(c, StftParams{2048, 0}), ConfigError);
  CHECK_THROWS_AS(stft(c, StftParams{256, 300}), ConfigError);  // hop > window
}

}  // TEST_SUITE
