// Microbenchmarks for the OpenMP-parallel kernels against their serial
// reference implementations. Build and run:
//   cmake --build build --target artsep_bench && ./build/bench/artsep_bench
#include <benchmark/benchmark.h>

#include <vector>

#include "artsep/hmm.hpp"
#include "artsep/mfcc.hpp"
#include "artsep/rng.hpp"
#include "artsep/separator.hpp"
#include "artsep/stft.hpp"

using namespace artsep;

namespace {

AudioClip test_clip(double seconds) {
  Rng rng(11);
  AudioClip clip;
  clip.sample_rate = 44100;
  clip.samples.resize(static_cast<std::size_t>(seconds * clip.sample_rate));
  for (auto& s : clip.samples) s = rng.normal(0.0, 0.2);
  return clip;
}

FrameFeatures test_features(std::size_t frames, std::size_t dim) {
  Rng rng(12);
  FrameFeatures f;
  f.frames = frames;
  f.dim = dim;
  f.v.resize(frames * dim);
  for (auto& x : f.v) x = rng.normal();
  return f;
}

GmmState test_state(Rng& rng, std::size_t dim, int comps) {
  GmmState st;
  for (int k = 0; k < comps; ++k) {
    Gaussian g;
    for (std::size_t d = 0; d < dim; ++d) {
      g.mean.push_back(rng.normal());
      g.var.push_back(0.5 + rng.uniform());
    }
    g.refresh_log_norm();
    st.log_weight.push_back(-std::log(static_cast<double>(comps)));
    st.comp.push_back(g);
  }
  return st;
}

void bm_stft_parallel(benchmark::State& state) {
  const AudioClip clip = test_clip(4.0);
  for (auto _ : state) benchmark::DoNotOptimize(stft(clip));
}

void bm_stft_serial(benchmark::State& state) {
  const AudioClip clip = test_clip(4.0);
  for (auto _ : state) benchmark::DoNotOptimize(ref::stft(clip));
}

void bm_mfcc_parallel(benchmark::State& state) {
  const AudioClip clip = test_clip(4.0);
  for (auto _ : state) benchmark::DoNotOptimize(mfcc(clip));
}

void bm_mfcc_serial(benchmark::State& state) {
  const AudioClip clip = test_clip(4.0);
  for (auto _ : state) benchmark::DoNotOptimize(ref::mfcc(clip));
}

void bm_gmm_log_obs_parallel(benchmark::State& state) {
  Rng rng(13);
  std::vector<GmmState> owned;
  for (int j = 0; j < 35; ++j) owned.push_back(test_state(rng, 39, 4));
  std::vector<const GmmState*> states;
  for (const auto& s : owned) states.push_back(&s);
  const FrameFeatures feats = test_features(1000, 39);
  for (auto _ : state) benchmark::DoNotOptimize(gmm_log_obs(states, feats));
}

void bm_gmm_log_obs_serial(benchmark::State& state) {
  Rng rng(13);
  std::vector<GmmState> owned;
  for (int j = 0; j < 35; ++j) owned.push_back(test_state(rng, 39, 4));
  std::vector<const GmmState*> states;
  for (const auto& s : owned) states.push_back(&s);
  const FrameFeatures feats = test_features(1000, 39);
  for (auto _ : state) benchmark::DoNotOptimize(ref::gmm_log_obs(states, feats));
}

void bm_refnet_parallel(benchmark::State& state) {
  Rng rng(14);
  const RefNet net = RefNet::init(1025, 64, rng);
  MatD fused(600, 1025);
  for (auto& v : fused.v) v = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(refnet_forward(net, fused));
}

void bm_refnet_serial(benchmark::State& state) {
  Rng rng(14);
  const RefNet net = RefNet::init(1025, 64, rng);
  MatD fused(600, 1025);
  for (auto& v : fused.v) v = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(ref::refnet_forward(net, fused));
}

BENCHMARK(bm_stft_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_stft_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_mfcc_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_mfcc_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_gmm_log_obs_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_gmm_log_obs_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_refnet_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_refnet_serial)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
