#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include <doctest.h>

#include "artsep/rng.hpp"
#include "artsep/separator.hpp"
#include "artsep/stft.hpp"
#include "testutil.hpp"

using namespace artsep;

namespace {

// Fixed-value mask, used to isolate the extraction/stitching path.
class ConstMask : public MaskEstimator {
 public:
  ConstMask(std::size_t d, double value) : d_(d), value_(value) {}
  std::size_t feature_dim() const override { return d_; }
  MatD forward(const MatD& fused) const override { return MatD(fused.rows, d_, value_); }
  MatD backward(const MatD& fused, const MatD&, std::vector<double>&) const override {
    return MatD(fused.rows, fused.cols, 0.0);
  }
  std::vector<std::span<double>> params() override { return {}; }
  std::size_t param_count() const override { return 0; }

 private:
  std::size_t d_;
  double value_;
};

TrainItem random_item(Rng& rng, std::size_t n, std::size_t d, std::size_t in_dim) {
  TrainItem it;
  it.mix_mag = MatD(n, d);
  it.target_mag = MatD(n, d);
  for (auto& v : it.mix_mag.v) v = rng.uniform(0.5, 1.5);
  for (auto& v : it.target_mag.v) v = rng.uniform(2.0, 3.0);
  it.artic = MatU8(n, in_dim, 0);
  for (std::size_t r = 0; r < n; ++r) it.artic(r, rng.below(in_dim)) = 1;
  return it;
}

}  // namespace

TEST_SUITE("separator") {

TEST_CASE("mask values stay strictly inside (0, 1)") {
  Rng rng(71);
  const RefNet net = RefNet::init(12, 6, rng);
  MatD fused(9, 12);
  for (auto& v : fused.v) v = rng.normal(0.0, 3.0);
  const MatD mask = refnet_forward(net, fused);
  for (double m : mask.v) {
    CHECK(m > 0.0);
    CHECK(m < 1.0);
  }
}

TEST_CASE("serial reference and parallel kernel agree exactly") {
  Rng rng(72);
  const RefNet net = RefNet::init(20, 11, rng);
  MatD fused(33, 20);
  for (auto& v : fused.v) v = rng.normal();
  const MatD a = refnet_forward(net, fused);
  const MatD b = ref::refnet_forward(net, fused);
  REQUIRE(a.same_shape(b));
  for (std::size_t i = 0; i < a.v.size(); ++i) CHECK(a.v[i] == b.v[i]);
}

TEST_CASE("magnitude L1 loss is the mean over every bin") {
  MatD a(2, 2), b(2, 2);
  a.v = {1.0, 2.0, 3.0, 4.0};
  b.v = {0.0, 4.0, 3.0, 1.0};
  CHECK(mag_l1_loss(a, b) == doctest::Approx((1.0 + 2.0 + 0.0 + 3.0) / 4.0).epsilon(1e-15));
  CHECK_THROWS_AS(mag_l1_loss(a, MatD(1, 2)), DataError);
}

TEST_CASE("every gradient matches central finite differences") {
  Rng rng(73);
  const std::size_t d = 8, n = 4, hidden = 3, in_dim = kNumManners;
  RefNetEstimator model(RefNet::init(d, hidden, rng));
  knowledge::Projector proj = knowledge::Projector::init(in_dim, d, rng);
  for (auto& b : proj.b) b = rng.normal(0.0, 0.05);

  std::vector<TrainItem> batch;
  batch.push_back(random_item(rng, n, d, in_dim));
  batch.push_back(random_item(rng, n, d, in_dim));

  std::vector<double> grads;
  const double base_loss = sep_loss_and_grads(model, proj, batch, grads);
  CHECK(std::isfinite(base_loss));

  // Parameter slots in gradient order: model params then projector W, bias.
  std::vector<double*> slots;
  for (auto span : model.params())
    for (auto& p : span) slots.push_back(&p);
  for (auto& p : proj.w.v) slots.push_back(&p);
  for (auto& p : proj.b) slots.push_back(&p);
  REQUIRE(grads.size() == slots.size());

  std::vector<double> dummy;
  int checked = 0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const double save = *slots[i];
    const double eps = 1e-6 * std::max(1.0, std::abs(save));
    *slots[i] = save + eps;
    const double up = sep_loss_and_grads(model, proj, batch, dummy);
    *slots[i] = save - eps;
    const double dn = sep_loss_and_grads(model, proj, batch, dummy);
    *slots[i] = save;
    const double fd = (up - dn) / (2.0 * eps);
    const double scale = std::max({std::abs(grads[i]), std::abs(fd), 1e-10});
    CHECK(std::abs(grads[i] - fd) / scale < 1e-4);
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("Adam single step matches the hand-computed update") {
  TrainConfig cfg;
  cfg.lr = 0.1;
  std::vector<double> theta{1.0};
  Adam adam(1, cfg);
  std::vector<std::span<double>> spans{std::span<double>(theta)};
  adam.update(spans, {0.5});
  // mhat = 0.5, vhat = 0.25 after bias correction at t = 1.
  const double want = 1.0 - 0.1 * 0.5 / (std::sqrt(0.25) + cfg.eps);
  CHECK(theta[0] == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("training on a fixed batch reduces the loss") {
  Rng rng(74);
  const std::size_t d = 16, hidden = 8;
  auto model = std::make_unique<RefNetEstimator>(RefNet::init(d, hidden, rng));
  knowledge::Projector proj = knowledge::Projector::init(kNumManners, d, rng);
  TrainConfig cfg;
  cfg.lr = 3e-3;
  SepTrainer trainer(std::move(model), std::move(proj), cfg);

  std::vector<TrainItem> batch;
  batch.push_back(random_item(rng, 12, d, kNumManners));
  batch.push_back(random_item(rng, 12, d, kNumManners));
  const double first = trainer.train_step(batch);
  double last = first;
  for (int s = 0; s < 60; ++s) last = trainer.train_step(batch);
  CHECK(last < first);
}

TEST_CASE("identical seeds give identical training trajectories") {
  auto run = [] {
    Rng rng(75);
    auto model = std::make_unique<RefNetEstimator>(RefNet::init(8, 4, rng));
    knowledge::Projector proj = knowledge::Projector::init(kNumManners, 8, rng);
    SepTrainer trainer(std::move(model), std::move(proj), TrainConfig{});
    std::vector<TrainItem> batch{random_item(rng, 6, 8, kNumManners)};
    std::vector<double> losses;
    for (int s = 0; s < 5; ++s) losses.push_back(trainer.train_step(batch));
    return losses;
  };
  const auto a = run();
  const auto b = run();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("non-finite loss aborts training with a NumericalError") {
  Rng rng(76);
  auto model = std::make_unique<RefNetEstimator>(RefNet::init(8, 4, rng));
  knowledge::Projector proj = knowledge::Projector::init(kNumManners, 8, rng);
  SepTrainer trainer(std::move(model), std::move(proj), TrainConfig{});
  TrainItem item = random_item(rng, 6, 8, kNumManners);
  item.mix_mag(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(trainer.train_step({item}), NumericalError);
}

TEST_CASE("trainer rejects bad hyperparameters") {
  Rng rng(77);
  auto make = [&](TrainConfig cfg) {
    return SepTrainer(std::make_unique<RefNetEstimator>(RefNet::init(4, 2, rng)),
                      knowledge::Projector::init(kNumManners, 4, rng), cfg);
  };
  TrainConfig neg_lr;
  neg_lr.lr = -1e-3;
  CHECK_THROWS_AS(make(neg_lr), ConfigError);
  TrainConfig no_batch;
  no_batch.batch_size = 0;
  CHECK_THROWS_AS(make(no_batch), ConfigError);
  TrainConfig frozen;  // zero learning rate is legal: updates become no-ops
  frozen.lr = 0.0;
  CHECK_NOTHROW(make(frozen));
}

TEST_CASE("an all-pass mask reproduces the mixture through extraction") {
  Rng rng(78);
  AudioClip clip;
  clip.sample_rate = 44100;
  clip.samples.resize(44100);
  for (auto& s : clip.samples) s = rng.uniform(-0.7, 0.7);

  const StftParams sp;
  const std::size_t frames = clip.samples.size() / sp.hop + 1;
  const ConstMask ones(sp.n_fft / 2 + 1, 1.0);
  knowledge::Projector proj = knowledge::Projector::init(kNumManners, sp.n_fft / 2 + 1, rng);
  const MatU8 artic(frames, kNumManners, 0);

  // Short segments force the overlapped stitching path.
  const AudioClip out = extract(ones, proj, clip, artic, sp, 0.4);
  REQUIRE(out.samples.size() == clip.samples.size());
  double max_err = 0.0;
  for (std::size_t i = 0; i < out.samples.size(); ++i)
    max_err = std::max(max_err, std::abs(out.samples[i] - clip.samples[i]));
  CHECK(max_err < 1e-6);
}

TEST_CASE("a half mask halves the signal") {
  Rng rng(79);
  AudioClip clip;
  clip.sample_rate = 44100;
  clip.samples.resize(22050);
  for (auto& s : clip.samples) s = rng.uniform(-0.7, 0.7);
  const StftParams sp;
  const std::size_t frames = clip.samples.size() / sp.hop + 1;
  const ConstMask half(sp.n_fft / 2 + 1, 0.5);
  knowledge::Projector proj = knowledge::Projector::init(kNumManners, sp.n_fft / 2 + 1, rng);
  const AudioClip out =
      extract(half, proj, clip, MatU8(frames, kNumManners, 0), sp, 10.0);
  for (std::size_t i = 0; i < out.samples.size(); ++i)
    CHECK(out.samples[i] == doctest::Approx(0.5 * clip.samples[i]).epsilon(1e-6));
}

TEST_CASE("extraction validates dimensions") {
  Rng rng(80);
  AudioClip clip;
  clip.sample_rate = 44100;
  clip.samples.assign(9000, 0.1);
  const StftParams sp;
  const std::size_t frames = clip.samples.size() / sp.hop + 1;
  knowledge::Projector proj = knowledge::Projector::init(kNumManners, sp.n_fft / 2 + 1, rng);

  const ConstMask wrong_d(64, 1.0);  // model dim != spectrogram bins
  CHECK_THROWS_AS(extract(wrong_d, proj, clip, MatU8(frames, kNumManners, 0), sp, 6.0),
                  ConfigError);
  const ConstMask ok(sp.n_fft / 2 + 1, 1.0);
  CHECK_THROWS_AS(extract(ok, proj, clip, MatU8(frames + 3, kNumManners, 0), sp, 6.0),
                  DataError);
}

TEST_CASE("checkpoint round trip preserves all parameters") {
  testutil::TempDir tmp("ckpt");
  Rng rng(81);
  const RefNet net = RefNet::init(10, 5, rng);
  knowledge::Projector proj = knowledge::Projector::init(kNumManners + 1, 10, rng);
  for (auto& b : proj.b) b = rng.normal();
  const ModelMeta meta{kToolVersion, 42, 7};

  save_checkpoint(tmp.file("m.ckpt"), net, proj, meta);
  const SepCheckpoint back = load_checkpoint(tmp.file("m.ckpt"));
  CHECK(back.net.d == net.d);
  CHECK(back.net.hidden == net.hidden);
  CHECK(back.net.w1 == net.w1);
  CHECK(back.net.b1 == net.b1);
  CHECK(back.net.w2 == net.w2);
  CHECK(back.net.b2 == net.b2);
  CHECK(back.proj.w == proj.w);
  CHECK(back.proj.b == proj.b);
  CHECK(back.meta.config_hash == meta.config_hash);
  CHECK(back.meta.seed == meta.seed);

  {
    std::ofstream f(tmp.file("bad.ckpt"), std::ios::binary);
    f << "garbage";
  }
  CHECK_THROWS_AS(load_checkpoint(tmp.file("bad.ckpt")), DataError);
}

}  // TEST_SUITE
