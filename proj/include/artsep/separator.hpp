#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "artsep/audio.hpp"
#include "artsep/common.hpp"
#include "artsep/knowledge.hpp"
#include "artsep/matrix.hpp"
#include "artsep/rng.hpp"
#include "artsep/stft.hpp"

namespace artsep {

// Pluggable mask estimator: any frame-major network that maps fused N x d
// features to an N x d mask in (0, 1) and can backpropagate exactly.
class MaskEstimator {
 public:
  virtual ~MaskEstimator() = default;
  virtual std::size_t feature_dim() const = 0;
  virtual MatD forward(const MatD& fused) const = 0;
  // Returns dL/dfused and appends dL/dparam (in params() order) to grads.
  virtual MatD backward(const MatD& fused, const MatD& dmask,
                        std::vector<double>& grads) const = 0;
  virtual std::vector<std::span<double>> params() = 0;
  virtual std::size_t param_count() const = 0;
};

// Frame-wise two-layer network: d -> hidden with tanh, hidden -> d with a
// logistic output so the mask always lies in (0, 1).
struct RefNet {
  std::size_t d = 0;
  std::size_t hidden = 256;
  MatD w1;                  // d x hidden
  std::vector<double> b1;   // hidden
  MatD w2;                  // hidden x d
  std::vector<double> b2;   // d

  static RefNet init(std::size_t d, std::size_t hidden, Rng& rng);
};

MatD refnet_forward(const RefNet& net, const MatD& fused);

namespace ref {
// Serial reference implementation, kept for testing the OpenMP kernel.
MatD refnet_forward(const RefNet& net, const MatD& fused);
}  // namespace ref

class RefNetEstimator : public MaskEstimator {
 public:
  explicit RefNetEstimator(RefNet net) : net_(std::move(net)) {}

  std::size_t feature_dim() const override { return net_.d; }
  MatD forward(const MatD& fused) const override { return refnet_forward(net_, fused); }
  MatD backward(const MatD& fused, const MatD& dmask,
                std::vector<double>& grads) const override;
  std::vector<std::span<double>> params() override;
  std::size_t param_count() const override;

  const RefNet& net() const { return net_; }
  RefNet& net() { return net_; }

 private:
  RefNet net_;
};

// Mean absolute error over all bins.
double mag_l1_loss(const MatD& estimate_mag, const MatD& target_mag);

struct TrainConfig {
  double chunk_seconds = 6.0;
  int batch_size = 4;
  int steps = 300;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 17;
};

// One training example: spectra of a mixture chunk and its speech target,
// plus the chunk's class-indicator matrix on the same frame grid.
struct TrainItem {
  MatD mix_mag;
  MatU8 artic;
  MatD target_mag;
};

// Loss over a batch plus exact gradients for the model parameters followed by
// the projector parameters (W row-major, then bias). Estimate magnitude is
// mask * mix_mag; loss is the mean over every bin in the batch.
double sep_loss_and_grads(const MaskEstimator& model, const knowledge::Projector& proj,
                          const std::vector<TrainItem>& batch, std::vector<double>& grads);

// Adam over a flat parameter vector exposed as spans.
class Adam {
 public:
  Adam(std::size_t n, const TrainConfig& cfg)
      : lr_(cfg.lr), b1_(cfg.beta1), b2_(cfg.beta2), eps_(cfg.eps), m_(n, 0.0), v_(n, 0.0) {}

  void update(const std::vector<std::span<double>>& params, const std::vector<double>& grads);

 private:
  double lr_, b1_, b2_, eps_;
  long t_ = 0;
  std::vector<double> m_, v_;
};

// Joint trainer for the mask estimator and the projector.
class SepTrainer {
 public:
  SepTrainer(std::unique_ptr<MaskEstimator> model, knowledge::Projector proj, TrainConfig cfg);

  // One Adam update from exact batch gradients; returns the pre-update loss.
  double train_step(const std::vector<TrainItem>& batch);

  MaskEstimator& model() { return *model_; }
  const MaskEstimator& model() const { return *model_; }
  const knowledge::Projector& proj() const { return proj_; }
  knowledge::Projector& proj() { return proj_; }
  const TrainConfig& config() const { return cfg_; }

 private:
  std::unique_ptr<MaskEstimator> model_;
  knowledge::Projector proj_;
  TrainConfig cfg_;
  Adam adam_;
  long step_ = 0;
};

// Full-utterance inference: mask the complex mixture spectrum and invert.
// Long inputs are processed in chunk-sized frame segments with 50% overlap
// and a triangular cross-fade on the mask.
AudioClip extract(const MaskEstimator& model, const knowledge::Projector& proj,
                  const AudioClip& mixture, const MatU8& artic,
                  const StftParams& stft_params = {}, double chunk_seconds = 6.0);

// Versioned binary checkpoint ("ASEP", f64 little-endian parameters).
void save_checkpoint(const std::string& path, const RefNet& net,
                     const knowledge::Projector& proj, const ModelMeta& meta);

struct SepCheckpoint {
  RefNet net;
  knowledge::Projector proj;
  ModelMeta meta;
};

SepCheckpoint load_checkpoint(const std::string& path);

}  // namespace artsep
