#ifndef MVSEARCH_ENCODER_TRAIN_H_
#define MVSEARCH_ENCODER_TRAIN_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mvsearch/common/rng.h"
#include "mvsearch/corpus/dataset.h"
#include "mvsearch/encoder/model.h"

namespace mvsearch::encoder {

enum class OptimizerKind { kGradientDescent, kAdam };

std::string_view OptimizerName(OptimizerKind kind);
OptimizerKind ParseOptimizer(std::string_view name);

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  int epochs = 10;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double clip_norm = 5.0;  // global gradient norm cap; 0 disables
  std::uint64_t seed = 0;
  bool head_only = false;  // freeze embeddings and attention
};

// Throws ContractError on a non-positive learning rate, batch size or
// epoch count, or a negative clip norm.
void ValidateTrainConfig(const TrainConfig& config);

// JSON object text describing the config, for manifests.
std::string TrainConfigJson(const TrainConfig& config);

// Plain gradient descent or Adam (beta 0.9/0.999, eps 1e-8) over a fixed
// list of parameter buffers.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate,
            const std::vector<std::vector<double>*>& params);

  void Step(const std::vector<std::vector<double>*>& grads);

 private:
  OptimizerKind kind_;
  double lr_;
  std::vector<std::vector<double>*> params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  long step_ = 0;
};

// Scales the buffers so their joint L2 norm is at most max_norm (0 leaves
// them alone). Returns the norm before scaling.
double ClipGradients(const std::vector<std::vector<double>*>& grads, double max_norm);

// Seeded minibatch order: a fresh shuffle of [0, n) per epoch.
class BatchSchedule {
 public:
  BatchSchedule(std::size_t n, std::size_t batch_size, std::uint64_t seed);
  // Batches of the next epoch.
  std::vector<std::vector<std::size_t>> NextEpoch();

 private:
  std::vector<std::size_t> order_;
  std::size_t batch_size_;
  Rng rng_;
};

// Trains `model` in place; returns the per-epoch mean training loss.
// Throws DivergenceError when a loss or gradient turns non-finite.
std::vector<double> Fit(EncoderModel& model, const std::vector<corpus::PairExample>& examples,
                        const TrainConfig& config);

struct TrainResult {
  EncoderModel model;
  std::vector<double> loss_curve;
};

// Builds the vocabulary, initializes from config.seed, fits, and rounds
// the parameters to float32. The dataset must be 1:1 balanced.
TrainResult TrainEncoder(const corpus::PerspectiveDataset& dataset,
                         const EncoderConfig& encoder_config, const TrainConfig& config);

}  // namespace mvsearch::encoder

#endif  // MVSEARCH_ENCODER_TRAIN_H_
