#ifndef MVSEARCH_ENSEMBLE_ENSEMBLE_H_
#define MVSEARCH_ENSEMBLE_ENSEMBLE_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mvsearch/corpus/dataset.h"
#include "mvsearch/encoder/model.h"
#include "mvsearch/encoder/train.h"

namespace mvsearch::ensemble {

// Two affine maps with a rectifier between them: d_total -> hidden -> 2.
struct Mlp {
  std::size_t input = 0;
  std::size_t hidden = 0;
  std::vector<double> w1;  // hidden x input
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // 2 x hidden, row 1 is the match logit
  std::vector<double> b2;  // 2

  std::vector<encoder::TensorView> Tensors();
  std::vector<encoder::TensorView> Tensors() const;
};

struct EnsembleModel {
  // Fixed order, recorded in the artifact; conventionally structure,
  // variable, api.
  std::vector<encoder::EncoderModel> members;
  Mlp mlp;
  bool freeze_members = true;
  std::uint64_t seed = 0;

  std::size_t d_total() const;
};

// member_1.encode || member_2.encode || ..., each member tokenizing with
// its own vocabulary and length limit.
std::vector<double> ConcatHidden(const std::vector<encoder::EncoderModel>& members,
                                 std::string_view query, std::string_view code);

// Hidden width d_total / 2 (at least 1). First layer Glorot-uniform from
// the seed, biases and the output layer zero, so an untrained ensemble
// scores 0.5.
EnsembleModel InitEnsemble(std::vector<encoder::EncoderModel> members, std::uint64_t seed,
                           bool freeze_members = true);

std::array<double, 2> MlpLogits(const Mlp& mlp, const std::vector<double>& input);

double EnsembleScore(const EnsembleModel& model, std::string_view query, std::string_view code);

// Gradient of the mean cross-entropy. Member buffers are filled only when
// the members are not frozen; member classifier heads get no gradient
// because the ensemble never reads them.
struct EnsembleGradient {
  std::vector<std::vector<double>> mlp;  // in Mlp::Tensors() order
  std::vector<encoder::EncoderGradient> members;

  explicit EnsembleGradient(const EnsembleModel& model);
};

double EnsembleBatchLoss(const EnsembleModel& model,
                         const std::vector<corpus::PairExample>& batch,
                         EnsembleGradient* grad);

// Loss over precomputed concatenated features (frozen members).
double MlpBatchLoss(const Mlp& mlp, const std::vector<std::vector<double>>& features,
                    const std::vector<int>& labels, std::vector<std::vector<double>>* grad);

struct EnsembleTrainResult {
  EnsembleModel model;
  std::vector<double> loss_curve;
};

// Trains the MLP (and the member encoders when freeze_members is false)
// on the original, unaugmented pairs. Deterministic given config.seed.
EnsembleTrainResult TrainEnsemble(std::vector<encoder::EncoderModel> members,
                                  const corpus::PerspectiveDataset& dataset,
                                  const encoder::TrainConfig& config,
                                  bool freeze_members = true);

// Layout: manifest.json, mlp.bin (little-endian float32), members/<i>/
// holding each member's encoder artifact. The manifest records member
// order, each member's artifact hash, MLP shapes, the freeze flag and the
// seed.
void SaveEnsemble(const EnsembleModel& model, const std::filesystem::path& dir,
                  const std::vector<double>& loss_curve = {},
                  const std::string& extra_json = "{}");
EnsembleModel LoadEnsemble(const std::filesystem::path& dir);

// SHA-256 of the MLP parameters as float32.
std::string MlpHash(const Mlp& mlp);

}  // namespace mvsearch::ensemble

#endif  // MVSEARCH_ENSEMBLE_ENSEMBLE_H_
