#include "mvsearch/encoder/train.h"

#include <cmath>
#include <numeric>

#include "json.hpp"

#include "mvsearch/common/errors.h"
#include "mvsearch/common/hash.h"

namespace mvsearch::encoder {

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEpsilon = 1e-8;

bool AllFinite(const std::vector<std::vector<double>*>& buffers) {
  for (const auto* b : buffers) {
    for (double v : *b) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

}  // namespace

std::string_view OptimizerName(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "sgd";
}

OptimizerKind ParseOptimizer(std::string_view name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "sgd" || name == "gd") return OptimizerKind::kGradientDescent;
  throw ContractError("unknown optimizer '" + std::string(name) + "' (expected adam or sgd)");
}

void ValidateTrainConfig(const TrainConfig& c) {
  MVSEARCH_REQUIRE(std::isfinite(c.learning_rate) && c.learning_rate > 0,
                   "learning rate must be positive");
  MVSEARCH_REQUIRE(c.epochs >= 1, "epochs must be at least 1");
  MVSEARCH_REQUIRE(c.batch_size >= 1, "batch size must be at least 1");
  MVSEARCH_REQUIRE(std::isfinite(c.clip_norm) && c.clip_norm >= 0,
                   "clip norm must be non-negative");
}

std::string TrainConfigJson(const TrainConfig& c) {
  return nlohmann::json{{"learning_rate", c.learning_rate},
                        {"batch_size", c.batch_size},
                        {"epochs", c.epochs},
                        {"optimizer", std::string(OptimizerName(c.optimizer))},
                        {"clip_norm", c.clip_norm},
                        {"seed", c.seed},
                        {"head_only", c.head_only}}
      .dump();
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate,
                     const std::vector<std::vector<double>*>& params)
    : kind_(kind), lr_(learning_rate), params_(params) {
  if (kind_ == OptimizerKind::kAdam) {
    for (const auto* p : params_) {
      m_.emplace_back(p->size(), 0.0);
      v_.emplace_back(p->size(), 0.0);
    }
  }
}

void Optimizer::Step(const std::vector<std::vector<double>*>& grads) {
  MVSEARCH_REQUIRE(grads.size() == params_.size(), "gradient list does not match parameters");
  ++step_;
  if (kind_ == OptimizerKind::kGradientDescent) {
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& p = *params_[i];
      const auto& g = *grads[i];
      for (std::size_t k = 0; k < p.size(); ++k) p[k] -= lr_ * g[k];
    }
    return;
  }
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = *params_[i];
    const auto& g = *grads[i];
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = kBeta1 * m[k] + (1 - kBeta1) * g[k];
      v[k] = kBeta2 * v[k] + (1 - kBeta2) * g[k] * g[k];
      p[k] -= lr_ * (m[k] / c1) / (std::sqrt(v[k] / c2) + kEpsilon);
    }
  }
}

double ClipGradients(const std::vector<std::vector<double>*>& grads, double max_norm) {
  double sq = 0.0;
  for (const auto* g : grads) {
    for (double v : *g) sq += v * v;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (auto* g : grads) {
      for (double& v : *g) v *= s;
    }
  }
  return norm;
}

BatchSchedule::BatchSchedule(std::size_t n, std::size_t batch_size, std::uint64_t seed)
    : order_(n), batch_size_(batch_size), rng_(MixSeed(seed, 0x6261746368ULL)) {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
}

std::vector<std::vector<std::size_t>> BatchSchedule::NextEpoch() {
  rng_.Shuffle(order_);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < order_.size(); i += batch_size_) {
    const std::size_t end = std::min(order_.size(), i + batch_size_);
    out.emplace_back(order_.begin() + static_cast<long>(i), order_.begin() + static_cast<long>(end));
  }
  return out;
}

std::vector<double> Fit(EncoderModel& model, const std::vector<corpus::PairExample>& examples,
                        const TrainConfig& config) {
  ValidateTrainConfig(config);
  MVSEARCH_REQUIRE(!examples.empty(), "training needs at least one example");
  std::vector<std::vector<int>> sequences;
  std::vector<int> labels;
  sequences.reserve(examples.size());
  for (const auto& x : examples) {
    sequences.push_back(ModelTokenize(x.query, x.code, model.vocab, model.config.max_length));
    labels.push_back(x.label);
  }

  std::vector<std::vector<double>*> params;
  if (!config.head_only) {
    params.push_back(&model.embedding);
    if (!model.attention.empty()) params.push_back(&model.attention);
  }
  params.push_back(&model.head_weight);
  params.push_back(&model.head_bias);
  Optimizer opt(config.optimizer, config.learning_rate, params);
  BatchSchedule schedule(examples.size(), config.batch_size, config.seed);

  std::vector<double> curve;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double total = 0.0;
    for (const auto& batch : schedule.NextEpoch()) {
      std::vector<std::vector<int>> seqs;
      std::vector<int> ys;
      for (std::size_t i : batch) {
        seqs.push_back(sequences[i]);
        ys.push_back(labels[i]);
      }
      EncoderGradient grad(model);
      const double loss = BatchLoss(model, seqs, ys, &grad, config.head_only);
      std::vector<std::vector<double>*> grads;
      if (!config.head_only) {
        grads.push_back(&grad.embedding);
        if (!grad.attention.empty()) grads.push_back(&grad.attention);
      }
      grads.push_back(&grad.head_weight);
      grads.push_back(&grad.head_bias);
      if (!std::isfinite(loss) || !AllFinite(grads)) {
        throw DivergenceError("training diverged at epoch " + std::to_string(epoch + 1) +
                              ": non-finite loss or gradient");
      }
      ClipGradients(grads, config.clip_norm);
      opt.Step(grads);
      total += loss * static_cast<double>(batch.size());
    }
    curve.push_back(total / static_cast<double>(examples.size()));
    if (!AllFinite(params)) {
      throw DivergenceError("training diverged at epoch " + std::to_string(epoch + 1) +
                            ": non-finite parameters");
    }
  }
  return curve;
}

TrainResult TrainEncoder(const corpus::PerspectiveDataset& dataset,
                         const EncoderConfig& encoder_config, const TrainConfig& config) {
  ValidateTrainConfig(config);
  std::size_t pos = 0;
  for (const auto& x : dataset.examples) pos += x.label == 1;
  MVSEARCH_REQUIRE(!dataset.examples.empty() && 2 * pos == dataset.examples.size(),
                   "training data must be 1:1 balanced");
  TrainResult r;
  r.model = InitModel(BuildVocab(dataset.examples, encoder_config.min_frequency), encoder_config,
                      corpus::PerspectiveTag(dataset), config.seed);
  r.loss_curve = Fit(r.model, dataset.examples, config);
  RoundToFloat(r.model);
  return r;
}

}  // namespace mvsearch::encoder
