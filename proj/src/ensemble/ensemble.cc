#include "mvsearch/ensemble/ensemble.h"

#include <cmath>

#include "json.hpp"

#include "mvsearch/common/errors.h"
#include "mvsearch/common/hash.h"
#include "mvsearch/common/io.h"
#include "mvsearch/common/rng.h"
#include "mvsearch/common/tensor_io.h"
#include "mvsearch/encoder/artifact.h"
#include "mvsearch/encoder/vocab.h"

namespace mvsearch::ensemble {

using encoder::EncoderModel;
using encoder::TensorView;
using nlohmann::json;

namespace {

constexpr const char* kFormat = "mvsearch-ensemble/1";

struct MlpState {
  std::vector<double> pre;  // first-layer pre-activations
  std::vector<double> act;  // rectified
  std::array<double, 2> logits{};
};

MlpState Forward(const Mlp& m, const std::vector<double>& x) {
  MVSEARCH_REQUIRE(x.size() == m.input, "MLP input has the wrong length");
  MlpState s;
  s.pre.assign(m.b1.begin(), m.b1.end());
  s.act.resize(m.hidden);
  for (std::size_t j = 0; j < m.hidden; ++j) {
    const double* w = m.w1.data() + j * m.input;
    double v = s.pre[j];
    for (std::size_t k = 0; k < m.input; ++k) v += w[k] * x[k];
    s.pre[j] = v;
    s.act[j] = v > 0 ? v : 0.0;
  }
  for (std::size_t r = 0; r < 2; ++r) {
    double v = m.b2[r];
    for (std::size_t j = 0; j < m.hidden; ++j) v += m.w2[r * m.hidden + j] * s.act[j];
    s.logits[r] = v;
  }
  return s;
}

// Cross-entropy of one example; accumulates scaled gradients into `g`
// (Mlp::Tensors order) and, when `d_input` is non-null, the input gradient.
double Backward(const Mlp& m, const std::vector<double>& x, const MlpState& s, int y,
                double scale, std::vector<std::vector<double>>* g, std::vector<double>* d_input) {
  MVSEARCH_REQUIRE(y == 0 || y == 1, "labels must be 0 or 1");
  const auto& z = s.logits;
  const double top = std::max(z[0], z[1]);
  const double loss = top + std::log(std::exp(z[0] - top) + std::exp(z[1] - top)) -
                      z[static_cast<std::size_t>(y)];
  if (!g) return loss;
  const double p1 = encoder::MatchProbability(z[0], z[1]);
  const std::array<double, 2> dz = {scale * ((1.0 - p1) - (y == 0)), scale * (p1 - (y == 1))};
  auto& gw1 = (*g)[0];
  auto& gb1 = (*g)[1];
  auto& gw2 = (*g)[2];
  auto& gb2 = (*g)[3];
  std::vector<double> d_pre(m.hidden, 0.0);
  for (std::size_t r = 0; r < 2; ++r) {
    gb2[r] += dz[r];
    for (std::size_t j = 0; j < m.hidden; ++j) {
      gw2[r * m.hidden + j] += dz[r] * s.act[j];
      d_pre[j] += dz[r] * m.w2[r * m.hidden + j];
    }
  }
  if (d_input) d_input->assign(m.input, 0.0);
  for (std::size_t j = 0; j < m.hidden; ++j) {
    if (s.pre[j] <= 0) continue;
    const double dp = d_pre[j];
    gb1[j] += dp;
    double* gw = gw1.data() + j * m.input;
    const double* w = m.w1.data() + j * m.input;
    for (std::size_t k = 0; k < m.input; ++k) {
      gw[k] += dp * x[k];
      if (d_input) (*d_input)[k] += dp * w[k];
    }
  }
  return loss;
}

std::vector<std::vector<double>> ZeroLike(const Mlp& m) {
  std::vector<std::vector<double>> out;
  for (const auto& t : m.Tensors()) out.emplace_back(t.values->size(), 0.0);
  return out;
}

bool AllFinite(const std::vector<std::vector<double>*>& buffers) {
  for (const auto* b : buffers) {
    for (double v : *b) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

std::vector<int> Sequence(const EncoderModel& m, std::string_view query, std::string_view code) {
  return encoder::ModelTokenize(query, code, m.vocab, m.config.max_length);
}

}  // namespace

std::vector<TensorView> Mlp::Tensors() {
  return {{"mlp.w1", {hidden, input}, &w1},
          {"mlp.b1", {hidden}, &b1},
          {"mlp.w2", {2, hidden}, &w2},
          {"mlp.b2", {2}, &b2}};
}

std::vector<TensorView> Mlp::Tensors() const { return const_cast<Mlp*>(this)->Tensors(); }

std::size_t EnsembleModel::d_total() const {
  std::size_t d = 0;
  for (const auto& m : members) d += m.dim();
  return d;
}

std::vector<double> ConcatHidden(const std::vector<EncoderModel>& members, std::string_view query,
                                 std::string_view code) {
  MVSEARCH_REQUIRE(!members.empty(), "an ensemble needs at least one member");
  std::vector<double> out;
  for (const auto& m : members) {
    const auto h = encoder::Encode(Sequence(m, query, code), m);
    out.insert(out.end(), h.begin(), h.end());
  }
  return out;
}

EnsembleModel InitEnsemble(std::vector<EncoderModel> members, std::uint64_t seed,
                           bool freeze_members) {
  MVSEARCH_REQUIRE(!members.empty(), "an ensemble needs at least one member");
  EnsembleModel e;
  e.members = std::move(members);
  e.freeze_members = freeze_members;
  e.seed = seed;
  Mlp& m = e.mlp;
  m.input = e.d_total();
  m.hidden = std::max<std::size_t>(1, m.input / 2);
  const double bound = std::sqrt(6.0 / static_cast<double>(m.input + m.hidden));
  Rng rng(MixSeed(seed, 0x6d6c70ULL));
  m.w1.resize(m.hidden * m.input);
  for (double& w : m.w1) w = static_cast<float>(rng.Uniform(-bound, bound));
  m.b1.assign(m.hidden, 0.0);
  m.w2.assign(2 * m.hidden, 0.0);
  m.b2.assign(2, 0.0);
  return e;
}

std::array<double, 2> MlpLogits(const Mlp& mlp, const std::vector<double>& input) {
  return Forward(mlp, input).logits;
}

double EnsembleScore(const EnsembleModel& model, std::string_view query, std::string_view code) {
  const auto z = MlpLogits(model.mlp, ConcatHidden(model.members, query, code));
  return encoder::MatchProbability(z[0], z[1]);
}

EnsembleGradient::EnsembleGradient(const EnsembleModel& model) : mlp(ZeroLike(model.mlp)) {
  if (!model.freeze_members) {
    for (const auto& m : model.members) members.emplace_back(m);
  }
}

double MlpBatchLoss(const Mlp& mlp, const std::vector<std::vector<double>>& features,
                    const std::vector<int>& labels, std::vector<std::vector<double>>* grad) {
  MVSEARCH_REQUIRE(!features.empty() && features.size() == labels.size(),
                   "batch must be non-empty with one label per example");
  const double scale = 1.0 / static_cast<double>(features.size());
  double total = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    total += Backward(mlp, features[i], Forward(mlp, features[i]), labels[i], scale, grad, nullptr);
  }
  return total * scale;
}

double EnsembleBatchLoss(const EnsembleModel& model, const std::vector<corpus::PairExample>& batch,
                         EnsembleGradient* grad) {
  MVSEARCH_REQUIRE(!batch.empty(), "batch must be non-empty");
  const double scale = 1.0 / static_cast<double>(batch.size());
  const bool into_members = grad && !model.freeze_members;
  double total = 0.0;
  std::vector<double> d_input;
  for (const auto& x : batch) {
    std::vector<encoder::EncodeCache> caches;
    std::vector<double> features;
    for (const auto& m : model.members) {
      caches.push_back(encoder::EncodeWithCache(Sequence(m, x.query, x.code), m));
      features.insert(features.end(), caches.back().hidden.begin(), caches.back().hidden.end());
    }
    const MlpState s = Forward(model.mlp, features);
    total += Backward(model.mlp, features, s, x.label, scale, grad ? &grad->mlp : nullptr,
                      into_members ? &d_input : nullptr);
    if (!into_members) continue;
    std::size_t offset = 0;
    for (std::size_t i = 0; i < model.members.size(); ++i) {
      const std::size_t d = model.members[i].dim();
      std::vector<double> dh(d_input.begin() + static_cast<long>(offset),
                             d_input.begin() + static_cast<long>(offset + d));
      encoder::BackwardFromHidden(caches[i], dh, model.members[i], grad->members[i]);
      offset += d;
    }
  }
  return total * scale;
}

EnsembleTrainResult TrainEnsemble(std::vector<EncoderModel> members,
                                  const corpus::PerspectiveDataset& dataset,
                                  const encoder::TrainConfig& config, bool freeze_members) {
  encoder::ValidateTrainConfig(config);
  const auto& xs = dataset.examples;
  std::size_t pos = 0;
  for (const auto& x : xs) pos += x.label == 1;
  MVSEARCH_REQUIRE(!xs.empty() && 2 * pos == xs.size(), "training data must be 1:1 balanced");

  EnsembleTrainResult r;
  r.model = InitEnsemble(std::move(members), config.seed, freeze_members);
  EnsembleModel& model = r.model;

  std::vector<std::vector<double>*> params;
  for (auto& t : model.mlp.Tensors()) params.push_back(t.values);
  if (!freeze_members) {
    for (auto& m : model.members) {
      params.push_back(&m.embedding);
      if (!m.attention.empty()) params.push_back(&m.attention);
    }
  }
  encoder::Optimizer opt(config.optimizer, config.learning_rate, params);
  encoder::BatchSchedule schedule(xs.size(), config.batch_size, config.seed);

  // Frozen members make the features constant; compute them once.
  std::vector<std::vector<double>> features;
  std::vector<int> labels;
  if (freeze_members) {
    for (const auto& x : xs) {
      features.push_back(ConcatHidden(model.members, x.query, x.code));
      labels.push_back(x.label);
    }
  }

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double total = 0.0;
    for (const auto& batch : schedule.NextEpoch()) {
      EnsembleGradient grad(model);
      double loss;
      if (freeze_members) {
        std::vector<std::vector<double>> f;
        std::vector<int> y;
        for (std::size_t i : batch) {
          f.push_back(features[i]);
          y.push_back(labels[i]);
        }
        loss = MlpBatchLoss(model.mlp, f, y, &grad.mlp);
      } else {
        std::vector<corpus::PairExample> b;
        for (std::size_t i : batch) b.push_back(xs[i]);
        loss = EnsembleBatchLoss(model, b, &grad);
      }
      std::vector<std::vector<double>*> grads;
      for (auto& g : grad.mlp) grads.push_back(&g);
      for (auto& g : grad.members) {
        grads.push_back(&g.embedding);
        if (!g.attention.empty()) grads.push_back(&g.attention);
      }
      if (!std::isfinite(loss) || !AllFinite(grads)) {
        throw DivergenceError("ensemble training diverged at epoch " +
                              std::to_string(epoch + 1) + ": non-finite loss or gradient");
      }
      encoder::ClipGradients(grads, config.clip_norm);
      opt.Step(grads);
      total += loss * static_cast<double>(batch.size());
    }
    r.loss_curve.push_back(total / static_cast<double>(xs.size()));
    if (!AllFinite(params)) {
      throw DivergenceError("ensemble training diverged at epoch " + std::to_string(epoch + 1) +
                            ": non-finite parameters");
    }
  }
  for (auto& t : model.mlp.Tensors()) {
    for (double& v : *t.values) v = static_cast<float>(v);
  }
  if (!freeze_members) {
    for (auto& m : model.members) encoder::RoundToFloat(m);
  }
  return r;
}

std::string MlpHash(const Mlp& mlp) {
  std::string bytes;
  for (const auto& t : mlp.Tensors()) AppendFloat32(bytes, *t.values);
  return Sha256Hex(bytes);
}

void SaveEnsemble(const EnsembleModel& model, const std::filesystem::path& dir,
                  const std::vector<double>& loss_curve, const std::string& extra_json) {
  MVSEARCH_REQUIRE(model.mlp.input == model.d_total(), "MLP input does not match the members");
  json members = json::array();
  for (std::size_t i = 0; i < model.members.size(); ++i) {
    const std::string sub = "members/" + std::to_string(i);
    encoder::SaveEncoder(model.members[i], dir / sub);
    members.push_back({{"index", i},
                       {"perspective", model.members[i].perspective},
                       {"path", sub},
                       {"hidden_dim", model.members[i].dim()},
                       {"artifact_sha256", encoder::ArtifactHash(dir / sub)}});
  }
  std::string bytes;
  json table = json::array();
  std::size_t offset = 0;
  for (const auto& t : model.mlp.Tensors()) {
    AppendFloat32(bytes, *t.values);
    table.push_back({{"name", t.name}, {"shape", t.shape}, {"offset", offset}});
    offset += t.values->size();
  }
  json manifest = {{"format", kFormat},
                   {"members", members},
                   {"d_total", model.d_total()},
                   {"mlp",
                    {{"input", model.mlp.input},
                     {"hidden", model.mlp.hidden},
                     {"nonlinearity", "relu"},
                     {"layers", 2}}},
                   {"tensors", table},
                   {"tensors_sha256", Sha256Hex(bytes)},
                   {"freeze_members", model.freeze_members},
                   {"seed", model.seed},
                   {"training", json::parse(extra_json)}};
  if (!loss_curve.empty()) manifest["loss_curve"] = loss_curve;
  WriteFile(dir / "mlp.bin", bytes);
  WriteFile(dir / "manifest.json", manifest.dump(2) + "\n");
}

EnsembleModel LoadEnsemble(const std::filesystem::path& dir) {
  json m;
  try {
    m = json::parse(ReadFile(dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw FormatError("ensemble manifest in " + dir.string() + ": " + e.what());
  }
  try {
    if (m.at("format") != kFormat) throw FormatError(dir.string() + " is not an ensemble artifact");
    EnsembleModel e;
    for (const auto& entry : m.at("members")) {
      const auto sub = dir / entry.at("path").get<std::string>();
      if (encoder::ArtifactHash(sub) != entry.at("artifact_sha256").get<std::string>()) {
        throw FormatError("member " + sub.string() + " does not match its recorded hash");
      }
      e.members.push_back(encoder::LoadEncoder(sub));
      if (e.members.back().perspective != entry.at("perspective").get<std::string>()) {
        throw FormatError("member " + sub.string() + " has the wrong perspective");
      }
    }
    e.freeze_members = m.at("freeze_members").get<bool>();
    e.seed = m.at("seed").get<std::uint64_t>();
    e.mlp.input = m.at("mlp").at("input").get<std::size_t>();
    e.mlp.hidden = m.at("mlp").at("hidden").get<std::size_t>();
    if (e.mlp.input != e.d_total() || m.at("d_total").get<std::size_t>() != e.d_total()) {
      throw FormatError("MLP input width does not match the members");
    }
    const std::string bytes = ReadFile(dir / "mlp.bin");
    if (Sha256Hex(bytes) != m.at("tensors_sha256").get<std::string>()) {
      throw FormatError("mlp.bin does not match its manifest hash in " + dir.string());
    }
    const auto flat = ReadFloat32(bytes);
    std::size_t used = 0;
    for (auto& t : e.mlp.Tensors()) {
      std::size_t n = 1;
      for (std::size_t s : t.shape) n *= s;
      if (used + n > flat.size()) throw FormatError("mlp.bin is too short");
      t.values->assign(flat.begin() + static_cast<long>(used),
                       flat.begin() + static_cast<long>(used + n));
      used += n;
    }
    if (used != flat.size()) throw FormatError("mlp.bin has trailing data");
    return e;
  } catch (const json::exception& ex) {
    throw FormatError("ensemble manifest in " + dir.string() + ": " + ex.what());
  }
}

}  // namespace mvsearch::ensemble
