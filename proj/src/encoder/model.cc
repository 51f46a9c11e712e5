#include "mvsearch/encoder/model.h"

#include <algorithm>
#include <cmath>

#include "mvsearch/common/errors.h"
#include "mvsearch/common/hash.h"
#include "mvsearch/common/rng.h"
#include "mvsearch/common/tensor_io.h"

namespace mvsearch::encoder {

namespace {

constexpr double kInitRange = 0.05;

const double* Row(const EncoderModel& m, int token) {
  return m.embedding.data() + static_cast<std::size_t>(token) * m.dim();
}

// Pools positions [lo, hi) of the sequence. PAD positions are skipped;
// `weights` receives the per-position pooling weight (0 for PAD).
std::vector<double> Pool(const std::vector<int>& seq, std::size_t lo, std::size_t hi,
                         const EncoderModel& m, std::vector<double>& weights) {
  const std::size_t d = m.dim();
  weights.assign(hi - lo, 0.0);
  std::vector<double> out(d, 0.0);
  std::size_t live = 0;
  for (std::size_t t = lo; t < hi; ++t) live += seq[t] != ModelVocab::kPad;
  if (live == 0) return out;

  if (m.config.pooling == Pooling::kMean) {
    for (std::size_t t = lo; t < hi; ++t) {
      if (seq[t] != ModelVocab::kPad) weights[t - lo] = 1.0 / static_cast<double>(live);
    }
  } else {
    double top = -INFINITY;
    std::vector<double> score(hi - lo, 0.0);
    for (std::size_t t = lo; t < hi; ++t) {
      if (seq[t] == ModelVocab::kPad) continue;
      const double* e = Row(m, seq[t]);
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += e[k] * m.attention[k];
      score[t - lo] = s;
      top = std::max(top, s);
    }
    double z = 0.0;
    for (std::size_t t = lo; t < hi; ++t) {
      if (seq[t] == ModelVocab::kPad) continue;
      weights[t - lo] = std::exp(score[t - lo] - top);
      z += weights[t - lo];
    }
    for (double& w : weights) w /= z;
  }
  for (std::size_t t = lo; t < hi; ++t) {
    const double w = weights[t - lo];
    if (w == 0.0) continue;
    const double* e = Row(m, seq[t]);
    for (std::size_t k = 0; k < d; ++k) out[k] += w * e[k];
  }
  return out;
}

void PoolBackward(const std::vector<int>& seq, std::size_t lo, std::size_t hi,
                  const std::vector<double>& weights, const std::vector<double>& d_pooled,
                  const EncoderModel& m, EncoderGradient& g) {
  const std::size_t d = m.dim();
  if (m.config.pooling == Pooling::kMean) {
    for (std::size_t t = lo; t < hi; ++t) {
      const double w = weights[t - lo];
      if (w == 0.0) continue;
      double* ge = g.embedding.data() + static_cast<std::size_t>(seq[t]) * d;
      for (std::size_t k = 0; k < d; ++k) ge[k] += w * d_pooled[k];
    }
    return;
  }
  // p = sum_t a_t e_t with a = softmax(s), s_t = e_t . q.
  std::vector<double> d_weight(hi - lo, 0.0);
  double mean = 0.0;
  for (std::size_t t = lo; t < hi; ++t) {
    if (seq[t] == ModelVocab::kPad) continue;
    const double* e = Row(m, seq[t]);
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) s += d_pooled[k] * e[k];
    d_weight[t - lo] = s;
    mean += weights[t - lo] * s;
  }
  for (std::size_t t = lo; t < hi; ++t) {
    if (seq[t] == ModelVocab::kPad) continue;
    const double a = weights[t - lo];
    const double d_score = a * (d_weight[t - lo] - mean);
    const double* e = Row(m, seq[t]);
    double* ge = g.embedding.data() + static_cast<std::size_t>(seq[t]) * d;
    for (std::size_t k = 0; k < d; ++k) {
      ge[k] += a * d_pooled[k] + d_score * m.attention[k];
      g.attention[k] += d_score * e[k];
    }
  }
}

}  // namespace

std::string_view PoolingName(Pooling p) { return p == Pooling::kMean ? "mean" : "attention"; }

std::string_view InteractionName(Interaction i) {
  return i == Interaction::kProduct ? "product" : "none";
}

Pooling ParsePooling(std::string_view name) {
  if (name == "mean") return Pooling::kMean;
  if (name == "attention") return Pooling::kAttention;
  throw ContractError("unknown pooling '" + std::string(name) + "' (expected mean or attention)");
}

Interaction ParseInteraction(std::string_view name) {
  if (name == "product") return Interaction::kProduct;
  if (name == "none") return Interaction::kNone;
  throw ContractError("unknown interaction '" + std::string(name) +
                      "' (expected product or none)");
}

std::vector<TensorView> EncoderModel::Tensors() {
  std::vector<TensorView> out;
  out.push_back({"embedding", {vocab.size(), dim()}, &embedding});
  if (config.pooling == Pooling::kAttention) out.push_back({"attention", {dim()}, &attention});
  out.push_back({"head.weight", {2, dim()}, &head_weight});
  out.push_back({"head.bias", {2}, &head_bias});
  return out;
}

std::vector<TensorView> EncoderModel::Tensors() const {
  return const_cast<EncoderModel*>(this)->Tensors();
}

EncoderModel InitModel(ModelVocab vocab, const EncoderConfig& config, std::string perspective,
                       std::uint64_t seed) {
  MVSEARCH_REQUIRE(config.hidden_dim > 0, "hidden_dim must be positive");
  MVSEARCH_REQUIRE(config.max_length >= 2, "max_length must be at least 2");
  EncoderModel m;
  m.vocab = std::move(vocab);
  m.config = config;
  m.perspective = std::move(perspective);
  m.seed = seed;
  const std::size_t d = config.hidden_dim;
  Rng rng(MixSeed(seed, 0x656d626564ULL));
  m.embedding.resize(m.vocab.size() * d);
  for (double& x : m.embedding) x = rng.Uniform(-kInitRange, kInitRange);
  if (config.pooling == Pooling::kAttention) m.attention.assign(d, 0.0);
  m.head_weight.assign(2 * d, 0.0);
  m.head_bias.assign(2, 0.0);
  RoundToFloat(m);
  return m;
}

void ValidateModel(const EncoderModel& model) {
  MVSEARCH_REQUIRE(model.dim() > 0, "hidden_dim must be positive");
  MVSEARCH_REQUIRE(model.vocab.size() >= ModelVocab::kNumSpecials, "vocabulary lacks specials");
  MVSEARCH_REQUIRE(model.attention.empty() == (model.config.pooling == Pooling::kMean),
                   "attention vector does not match the pooling mode");
  for (const auto& t : model.Tensors()) {
    std::size_t n = 1;
    for (std::size_t s : t.shape) n *= s;
    MVSEARCH_REQUIRE(t.values->size() == n, "tensor " + t.name + " has the wrong size");
    for (double v : *t.values) {
      MVSEARCH_REQUIRE(std::isfinite(v), "tensor " + t.name + " has a non-finite entry");
    }
  }
}

void RoundToFloat(EncoderModel& model) {
  for (auto& t : model.Tensors()) {
    for (double& v : *t.values) v = static_cast<float>(v);
  }
}

std::string ParameterHash(const EncoderModel& model) {
  std::string bytes;
  for (const auto& t : model.Tensors()) AppendFloat32(bytes, *t.values);
  return Sha256Hex(bytes);
}

EncodeCache EncodeWithCache(const std::vector<int>& sequence, const EncoderModel& m) {
  MVSEARCH_REQUIRE(!sequence.empty(), "cannot encode an empty sequence");
  for (int id : sequence) {
    MVSEARCH_REQUIRE(id >= 0 && static_cast<std::size_t>(id) < m.vocab.size(),
                     "token index outside the vocabulary");
  }
  EncodeCache c;
  c.sequence = sequence;
  const auto sep = std::find(sequence.begin(), sequence.end(), ModelVocab::kSep);
  const bool product = m.config.interaction == Interaction::kProduct && sep != sequence.end();
  c.split = product ? static_cast<std::size_t>(sep - sequence.begin()) : sequence.size();
  c.pooled_query = Pool(sequence, 0, c.split, m, c.weights_query);
  if (product) {
    c.pooled_code = Pool(sequence, c.split, sequence.size(), m, c.weights_code);
    c.hidden.resize(m.dim());
    for (std::size_t k = 0; k < m.dim(); ++k) c.hidden[k] = c.pooled_query[k] * c.pooled_code[k];
  } else {
    c.hidden = c.pooled_query;
  }
  return c;
}

std::vector<double> Encode(const std::vector<int>& sequence, const EncoderModel& model) {
  return EncodeWithCache(sequence, model).hidden;
}

std::array<double, 2> HeadLogits(const std::vector<double>& hidden, const EncoderModel& m) {
  MVSEARCH_REQUIRE(hidden.size() == m.dim(), "hidden vector has the wrong length");
  std::array<double, 2> z = {m.head_bias[0], m.head_bias[1]};
  for (std::size_t k = 0; k < m.dim(); ++k) {
    z[0] += m.head_weight[k] * hidden[k];
    z[1] += m.head_weight[m.dim() + k] * hidden[k];
  }
  return z;
}

double MatchProbability(double negative_logit, double positive_logit) {
  const double diff = positive_logit - negative_logit;
  if (diff >= 0) return 1.0 / (1.0 + std::exp(-diff));
  const double e = std::exp(diff);
  return e / (1.0 + e);
}

double Classify(const std::vector<double>& hidden, const EncoderModel& model) {
  const auto z = HeadLogits(hidden, model);
  return MatchProbability(z[0], z[1]);
}

double Score(const EncoderModel& model, std::string_view query, std::string_view code) {
  return Classify(Encode(ModelTokenize(query, code, model.vocab, model.config.max_length), model),
                  model);
}

EncoderGradient::EncoderGradient(const EncoderModel& m)
    : embedding(m.embedding.size(), 0.0),
      attention(m.attention.size(), 0.0),
      head_weight(m.head_weight.size(), 0.0),
      head_bias(m.head_bias.size(), 0.0) {}

std::vector<std::vector<double>*> EncoderGradient::Buffers() {
  std::vector<std::vector<double>*> out = {&embedding};
  if (!attention.empty()) out.push_back(&attention);
  out.push_back(&head_weight);
  out.push_back(&head_bias);
  return out;
}

void BackwardFromHidden(const EncodeCache& c, const std::vector<double>& d_hidden,
                        const EncoderModel& m, EncoderGradient& g) {
  if (c.pooled_code.empty()) {
    PoolBackward(c.sequence, 0, c.split, c.weights_query, d_hidden, m, g);
    return;
  }
  const std::size_t d = m.dim();
  std::vector<double> dq(d);
  std::vector<double> dc(d);
  for (std::size_t k = 0; k < d; ++k) {
    dq[k] = d_hidden[k] * c.pooled_code[k];
    dc[k] = d_hidden[k] * c.pooled_query[k];
  }
  PoolBackward(c.sequence, 0, c.split, c.weights_query, dq, m, g);
  PoolBackward(c.sequence, c.split, c.sequence.size(), c.weights_code, dc, m, g);
}

double BatchLoss(const EncoderModel& m, const std::vector<std::vector<int>>& sequences,
                 const std::vector<int>& labels, EncoderGradient* grad, bool head_only) {
  MVSEARCH_REQUIRE(!sequences.empty() && sequences.size() == labels.size(),
                   "batch must be non-empty with one label per sequence");
  const std::size_t d = m.dim();
  const double scale = 1.0 / static_cast<double>(sequences.size());
  double total = 0.0;
  std::vector<double> dh(d);
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    const EncodeCache c = EncodeWithCache(sequences[i], m);
    const auto z = HeadLogits(c.hidden, m);
    const double top = std::max(z[0], z[1]);
    const double lse = top + std::log(std::exp(z[0] - top) + std::exp(z[1] - top));
    const int y = labels[i];
    MVSEARCH_REQUIRE(y == 0 || y == 1, "labels must be 0 or 1");
    total += lse - z[static_cast<std::size_t>(y)];
    if (!grad) continue;
    const double p1 = MatchProbability(z[0], z[1]);
    const std::array<double, 2> dz = {scale * ((1.0 - p1) - (y == 0)),
                                      scale * (p1 - (y == 1))};
    for (std::size_t r = 0; r < 2; ++r) {
      grad->head_bias[r] += dz[r];
      for (std::size_t k = 0; k < d; ++k) grad->head_weight[r * d + k] += dz[r] * c.hidden[k];
    }
    if (head_only) continue;
    for (std::size_t k = 0; k < d; ++k) {
      dh[k] = dz[0] * m.head_weight[k] + dz[1] * m.head_weight[d + k];
    }
    BackwardFromHidden(c, dh, m, *grad);
  }
  return total * scale;
}

}  // namespace mvsearch::encoder
