#ifndef MVSEARCH_ENCODER_MODEL_H_
#define MVSEARCH_ENCODER_MODEL_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mvsearch/encoder/vocab.h"

namespace mvsearch::encoder {

enum class Pooling { kMean, kAttention };

// How the pooled sequence becomes the hidden vector.
//  kProduct: pool [BOS] query and [SEP] code separately and multiply
//    elementwise, so the head sees query/code agreement per dimension.
//  kNone: pool the whole sequence.
// A sequence without SEP is pooled whole under either setting.
enum class Interaction { kNone, kProduct };

std::string_view PoolingName(Pooling p);
std::string_view InteractionName(Interaction i);
Pooling ParsePooling(std::string_view name);
Interaction ParseInteraction(std::string_view name);

struct EncoderConfig {
  std::size_t hidden_dim = 128;
  Pooling pooling = Pooling::kMean;
  Interaction interaction = Interaction::kProduct;
  std::size_t max_length = 256;
  std::size_t min_frequency = 2;
};

// A named parameter tensor, row-major.
struct TensorView {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double>* values;
};

struct EncoderModel {
  ModelVocab vocab;
  EncoderConfig config;
  std::string perspective;  // "structure", "variable", "api" or "original"
  std::uint64_t seed = 0;

  std::vector<double> embedding;    // |V| x d
  std::vector<double> attention;    // d; empty under mean pooling
  std::vector<double> head_weight;  // 2 x d, row 1 is the match logit
  std::vector<double> head_bias;    // 2

  std::size_t dim() const { return config.hidden_dim; }
  // Tensors in a fixed order: embedding, [attention], head.weight,
  // head.bias.
  std::vector<TensorView> Tensors();
  std::vector<TensorView> Tensors() const;
};

// Embeddings uniform in [-0.05, 0.05] from `seed`; attention scores and
// head zero, so an untrained model scores exactly 0.5.
EncoderModel InitModel(ModelVocab vocab, const EncoderConfig& config,
                       std::string perspective, std::uint64_t seed);

// Throws ContractError when a tensor has the wrong size or a non-finite
// entry.
void ValidateModel(const EncoderModel& model);

// Rounds every parameter to the nearest float32, the on-disk precision.
void RoundToFloat(EncoderModel& model);

// SHA-256 of the float32 little-endian parameter bytes.
std::string ParameterHash(const EncoderModel& model);

std::vector<double> Encode(const std::vector<int>& sequence, const EncoderModel& model);

std::array<double, 2> HeadLogits(const std::vector<double>& hidden, const EncoderModel& model);

// Positive-class softmax probability of two logits, computed stably.
double MatchProbability(double negative_logit, double positive_logit);

double Classify(const std::vector<double>& hidden, const EncoderModel& model);

double Score(const EncoderModel& model, std::string_view query, std::string_view code);

// --- training support -------------------------------------------------------

// Per-example forward state needed by the backward pass.
struct EncodeCache {
  std::vector<int> sequence;
  std::size_t split = 0;  // index of SEP, or sequence.size() without product
  std::vector<double> pooled_query;  // or the whole-sequence pooling
  std::vector<double> pooled_code;   // empty without product
  std::vector<double> weights_query;  // attention weights per position
  std::vector<double> weights_code;
  std::vector<double> hidden;
};

EncodeCache EncodeWithCache(const std::vector<int>& sequence, const EncoderModel& model);

// Gradient buffers shaped like EncoderModel's tensors.
struct EncoderGradient {
  std::vector<double> embedding;
  std::vector<double> attention;
  std::vector<double> head_weight;
  std::vector<double> head_bias;

  explicit EncoderGradient(const EncoderModel& model);
  std::vector<std::vector<double>*> Buffers();
};

// Accumulates d(loss)/d(parameters) for a hidden-vector gradient into
// `grad` (encoder part only; the head is not touched).
void BackwardFromHidden(const EncodeCache& cache, const std::vector<double>& d_hidden,
                        const EncoderModel& model, EncoderGradient& grad);

// Mean cross-entropy over the batch; when `grad` is non-null, adds the
// gradient of that mean. `head_only` skips encoder gradients.
double BatchLoss(const EncoderModel& model, const std::vector<std::vector<int>>& sequences,
                 const std::vector<int>& labels, EncoderGradient* grad,
                 bool head_only = false);

}  // namespace mvsearch::encoder

#endif  // MVSEARCH_ENCODER_MODEL_H_
