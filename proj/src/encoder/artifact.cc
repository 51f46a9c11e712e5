#include "mvsearch/encoder/artifact.h"

#include <cstdio>

#include "json.hpp"

#include "mvsearch/common/errors.h"
#include "mvsearch/common/hash.h"
#include "mvsearch/common/io.h"
#include "mvsearch/common/tensor_io.h"

namespace mvsearch::encoder {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "mvsearch-encoder/1";

std::string CurveTsv(const std::vector<double>& curve) {
  std::string out = "epoch\tloss\n";
  char buf[64];
  for (std::size_t i = 0; i < curve.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu\t%.17g\n", i + 1, curve[i]);
    out += buf;
  }
  return out;
}

}  // namespace

void SaveEncoder(const EncoderModel& model, const std::filesystem::path& dir,
                 const std::vector<double>& loss_curve, const std::string& extra_json) {
  ValidateModel(model);
  const std::string vocab = model.vocab.Serialize();
  std::string tensors;
  json table = json::array();
  std::size_t offset = 0;
  for (const auto& t : model.Tensors()) {
    AppendFloat32(tensors, *t.values);
    table.push_back({{"name", t.name}, {"shape", t.shape}, {"offset", offset}});
    offset += t.values->size();
  }
  const auto& c = model.config;
  json manifest = {
      {"format", kFormat},
      {"perspective", model.perspective},
      {"seed", model.seed},
      {"hidden_dim", c.hidden_dim},
      {"pooling", std::string(PoolingName(c.pooling))},
      {"interaction", std::string(InteractionName(c.interaction))},
      // The pair embedding is the pooled hidden vector, not a first-token
      // state.
      {"pair_embedding", "pooled"},
      {"max_length", c.max_length},
      {"min_frequency", c.min_frequency == ModelVocab::kNoMinimum
                            ? json(nullptr)
                            : json(c.min_frequency)},
      {"vocab_size", model.vocab.size()},
      {"vocab_sha256", Sha256Hex(vocab)},
      {"tensors", table},
      {"tensors_sha256", Sha256Hex(tensors)},
      {"training", json::parse(extra_json)},
  };
  if (!loss_curve.empty()) manifest["loss_curve"] = loss_curve;
  WriteFile(dir / "vocab.txt", vocab);
  WriteFile(dir / "tensors.bin", tensors);
  if (!loss_curve.empty()) WriteFile(dir / "loss_curve.tsv", CurveTsv(loss_curve));
  WriteFile(dir / "manifest.json", manifest.dump(2) + "\n");
}

EncoderModel LoadEncoder(const std::filesystem::path& dir) {
  json m;
  try {
    m = json::parse(ReadFile(dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw FormatError("encoder manifest in " + dir.string() + ": " + e.what());
  }
  try {
    if (m.at("format") != kFormat) {
      throw FormatError(dir.string() + " is not an encoder artifact");
    }
    const std::string vocab_text = ReadFile(dir / "vocab.txt");
    const std::string tensor_bytes = ReadFile(dir / "tensors.bin");
    if (Sha256Hex(vocab_text) != m.at("vocab_sha256").get<std::string>()) {
      throw FormatError("vocab.txt does not match its manifest hash in " + dir.string());
    }
    if (Sha256Hex(tensor_bytes) != m.at("tensors_sha256").get<std::string>()) {
      throw FormatError("tensors.bin does not match its manifest hash in " + dir.string());
    }
    EncoderConfig c;
    c.hidden_dim = m.at("hidden_dim").get<std::size_t>();
    c.pooling = ParsePooling(m.at("pooling").get<std::string>());
    c.interaction = ParseInteraction(m.at("interaction").get<std::string>());
    c.max_length = m.at("max_length").get<std::size_t>();
    c.min_frequency = m.at("min_frequency").is_null() ? ModelVocab::kNoMinimum
                                                      : m.at("min_frequency").get<std::size_t>();
    EncoderModel model;
    model.vocab = ModelVocab::Parse(vocab_text, c.min_frequency);
    model.config = c;
    model.perspective = m.at("perspective").get<std::string>();
    model.seed = m.at("seed").get<std::uint64_t>();
    if (c.pooling == Pooling::kAttention) model.attention.resize(c.hidden_dim);
    const std::vector<double> flat = ReadFloat32(tensor_bytes);
    std::size_t used = 0;
    const auto table = m.at("tensors");
    auto views = model.Tensors();
    if (table.size() != views.size()) throw FormatError("tensor table does not match the model");
    for (std::size_t i = 0; i < views.size(); ++i) {
      if (table[i].at("name") != views[i].name ||
          table[i].at("shape").get<std::vector<std::size_t>>() != views[i].shape) {
        throw FormatError("tensor " + views[i].name + " has an unexpected name or shape");
      }
      std::size_t n = 1;
      for (std::size_t s : views[i].shape) n *= s;
      if (table[i].at("offset").get<std::size_t>() != used || used + n > flat.size()) {
        throw FormatError("tensor " + views[i].name + " lies outside tensors.bin");
      }
      views[i].values->assign(flat.begin() + static_cast<long>(used),
                              flat.begin() + static_cast<long>(used + n));
      used += n;
    }
    if (used != flat.size()) throw FormatError("tensors.bin has trailing data");
    ValidateModel(model);
    return model;
  } catch (const json::exception& e) {
    throw FormatError("encoder manifest in " + dir.string() + ": " + e.what());
  } catch (const ContractError& e) {
    throw FormatError("encoder artifact in " + dir.string() + ": " + e.what());
  }
}

std::string ArtifactHash(const std::filesystem::path& dir) {
  return Sha256Hex(ReadFile(dir / "manifest.json"));
}

}  // namespace mvsearch::encoder
