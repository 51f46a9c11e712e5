#include "mvsearch/corpus/dataset.h"

#include "json.hpp"

#include "mvsearch/code_model/method_ast.h"
#include "mvsearch/common/errors.h"
#include "mvsearch/common/hash.h"
#include "mvsearch/common/io.h"
#include "mvsearch/common/parallel.h"
#include "mvsearch/common/rng.h"

namespace mvsearch::corpus {

using nlohmann::json;
using transforms::TransformRecord;

namespace {

// Rejection sampling normally finds a mismatched query within a few draws;
// the scan fallback keeps the draw uniform when admissible partners are
// rare.
constexpr int kRejectionTries = 64;

bool Admissible(const AugmentedEntry& self, const AugmentedEntry& other) {
  return other.origin_id != self.origin_id && other.entry.query != self.entry.query;
}

struct Augmented {
  bool unparseable = false;
  bool keep = true;  // api perspective: passes the filter
  std::vector<std::pair<CorpusEntry, TransformRecord>> copies;
};

json RecordJson(const TransformLogEntry& log) {
  const auto& r = log.record;
  json j = {{"id", log.id},
            {"origin_id", log.origin_id},
            {"kind", std::string(transforms::TransformKindName(r.kind))},
            {"input_sha256", r.input_hash},
            {"output_sha256", Sha256Hex(r.output_source)}};
  if (r.rename) {
    json map = json::array();
    for (const auto& e : r.rename->entries) {
      map.push_back({{"binding", e.binding}, {"from", e.original_name}, {"to", e.fresh_name}});
    }
    j["rename"] = map;
  }
  if (r.swap) {
    j["swap"] = {{"block", r.swap->block}, {"first", r.swap->first}, {"second", r.swap->second}};
  }
  return j;
}

}  // namespace

std::string_view ProvenanceName(Provenance p) {
  switch (p) {
    case Provenance::kOriginal: return "original";
    case Provenance::kRenamed: return "renamed";
    case Provenance::kPermuted: return "permuted";
  }
  return "original";
}

std::string_view PerspectiveName(Perspective p) {
  switch (p) {
    case Perspective::kStructure: return "structure";
    case Perspective::kVariable: return "variable";
    case Perspective::kApi: return "api";
  }
  return "structure";
}

Provenance ParseProvenance(std::string_view name) {
  if (name == "original") return Provenance::kOriginal;
  if (name == "renamed") return Provenance::kRenamed;
  if (name == "permuted") return Provenance::kPermuted;
  throw FormatError("unknown provenance '" + std::string(name) + "'");
}

Perspective ParsePerspective(std::string_view name) {
  if (name == "structure") return Perspective::kStructure;
  if (name == "variable") return Perspective::kVariable;
  if (name == "api") return Perspective::kApi;
  throw ContractError("unknown perspective '" + std::string(name) +
                      "' (expected structure, variable or api)");
}

std::vector<PairExample> PairEntries(const std::vector<AugmentedEntry>& entries,
                                     std::uint64_t seed) {
  MVSEARCH_REQUIRE(entries.size() >= 2, "pairing needs at least two entries");
  Rng rng(seed);
  std::vector<PairExample> out;
  out.reserve(2 * entries.size());
  for (const auto& self : entries) {
    out.push_back({self.entry.id + ":pos", self.entry.query, self.entry.code, 1,
                   self.provenance, self.origin_id});

    const AugmentedEntry* partner = nullptr;
    for (int t = 0; t < kRejectionTries && !partner; ++t) {
      const auto& cand = entries[rng.UniformIndex(entries.size())];
      if (Admissible(self, cand)) partner = &cand;
    }
    if (!partner) {
      std::vector<const AugmentedEntry*> pool;
      for (const auto& cand : entries) {
        if (Admissible(self, cand)) pool.push_back(&cand);
      }
      MVSEARCH_REQUIRE(!pool.empty(),
                       "entry '" + self.entry.id + "' has no mismatched query to pair with");
      partner = pool[rng.UniformIndex(pool.size())];
    }
    out.push_back({self.entry.id + ":neg", partner->entry.query, self.entry.code, 0,
                   self.provenance, self.origin_id});
  }
  return out;
}

std::vector<PairExample> MakePairs(const Corpus& corpus, std::uint64_t seed) {
  std::vector<AugmentedEntry> entries;
  entries.reserve(corpus.size());
  for (const auto& e : corpus.entries) entries.push_back({e, e.id, Provenance::kOriginal});
  return PairEntries(entries, seed);
}

std::string PerspectiveTag(const PerspectiveDataset& dataset) {
  return dataset.perspective ? std::string(PerspectiveName(*dataset.perspective)) : "original";
}

PerspectiveDataset BuildPerspectiveDataset(const Corpus& corpus, Perspective perspective,
                                           std::uint64_t seed,
                                           const AugmentOptions& options) {
  const transforms::ApiCatalog& catalog =
      options.catalog ? *options.catalog : transforms::ApiCatalog::Default();
  const std::uint64_t transform_seed = MixSeed(seed, 0x7065726d75746531ULL);

  std::vector<Augmented> work(corpus.size());
  ParallelFor(corpus.size(), options.threads, [&](std::size_t i) {
    const CorpusEntry& e = corpus.entries[i];
    Augmented& out = work[i];
    if (perspective == Perspective::kApi) {
      // Token-level detection also covers snippets the parser rejects.
      try {
        out.keep = transforms::HasJvmApiInvocation(code_model::TokenizeSource(e.code), catalog)
                       .found;
      } catch (const LexError&) {
        out.unparseable = true;
        out.keep = false;
      }
      return;
    }
    code_model::MethodAst ast;
    try {
      ast = code_model::ParseMethodSource(e.code);
    } catch (const Error&) {
      out.unparseable = true;
      return;
    }
    if (perspective == Perspective::kStructure) {
      auto r = transforms::RenameVariables(ast, options.rename_order);
      if (r.map.IsIdentity()) return;
      out.copies.push_back({{e.id + "~renamed", r.ast.source, e.query}, std::move(r.record)});
    } else {
      auto variants = transforms::PermuteStatements(ast, transform_seed, options.permute);
      for (std::size_t v = 0; v < variants.size(); ++v) {
        std::string id = e.id + "~permuted";
        if (variants.size() > 1) id += "." + std::to_string(v);
        out.copies.push_back({{id, variants[v].ast.source, e.query},
                              std::move(variants[v].record)});
      }
    }
  });

  PerspectiveDataset ds;
  ds.perspective = perspective;
  ds.generation_seed = seed;
  ds.stats.corpus_entries = corpus.size();
  if (perspective == Perspective::kApi) ds.catalog_hash = catalog.Hash();
  const Provenance copy_kind =
      perspective == Perspective::kStructure ? Provenance::kRenamed : Provenance::kPermuted;

  std::vector<AugmentedEntry> entries;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const CorpusEntry& e = corpus.entries[i];
    Augmented& w = work[i];
    ds.stats.unparseable += w.unparseable;
    if (!w.keep) {
      ++ds.stats.filtered_out;
      continue;
    }
    entries.push_back({e, e.id, Provenance::kOriginal});
    if (perspective != Perspective::kApi && !w.unparseable && w.copies.empty()) {
      ++ds.stats.unchanged;
    }
    for (auto& [copy, record] : w.copies) {
      ds.transforms.push_back({copy.id, e.id, std::move(record)});
      entries.push_back({std::move(copy), e.id, copy_kind});
      ++ds.stats.augmented;
    }
  }
  ds.examples = PairEntries(entries, seed);
  ds.stats.positives = ds.stats.negatives = entries.size();
  return ds;
}

PerspectiveDataset BuildOriginalDataset(const Corpus& corpus, std::uint64_t seed) {
  PerspectiveDataset ds;
  ds.generation_seed = seed;
  ds.examples = MakePairs(corpus, seed);
  ds.stats.corpus_entries = corpus.size();
  ds.stats.positives = ds.stats.negatives = corpus.size();
  return ds;
}

std::string SerializeExamples(const PerspectiveDataset& dataset) {
  const std::string tag = PerspectiveTag(dataset);
  std::string out;
  for (const auto& x : dataset.examples) {
    json j = {{"id", x.id},
              {"origin_id", x.origin_id},
              {"query", x.query},
              {"code", x.code},
              {"label", x.label},
              {"provenance", std::string(ProvenanceName(x.provenance))},
              {"perspective", tag}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string SerializeTransformLog(const PerspectiveDataset& dataset) {
  std::string out;
  for (const auto& t : dataset.transforms) {
    out += RecordJson(t).dump();
    out += '\n';
  }
  return out;
}

namespace {

std::filesystem::path Sibling(const std::filesystem::path& path, const std::string& suffix) {
  auto p = path;
  return p.replace_extension(suffix);
}

}  // namespace

std::string WriteDataset(const std::filesystem::path& path, const PerspectiveDataset& dataset,
                         const std::string& extra_manifest_json) {
  const std::string examples = SerializeExamples(dataset);
  const std::string log = SerializeTransformLog(dataset);
  const std::string hash = Sha256Hex(examples);
  const auto& s = dataset.stats;
  json manifest = {
      {"perspective", PerspectiveTag(dataset)},
      {"seed", dataset.generation_seed},
      {"examples_file", path.filename().string()},
      {"examples_sha256", hash},
      {"transforms_sha256", Sha256Hex(log)},
      {"counts",
       {{"corpus_entries", s.corpus_entries},
        {"unparseable", s.unparseable},
        {"unchanged", s.unchanged},
        {"augmented", s.augmented},
        {"filtered_out", s.filtered_out},
        {"positives", s.positives},
        {"negatives", s.negatives}}},
  };
  if (!dataset.catalog_hash.empty()) manifest["catalog_sha256"] = dataset.catalog_hash;
  manifest.update(json::parse(extra_manifest_json));
  WriteFile(path, examples);
  WriteFile(Sibling(path, ".transforms.jsonl"), log);
  WriteFile(Sibling(path, ".manifest.json"), manifest.dump(2) + "\n");
  return hash;
}

PerspectiveDataset ParseExamples(std::string_view text) {
  PerspectiveDataset ds;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool tagged = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      json j = json::parse(line);
      PairExample x;
      x.id = j.at("id").get<std::string>();
      x.origin_id = j.at("origin_id").get<std::string>();
      x.query = j.at("query").get<std::string>();
      x.code = j.at("code").get<std::string>();
      x.label = j.at("label").get<int>();
      x.provenance = ParseProvenance(j.at("provenance").get<std::string>());
      if (x.label != 0 && x.label != 1) throw FormatError("label must be 0 or 1");
      const std::string tag = j.at("perspective").get<std::string>();
      if (!tagged) {
        if (tag != "original") ds.perspective = ParsePerspective(tag);
        tagged = true;
      } else if (tag != PerspectiveTag(ds)) {
        throw FormatError("mixed perspectives in one dataset");
      }
      (x.label ? ds.stats.positives : ds.stats.negatives) += 1;
      ds.examples.push_back(std::move(x));
    } catch (const json::exception& e) {
      throw FormatError("dataset line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw FormatError("dataset line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return ds;
}

PerspectiveDataset ReadDataset(const std::filesystem::path& path) {
  return ParseExamples(ReadFile(path));
}

}  // namespace mvsearch::corpus
