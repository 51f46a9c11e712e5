#ifndef MVSEARCH_CORPUS_DATASET_H_
#define MVSEARCH_CORPUS_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mvsearch/corpus/corpus.h"
#include "mvsearch/transforms/api_catalog.h"
#include "mvsearch/transforms/permute.h"
#include "mvsearch/transforms/rename.h"
#include "mvsearch/transforms/transform_record.h"

namespace mvsearch::corpus {

enum class Provenance { kOriginal, kRenamed, kPermuted };
enum class Perspective { kStructure, kVariable, kApi };

std::string_view ProvenanceName(Provenance p);
std::string_view PerspectiveName(Perspective p);
Provenance ParseProvenance(std::string_view name);
Perspective ParsePerspective(std::string_view name);

struct PairExample {
  std::string id;
  std::string query;
  std::string code;
  int label = 0;  // 1 = matched
  Provenance provenance = Provenance::kOriginal;
  std::string origin_id;
  friend bool operator==(const PairExample&, const PairExample&) = default;
};

// An entry of the (possibly augmented) entry set pairs are drawn from.
struct AugmentedEntry {
  CorpusEntry entry;
  std::string origin_id;
  Provenance provenance = Provenance::kOriginal;
};

// For each entry, in order: its positive, then one negative whose query
// comes from an entry with a different origin and a different query text.
// Throws ContractError with fewer than two entries or when some entry has
// no admissible mismatched query.
std::vector<PairExample> PairEntries(const std::vector<AugmentedEntry>& entries,
                                     std::uint64_t seed);
std::vector<PairExample> MakePairs(const Corpus& corpus, std::uint64_t seed);

struct AugmentOptions {
  const transforms::ApiCatalog* catalog = nullptr;  // null: the default catalog
  transforms::RenameOrder rename_order = transforms::RenameOrder::kLexicographic;
  transforms::PermuteOptions permute;
  unsigned threads = 1;
};

// Per-entry transform log written as the dataset's sidecar.
struct TransformLogEntry {
  std::string id;  // id of the augmented entry
  std::string origin_id;
  transforms::TransformRecord record;
};

struct DatasetStats {
  std::size_t corpus_entries = 0;
  std::size_t unparseable = 0;  // entries the transforms could not read
  std::size_t unchanged = 0;    // identity rename or nothing to permute
  std::size_t augmented = 0;    // transformed copies added
  std::size_t filtered_out = 0; // api perspective: entries without API calls
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

struct PerspectiveDataset {
  // Absent for the plain, unaugmented pair dataset.
  std::optional<Perspective> perspective;
  std::vector<PairExample> examples;
  std::uint64_t generation_seed = 0;
  DatasetStats stats;
  std::vector<TransformLogEntry> transforms;
  std::string catalog_hash;  // api perspective only
};

std::string PerspectiveTag(const PerspectiveDataset& dataset);

PerspectiveDataset BuildPerspectiveDataset(const Corpus& corpus, Perspective perspective,
                                           std::uint64_t seed,
                                           const AugmentOptions& options = {});

// MakePairs wrapped as a dataset with no perspective.
PerspectiveDataset BuildOriginalDataset(const Corpus& corpus, std::uint64_t seed);

// Line-delimited {id, origin_id, query, code, label, provenance,
// perspective} records.
std::string SerializeExamples(const PerspectiveDataset& dataset);
std::string SerializeTransformLog(const PerspectiveDataset& dataset);

// Writes <stem>.jsonl, <stem>.manifest.json and <stem>.transforms.jsonl
// next to `path` (which names the .jsonl file). `extra` is merged into the
// manifest. Returns the SHA-256 of the examples file.
std::string WriteDataset(const std::filesystem::path& path, const PerspectiveDataset& dataset,
                         const std::string& extra_manifest_json = "{}");

// Reads the examples file back. Stats and the transform log are not
// restored.
PerspectiveDataset ReadDataset(const std::filesystem::path& path);
PerspectiveDataset ParseExamples(std::string_view text);

}  // namespace mvsearch::corpus

#endif  // MVSEARCH_CORPUS_DATASET_H_
