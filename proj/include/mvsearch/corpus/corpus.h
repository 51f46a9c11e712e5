#ifndef MVSEARCH_CORPUS_CORPUS_H_
#define MVSEARCH_CORPUS_CORPUS_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mvsearch::corpus {

struct CorpusEntry {
  std::string id;
  std::string code;
  std::string query;
  friend bool operator==(const CorpusEntry&, const CorpusEntry&) = default;
};

struct Corpus {
  std::vector<CorpusEntry> entries;
  std::size_t size() const { return entries.size(); }
};

struct IngestReport {
  std::size_t lines = 0;  // non-blank input lines
  std::size_t accepted = 0;
  // Reason -> count. Reasons: "invalid-json", "not-an-object",
  // "missing-code", "missing-query", "empty-code", "empty-query",
  // "duplicate-id".
  std::map<std::string, std::size_t> skipped;
  // The first few problems, as "line N: reason".
  std::vector<std::string> samples;

  std::size_t skip_count() const;
};

struct IngestResult {
  Corpus corpus;
  IngestReport report;
};

// Reads line-delimited JSON records carrying `code` and `docstring` (or
// `query`). The id is taken from `id`, else `url`, else "line-N". Files
// ending in .gz are decompressed on the fly. Throws IngestError when no
// record survives and IoError when the file cannot be read.
IngestResult Ingest(const std::filesystem::path& path);
IngestResult IngestText(std::string_view text);

// One {"id","code","docstring"} record per line; Ingest reads it back.
std::string SerializeCorpus(const Corpus& corpus);

// Hash of the serialized corpus.
std::string CorpusHash(const Corpus& corpus);

// Partitions into train/valid/test. Ratios must be non-negative and sum to
// 1 within 1e-9. Valid and test sizes are floor(n * ratio); train takes the
// remainder. Each part keeps input order.
std::array<Corpus, 3> Split(const Corpus& corpus, const std::array<double, 3>& ratios,
                            std::uint64_t seed);

}  // namespace mvsearch::corpus

#endif  // MVSEARCH_CORPUS_CORPUS_H_
