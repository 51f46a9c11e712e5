#ifndef MVSEARCH_EVALUATION_METRICS_H_
#define MVSEARCH_EVALUATION_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mvsearch/corpus/corpus.h"

namespace mvsearch::evaluation {

// Relevance of `candidate` to `query`; higher ranks earlier. Must be safe
// to call concurrently when Evaluate runs with several threads.
using Scorer =
    std::function<double(const corpus::CorpusEntry& query, const corpus::CorpusEntry& candidate)>;

struct RankingResult {
  std::string query_id;
  std::vector<std::string> ranked_ids;  // best first
  std::vector<double> scores;           // aligned with ranked_ids
  std::size_t frank = 0;                // 1-based position of the correct candidate
};

// Orders candidates by score descending, ties by id ascending. `correct`
// indexes the single correct candidate. NaN scores and duplicate ids are
// contract errors.
RankingResult RankScores(std::string query_id, std::vector<std::string> ids,
                         std::vector<double> scores, std::size_t correct);

// Scores each candidate against the query. The correct candidate is the one
// whose id equals the query's; there must be exactly one.
RankingResult Rank(const corpus::CorpusEntry& query,
                   const std::vector<corpus::CorpusEntry>& candidates, const Scorer& scorer);

double SuccessRateAtK(const std::vector<RankingResult>& results, std::size_t k);
double Mrr(const std::vector<RankingResult>& results);

struct EvalOptions {
  std::size_t distractors = 99;
  bool exhaustive = false;  // distractors = every other entry
  std::vector<std::size_t> ks = {1, 5, 10};
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct MetricsReport {
  std::size_t query_count = 0;
  std::size_t distractors = 0;
  std::uint64_t seed = 0;
  std::map<std::size_t, double> success_rate;
  double mrr = 0.0;
  std::vector<RankingResult> results;  // corpus order

  bool operator==(const MetricsReport& other) const;
};

// Distractor indices for query `index`: `count` distinct indices of other
// entries, drawn uniformly from Rng(MixSeed(seed, index)).
std::vector<std::size_t> SampleDistractors(std::size_t corpus_size, std::size_t index,
                                           std::size_t count, std::uint64_t seed);

// Ranks every entry's own code among sampled distractors. Requires unique
// ids and |corpus| >= D + 1.
MetricsReport Evaluate(const Scorer& scorer, const corpus::Corpus& eval_corpus,
                       const EvalOptions& options);

MetricsReport Summarize(std::vector<RankingResult> results, const std::vector<std::size_t>& ks,
                        std::size_t distractors, std::uint64_t seed);

// One summary record, then one record per query with its ranked list.
// `extra_json` lands under "provenance" in the summary.
std::string SerializeReport(const MetricsReport& report, const std::string& extra_json = "{}");

// "S@1    S@5    S@10   MRR" header and one row, three decimals.
std::string FormatTable(const MetricsReport& report);

}  // namespace mvsearch::evaluation

#endif  // MVSEARCH_EVALUATION_METRICS_H_
