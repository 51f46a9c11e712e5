#include "mvsearch/evaluation/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <unordered_set>

#include "json.hpp"

#include "mvsearch/common/errors.h"
#include "mvsearch/common/hash.h"
#include "mvsearch/common/parallel.h"
#include "mvsearch/common/rng.h"

namespace mvsearch::evaluation {

using corpus::CorpusEntry;
using nlohmann::json;

bool MetricsReport::operator==(const MetricsReport& o) const {
  if (query_count != o.query_count || distractors != o.distractors || seed != o.seed ||
      success_rate != o.success_rate || mrr != o.mrr || results.size() != o.results.size()) {
    return false;
  }
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& a = results[i];
    const auto& b = o.results[i];
    if (a.query_id != b.query_id || a.ranked_ids != b.ranked_ids || a.scores != b.scores ||
        a.frank != b.frank) {
      return false;
    }
  }
  return true;
}

RankingResult RankScores(std::string query_id, std::vector<std::string> ids,
                         std::vector<double> scores, std::size_t correct) {
  MVSEARCH_REQUIRE(ids.size() == scores.size(), "one score per candidate");
  MVSEARCH_REQUIRE(correct < ids.size(), "correct candidate index out of range");
  for (double s : scores) MVSEARCH_REQUIRE(!std::isnan(s), "scorer returned NaN");
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids[a] < ids[b];
  });
  RankingResult r;
  r.query_id = std::move(query_id);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const std::size_t i = order[pos];
    if (pos > 0) {
      MVSEARCH_REQUIRE(ids[i] != r.ranked_ids.back(), "duplicate candidate id " + ids[i]);
    }
    if (i == correct) r.frank = pos + 1;
    r.ranked_ids.push_back(std::move(ids[i]));
    r.scores.push_back(scores[i]);
  }
  return r;
}

RankingResult Rank(const CorpusEntry& query, const std::vector<CorpusEntry>& candidates,
                   const Scorer& scorer) {
  std::size_t correct = candidates.size();
  std::vector<std::string> ids;
  std::vector<double> scores;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].id == query.id) {
      MVSEARCH_REQUIRE(correct == candidates.size(),
                       "query " + query.id + " has more than one correct candidate");
      correct = i;
    }
    ids.push_back(candidates[i].id);
    scores.push_back(scorer(query, candidates[i]));
  }
  MVSEARCH_REQUIRE(correct < candidates.size(), "query " + query.id + " has no correct candidate");
  return RankScores(query.id, std::move(ids), std::move(scores), correct);
}

double SuccessRateAtK(const std::vector<RankingResult>& results, std::size_t k) {
  MVSEARCH_REQUIRE(!results.empty(), "no ranking results");
  MVSEARCH_REQUIRE(k >= 1, "k must be at least 1");
  std::size_t hits = 0;
  for (const auto& r : results) hits += r.frank <= k;
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

double Mrr(const std::vector<RankingResult>& results) {
  MVSEARCH_REQUIRE(!results.empty(), "no ranking results");
  double sum = 0.0;
  for (const auto& r : results) {
    MVSEARCH_REQUIRE(r.frank >= 1, "ranking result without a correct candidate");
    sum += 1.0 / static_cast<double>(r.frank);
  }
  return sum / static_cast<double>(results.size());
}

std::vector<std::size_t> SampleDistractors(std::size_t corpus_size, std::size_t index,
                                           std::size_t count, std::uint64_t seed) {
  MVSEARCH_REQUIRE(index < corpus_size, "query index out of range");
  MVSEARCH_REQUIRE(count + 1 <= corpus_size, "corpus too small for the distractor count");
  // Partial Fisher-Yates over the other entries.
  std::vector<std::size_t> pool;
  pool.reserve(corpus_size - 1);
  for (std::size_t j = 0; j < corpus_size; ++j) {
    if (j != index) pool.push_back(j);
  }
  Rng rng(MixSeed(seed, index));
  for (std::size_t i = 0; i < count; ++i) {
    std::swap(pool[i], pool[i + rng.UniformIndex(pool.size() - i)]);
  }
  pool.resize(count);
  return pool;
}

MetricsReport Summarize(std::vector<RankingResult> results, const std::vector<std::size_t>& ks,
                        std::size_t distractors, std::uint64_t seed) {
  MVSEARCH_REQUIRE(!ks.empty(), "at least one k is required");
  MetricsReport report;
  report.query_count = results.size();
  report.distractors = distractors;
  report.seed = seed;
  for (std::size_t k : ks) report.success_rate[k] = SuccessRateAtK(results, k);
  report.mrr = Mrr(results);
  report.results = std::move(results);
  return report;
}

MetricsReport Evaluate(const Scorer& scorer, const corpus::Corpus& eval_corpus,
                       const EvalOptions& options) {
  const auto& entries = eval_corpus.entries;
  const std::size_t n = entries.size();
  MVSEARCH_REQUIRE(n >= 1, "evaluation corpus is empty");
  const std::size_t d = options.exhaustive ? n - 1 : options.distractors;
  MVSEARCH_REQUIRE(n >= d + 1, "evaluation corpus has " + std::to_string(n) +
                                   " entries; " + std::to_string(d) +
                                   " distractors need at least " + std::to_string(d + 1));
  std::unordered_set<std::string> seen;
  for (const auto& e : entries) {
    MVSEARCH_REQUIRE(seen.insert(e.id).second, "duplicate corpus id " + e.id);
  }
  std::vector<RankingResult> results(n);
  ParallelFor(n, options.threads, [&](std::size_t i) {
    std::vector<CorpusEntry> candidates = {entries[i]};
    for (std::size_t j : SampleDistractors(n, i, d, options.seed)) candidates.push_back(entries[j]);
    results[i] = Rank(entries[i], candidates, scorer);
  });
  return Summarize(std::move(results), options.ks, d, options.seed);
}

std::string SerializeReport(const MetricsReport& report, const std::string& extra_json) {
  json rates = json::object();
  for (const auto& [k, v] : report.success_rate) rates[std::to_string(k)] = v;
  json summary = {{"record", "summary"},
                  {"queries", report.query_count},
                  {"distractors", report.distractors},
                  {"seed", report.seed},
                  {"tie_break", "score descending, then candidate id ascending"},
                  {"success_rate", rates},
                  {"mrr", report.mrr},
                  {"provenance", json::parse(extra_json)}};
  std::string out = summary.dump() + "\n";
  for (const auto& r : report.results) {
    json ranked = json::array();
    for (std::size_t i = 0; i < r.ranked_ids.size(); ++i) {
      ranked.push_back({{"id", r.ranked_ids[i]}, {"score", r.scores[i]}});
    }
    json line = {{"record", "query"}, {"query_id", r.query_id}, {"frank", r.frank},
                 {"ranked", ranked}};
    out += line.dump() + "\n";
  }
  return out;
}

std::string FormatTable(const MetricsReport& report) {
  std::string header;
  std::string row;
  char buf[32];
  for (const auto& [k, v] : report.success_rate) {
    std::snprintf(buf, sizeof buf, "%-7s", ("S@" + std::to_string(k)).c_str());
    header += buf;
    std::snprintf(buf, sizeof buf, "%-7.3f", v);
    row += buf;
  }
  std::snprintf(buf, sizeof buf, "%.3f", report.mrr);
  return header + "MRR\n" + row + buf + "\n";
}

}  // namespace mvsearch::evaluation
