#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "mvsearch/common/errors.h"
#include "mvsearch/common/hash.h"
#include "mvsearch/common/rng.h"
#include "mvsearch/evaluation/metrics.h"

namespace cp = mvsearch::corpus;
namespace ev = mvsearch::evaluation;

namespace {

cp::CorpusEntry Entry(const std::string& id) { return {id, "code of " + id, "query of " + id}; }

cp::Corpus MakeCorpus(std::size_t n) {
  cp::Corpus c;
  char buf[16];
  for (std::size_t i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof buf, "e%03zu", i);
    c.entries.push_back(Entry(buf));
  }
  return c;
}

ev::RankingResult WithFrank(std::size_t frank) {
  ev::RankingResult r;
  r.frank = frank;
  return r;
}

// Pure function of the pair, so every evaluation sees the same scores.
double HashScore(const cp::CorpusEntry& q, const cp::CorpusEntry& c) {
  return static_cast<double>(mvsearch::Hash64(q.id + "|" + c.id) % 1000) / 1000.0;
}

double Oracle(const cp::CorpusEntry& q, const cp::CorpusEntry& c) { return q.id == c.id ? 1.0 : 0.0; }

// Independent recomputation: the correct candidate's rank is one plus the
// number of candidates that beat it, counting ties won by a smaller id.
std::size_t BruteFrank(const std::vector<std::string>& ids, const std::vector<double>& scores,
                       std::size_t correct) {
  std::size_t better = 0;
  for (std::size_t j = 0; j < ids.size(); ++j) {
    if (j == correct) continue;
    if (scores[j] > scores[correct] || (scores[j] == scores[correct] && ids[j] < ids[correct])) {
      ++better;
    }
  }
  return better + 1;
}

}  // namespace

TEST_CASE("rank: strict winner, ties by id, contracts") {
  const std::vector<cp::CorpusEntry> cands = {Entry("b"), Entry("a"), Entry("q"), Entry("c")};
  const auto q = Entry("q");
  auto best = ev::Rank(q, cands, Oracle);
  CHECK(best.frank == 1);
  CHECK(best.ranked_ids == std::vector<std::string>{"q", "a", "b", "c"});
  CHECK(best.scores == std::vector<double>{1, 0, 0, 0});

  auto flat = ev::Rank(q, cands, [](const auto&, const auto&) { return 0.25; });
  CHECK(flat.ranked_ids == std::vector<std::string>{"a", "b", "c", "q"});
  CHECK(flat.frank == 4);

  CHECK_THROWS_AS(ev::Rank(Entry("z"), cands, Oracle), mvsearch::ContractError);
  auto twice = cands;
  twice.push_back(Entry("q"));
  CHECK_THROWS_AS(ev::Rank(q, twice, Oracle), mvsearch::ContractError);
  CHECK_THROWS_AS(ev::Rank(q, cands, [](const auto&, const auto&) { return std::nan(""); }),
                  mvsearch::ContractError);
  CHECK_THROWS_AS(ev::RankScores("q", {"a", "a"}, {1.0, 2.0}, 0), mvsearch::ContractError);
}

TEST_CASE("rank: random scorer gives the uniform expected rank") {
  mvsearch::Rng rng(2024);
  std::vector<cp::CorpusEntry> cands;
  for (int i = 0; i < 10; ++i) cands.push_back(Entry("c" + std::to_string(i)));
  const auto q = Entry("c3");
  const int trials = 10000;
  double total = 0.0;
  for (int t = 0; t < trials; ++t) {
    total += static_cast<double>(
        ev::Rank(q, cands, [&](const auto&, const auto&) { return rng.UniformUnit(); }).frank);
  }
  CHECK(std::abs(total / trials - 5.5) <= 0.2);
}

TEST_CASE("metrics: hand-checked franks") {
  const std::vector<ev::RankingResult> r = {WithFrank(1), WithFrank(2), WithFrank(4)};
  CHECK(ev::SuccessRateAtK(r, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(ev::SuccessRateAtK(r, 2) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(ev::SuccessRateAtK(r, 5) == 1.0);
  CHECK(ev::Mrr(r) == doctest::Approx(1.75 / 3.0).epsilon(1e-15));
  CHECK(std::abs(ev::Mrr(r) - 0.58333) < 1e-5);
  CHECK(ev::Mrr({WithFrank(1), WithFrank(1)}) == 1.0);
  CHECK_THROWS_AS(ev::Mrr({}), mvsearch::ContractError);
  CHECK_THROWS_AS(ev::SuccessRateAtK({}, 1), mvsearch::ContractError);
  CHECK_THROWS_AS(ev::SuccessRateAtK(r, 0), mvsearch::ContractError);
}

TEST_CASE("distractors: distinct, exclude the query, seeded") {
  for (std::size_t i : {0u, 7u, 19u}) {
    const auto d = ev::SampleDistractors(20, i, 10, 99);
    CHECK(d.size() == 10);
    std::set<std::size_t> unique(d.begin(), d.end());
    CHECK(unique.size() == 10);
    CHECK(unique.count(i) == 0);
    CHECK(*unique.rbegin() < 20);
    CHECK(d == ev::SampleDistractors(20, i, 10, 99));
  }
  CHECK(ev::SampleDistractors(20, 0, 10, 1) != ev::SampleDistractors(20, 0, 10, 2));
  CHECK_THROWS_AS(ev::SampleDistractors(10, 0, 10, 0), mvsearch::ContractError);

  // Each other entry is drawn with probability D / (n - 1).
  std::vector<int> hits(8, 0);
  const int rounds = 20000;
  for (int s = 0; s < rounds; ++s) {
    for (std::size_t j : ev::SampleDistractors(8, 0, 3, static_cast<std::uint64_t>(s))) ++hits[j];
  }
  CHECK(hits[0] == 0);
  for (std::size_t j = 1; j < 8; ++j) {
    CHECK(std::abs(hits[j] / static_cast<double>(rounds) - 3.0 / 7.0) < 0.02);
  }
}

TEST_CASE("evaluate: oracle scorer, exhaustive mode and contracts") {
  const auto corpus = MakeCorpus(30);
  ev::EvalOptions opt;
  opt.distractors = 9;
  const auto perfect = ev::Evaluate(Oracle, corpus, opt);
  CHECK(perfect.query_count == 30);
  CHECK(perfect.success_rate.at(1) == 1.0);
  CHECK(perfect.mrr == 1.0);
  for (const auto& r : perfect.results) CHECK(r.ranked_ids.size() == 10);
  CHECK(ev::FormatTable(perfect) == "S@1    S@5    S@10   MRR\n1.000  1.000  1.000  1.000\n");

  opt.exhaustive = true;
  const auto all = ev::Evaluate(HashScore, corpus, opt);
  CHECK(all.distractors == 29);
  for (const auto& r : all.results) {
    std::vector<std::string> sorted = r.ranked_ids;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::string> expect;
    for (const auto& e : corpus.entries) expect.push_back(e.id);
    CHECK(sorted == expect);
  }
  CHECK(all.success_rate.at(1) <= all.mrr);

  opt.exhaustive = false;
  opt.distractors = 30;
  CHECK_THROWS_AS(ev::Evaluate(Oracle, corpus, opt), mvsearch::ContractError);
  auto dup = MakeCorpus(5);
  dup.entries.push_back(dup.entries.front());
  opt.distractors = 3;
  CHECK_THROWS_AS(ev::Evaluate(Oracle, dup, opt), mvsearch::ContractError);
}

TEST_CASE("evaluate: deterministic across repeats and thread counts") {
  const auto corpus = MakeCorpus(200);
  ev::EvalOptions opt;
  opt.distractors = 49;
  opt.seed = 5;
  const auto a = ev::Evaluate(HashScore, corpus, opt);
  const auto b = ev::Evaluate(HashScore, corpus, opt);
  opt.threads = 4;
  const auto c = ev::Evaluate(HashScore, corpus, opt);
  CHECK(a == b);
  CHECK(a == c);
  CHECK(ev::SerializeReport(a) == ev::SerializeReport(c));
  opt.seed = 6;
  CHECK_FALSE(ev::Evaluate(HashScore, corpus, opt) == a);
}

TEST_CASE("evaluate: matches a brute-force recomputation from raw scores") {
  const auto corpus = MakeCorpus(200);
  ev::EvalOptions opt;
  opt.distractors = 49;
  opt.seed = 77;
  const auto report = ev::Evaluate(HashScore, corpus, opt);
  double rr = 0.0;
  std::map<std::size_t, double> hits;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& q = corpus.entries[i];
    std::vector<std::string> ids = {q.id};
    std::vector<double> scores = {HashScore(q, q)};
    for (std::size_t j : ev::SampleDistractors(corpus.size(), i, 49, 77)) {
      ids.push_back(corpus.entries[j].id);
      scores.push_back(HashScore(q, corpus.entries[j]));
    }
    const std::size_t f = BruteFrank(ids, scores, 0);
    CHECK(report.results[i].frank == f);
    rr += 1.0 / static_cast<double>(f);
    for (std::size_t k : {1, 5, 10}) hits[k] += f <= k ? 1.0 : 0.0;
  }
  CHECK(std::abs(report.mrr - rr / 200.0) <= 1e-12);
  for (std::size_t k : {1, 5, 10}) CHECK(std::abs(report.success_rate.at(k) - hits[k] / 200.0) <= 1e-12);
}

TEST_CASE("property: random small instances against brute force, bounds, order invariance") {
  mvsearch::Rng rng(31337);
  for (int instance = 0; instance < 200; ++instance) {
    const std::size_t queries = 1 + rng.UniformIndex(20);
    const std::size_t d = rng.UniformIndex(11);
    std::vector<ev::RankingResult> results;
    std::vector<ev::RankingResult> squashed;
    std::vector<std::size_t> franks;
    for (std::size_t q = 0; q < queries; ++q) {
      std::vector<std::string> ids;
      std::vector<double> scores;
      for (std::size_t j = 0; j <= d; ++j) {
        ids.push_back("c" + std::to_string(j));
        // Coarse scores so ties actually occur.
        scores.push_back(static_cast<double>(rng.UniformIndex(4)));
      }
      const std::size_t correct = rng.UniformIndex(d + 1);
      franks.push_back(BruteFrank(ids, scores, correct));
      std::vector<double> moved;
      for (double s : scores) moved.push_back(std::exp(3.0 * s) - 7.0);
      results.push_back(ev::RankScores("q", ids, scores, correct));
      squashed.push_back(ev::RankScores("q", ids, moved, correct));
      CHECK(results.back().ranked_ids == squashed.back().ranked_ids);
      CHECK(results.back().frank == franks.back());
    }
    const auto report = ev::Summarize(results, {1, 2, 3, 5, 10, d + 1}, d, 0);
    double mrr = 0.0;
    for (std::size_t f : franks) mrr += 1.0 / static_cast<double>(f);
    CHECK(std::abs(report.mrr - mrr / static_cast<double>(queries)) <= 1e-12);
    double prev = 0.0;
    for (const auto& [k, v] : report.success_rate) {
      std::size_t hit = 0;
      for (std::size_t f : franks) hit += f <= k;
      CHECK(std::abs(v - hit / static_cast<double>(queries)) <= 1e-12);
      CHECK(v >= prev);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      prev = v;
    }
    CHECK(report.success_rate.at(d + 1) == 1.0);
    CHECK(report.mrr >= report.success_rate.at(1));
    CHECK(report.mrr <= 1.0);
    CHECK(ev::Mrr(squashed) == report.mrr);
  }
}

TEST_CASE("report: summary line, per-query lines, table") {
  const auto corpus = MakeCorpus(12);
  ev::EvalOptions opt;
  opt.distractors = 5;
  opt.ks = {1, 5, 10};
  const auto report = ev::Evaluate(HashScore, corpus, opt);
  const auto text = ev::SerializeReport(report, R"({"scorer":"hash"})");
  std::vector<nlohmann::json> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    lines.push_back(nlohmann::json::parse(text.substr(start, end - start)));
    start = end + 1;
  }
  REQUIRE(lines.size() == 13);
  CHECK(lines[0].at("record") == "summary");
  CHECK(lines[0].at("mrr").get<double>() == report.mrr);
  CHECK(lines[0].at("success_rate").at("5").get<double>() == report.success_rate.at(5));
  CHECK(lines[0].at("provenance").at("scorer") == "hash");
  CHECK(lines[0].at("distractors") == 5);
  CHECK(lines[1].at("query_id") == "e000");
  CHECK(lines[1].at("ranked").size() == 6);
  CHECK(lines[1].at("frank") == report.results[0].frank);

  const auto table = ev::FormatTable(report);
  CHECK(table.rfind("S@1    S@5    S@10   MRR\n", 0) == 0);
  char mrr[16];
  std::snprintf(mrr, sizeof mrr, "%.3f\n", report.mrr);
  CHECK(table.size() >= 6);
  CHECK(table.substr(table.size() - 6) == mrr);
}
