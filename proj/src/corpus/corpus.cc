#include "mvsearch/corpus/corpus.h"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "json.hpp"

#include "mvsearch/common/errors.h"
#include "mvsearch/common/hash.h"
#include "mvsearch/common/io.h"
#include "mvsearch/common/rng.h"

namespace mvsearch::corpus {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxSamples = 20;

bool BlankAfterTrim(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  });
}

std::string ReadGzip(const std::filesystem::path& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (!f) throw IoError("cannot open " + path.string());
  std::string out;
  char buf[1 << 16];
  int n;
  while ((n = gzread(f, buf, sizeof buf)) > 0) out.append(buf, static_cast<std::size_t>(n));
  const bool failed = n < 0;
  gzclose(f);
  if (failed) throw IoError("corrupt gzip stream in " + path.string());
  return out;
}

}  // namespace

std::size_t IngestReport::skip_count() const {
  std::size_t n = 0;
  for (const auto& [reason, count] : skipped) n += count;
  return n;
}

IngestResult IngestText(std::string_view text) {
  IngestResult result;
  auto& report = result.report;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  auto skip = [&](const std::string& reason) {
    ++report.skipped[reason];
    if (report.samples.size() < kMaxSamples) {
      report.samples.push_back("line " + std::to_string(line_no) + ": " + reason);
    }
  };
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (BlankAfterTrim(line)) continue;
    ++report.lines;

    json record = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (record.is_discarded()) {
      skip("invalid-json");
      continue;
    }
    if (!record.is_object()) {
      skip("not-an-object");
      continue;
    }
    auto text_field = [&](std::initializer_list<const char*> keys) -> const json* {
      for (const char* k : keys) {
        auto it = record.find(k);
        if (it != record.end() && it->is_string()) return &*it;
      }
      return nullptr;
    };
    const json* code = text_field({"code"});
    const json* query = text_field({"docstring", "query"});
    if (!code) {
      skip("missing-code");
      continue;
    }
    if (!query) {
      skip("missing-query");
      continue;
    }
    CorpusEntry entry;
    entry.code = code->get<std::string>();
    entry.query = query->get<std::string>();
    if (BlankAfterTrim(entry.code)) {
      skip("empty-code");
      continue;
    }
    if (BlankAfterTrim(entry.query)) {
      skip("empty-query");
      continue;
    }
    if (const json* id = text_field({"id"}); id && !id->get<std::string>().empty()) {
      entry.id = id->get<std::string>();
      if (seen.count(entry.id)) {
        skip("duplicate-id");
        continue;
      }
    } else {
      // Derived ids are not the author's claim of identity, so a collision
      // gets a suffix instead of dropping the record.
      const json* url = text_field({"url"});
      std::string base =
          url && !url->get<std::string>().empty() ? url->get<std::string>()
                                                  : "line-" + std::to_string(line_no);
      entry.id = base;
      for (int k = 2; seen.count(entry.id); ++k) entry.id = base + "#" + std::to_string(k);
    }
    seen.insert(entry.id);
    result.corpus.entries.push_back(std::move(entry));
  }
  report.accepted = result.corpus.size();
  if (result.corpus.entries.empty()) {
    throw IngestError("no valid records (" + std::to_string(report.lines) + " lines, " +
                      std::to_string(report.skip_count()) + " skipped)");
  }
  return result;
}

IngestResult Ingest(const std::filesystem::path& path) {
  if (path.extension() == ".gz") return IngestText(ReadGzip(path));
  return IngestText(ReadFile(path));
}

std::string SerializeCorpus(const Corpus& corpus) {
  std::string out;
  for (const auto& e : corpus.entries) {
    json j = {{"id", e.id}, {"code", e.code}, {"docstring", e.query}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string CorpusHash(const Corpus& corpus) { return Sha256Hex(SerializeCorpus(corpus)); }

std::array<Corpus, 3> Split(const Corpus& corpus, const std::array<double, 3>& ratios,
                            std::uint64_t seed) {
  for (double r : ratios) {
    MVSEARCH_REQUIRE(std::isfinite(r) && r >= 0.0, "split ratios must be non-negative");
  }
  MVSEARCH_REQUIRE(std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) <= 1e-9,
                   "split ratios must sum to 1");
  const std::size_t n = corpus.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.Shuffle(order);

  // The slack keeps products like 100 * 0.29 from flooring one short.
  auto part = [n](double r) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * r + 1e-9));
  };
  const std::size_t n_valid = part(ratios[1]);
  const std::size_t n_test = part(ratios[2]);
  const std::size_t n_train = n - n_valid - n_test;
  std::array<std::vector<std::size_t>, 3> parts;
  parts[0].assign(order.begin(), order.begin() + n_train);
  parts[1].assign(order.begin() + n_train, order.begin() + n_train + n_valid);
  parts[2].assign(order.begin() + n_train + n_valid, order.end());

  std::array<Corpus, 3> out;
  for (int p = 0; p < 3; ++p) {
    std::sort(parts[p].begin(), parts[p].end());
    for (std::size_t i : parts[p]) out[p].entries.push_back(corpus.entries[i]);
  }
  return out;
}

}  // namespace mvsearch::corpus
