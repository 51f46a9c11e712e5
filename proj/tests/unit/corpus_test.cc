#include <zlib.h>

#include <filesystem>
#include <map>
#include <set>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "mvsearch/code_model/method_ast.h"
#include "mvsearch/common/errors.h"
#include "mvsearch/common/hash.h"
#include "mvsearch/common/io.h"
#include "mvsearch/corpus/corpus.h"
#include "mvsearch/corpus/dataset.h"
#include "mvsearch/corpus/synth.h"
#include "mvsearch/transforms/rename.h"
#include "test_util.h"

namespace cm = mvsearch::code_model;
namespace cp = mvsearch::corpus;
namespace tf = mvsearch::transforms;
using mvsearch::testing::DataFile;
using nlohmann::json;

namespace {

std::string Line(const std::string& id, const std::string& code, const std::string& doc) {
  return json{{"id", id}, {"code", code}, {"docstring", doc}}.dump() + "\n";
}

cp::Corpus Letters(std::size_t n) {
  cp::Corpus c;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string s = std::to_string(i);
    c.entries.push_back({"e" + s, "int f" + s + "() { return " + s + "; }", "query " + s});
  }
  return c;
}

std::filesystem::path TempDir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("mvsearch_corpus_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("ingest: valid and skipped lines") {
  std::string text = Line("a", "void a() {}", "do a") + "\n" + Line("b", "void b() {}", "do b") +
                     Line("c", "void c() {}", "do c");
  auto r = cp::IngestText(text);
  CHECK(r.corpus.size() == 3);
  CHECK(r.report.skip_count() == 0);

  text += Line("d", "   \n", "empty code") + "{not json\n" + "[1,2]\n" +
          Line("a", "void x() {}", "dup") + json{{"code", "void y() {}"}}.dump() + "\n" +
          Line("e", "void e() {}", " \t");
  r = cp::IngestText(text);
  CHECK(r.corpus.size() == 3);
  CHECK(r.report.skipped.at("empty-code") == 1);
  CHECK(r.report.skipped.at("invalid-json") == 1);
  CHECK(r.report.skipped.at("not-an-object") == 1);
  CHECK(r.report.skipped.at("duplicate-id") == 1);
  CHECK(r.report.skipped.at("missing-query") == 1);
  CHECK(r.report.skipped.at("empty-query") == 1);
  CHECK(r.report.skip_count() == 6);
  CHECK(r.report.lines == 9);
  CHECK(r.report.samples.size() == 6);
}

TEST_CASE("ingest: id fallbacks and CodeSearchNet-shaped records") {
  std::string text =
      json{{"url", "https://x/1"}, {"code", "void a() {}"}, {"docstring", "q1"},
           {"repo", "r"}, {"func_name", "a"}}.dump() + "\n" +
      json{{"url", "https://x/1"}, {"code", "void b() {}"}, {"docstring", "q2"}}.dump() + "\n" +
      json{{"code", "void c() {}"}, {"query", "q3"}}.dump() + "\n";
  auto r = cp::IngestText(text);
  REQUIRE(r.corpus.size() == 3);
  CHECK(r.corpus.entries[0].id == "https://x/1");
  CHECK(r.corpus.entries[1].id == "https://x/1#2");
  CHECK(r.corpus.entries[2].id == "line-3");
  CHECK(r.corpus.entries[2].query == "q3");
}

TEST_CASE("ingest: errors") {
  CHECK_THROWS_AS(cp::IngestText(Line("a", "", "q")), mvsearch::IngestError);
  CHECK_THROWS_AS(cp::IngestText(""), mvsearch::IngestError);
  CHECK_THROWS_AS(cp::Ingest("/nonexistent/corpus.jsonl"), mvsearch::IoError);
}

TEST_CASE("ingest: files, gzip and round trip") {
  const auto dir = TempDir("ingest");
  const cp::Corpus c = cp::PlantedCorpus(4, 1);
  const std::string text = cp::SerializeCorpus(c);
  mvsearch::WriteFile(dir / "c.jsonl", text);
  auto plain = cp::Ingest(dir / "c.jsonl");
  CHECK(plain.corpus.entries == c.entries);

  const std::string gz = (dir / "c.jsonl.gz").string();
  gzFile f = gzopen(gz.c_str(), "wb");
  REQUIRE(f);
  gzwrite(f, text.data(), static_cast<unsigned>(text.size()));
  gzclose(f);
  auto zipped = cp::Ingest(gz);
  CHECK(zipped.corpus.entries == c.entries);
  CHECK(cp::CorpusHash(zipped.corpus) == mvsearch::Sha256Hex(text));
}

TEST_CASE("make_pairs: two entries swap queries") {
  auto pairs = cp::MakePairs(Letters(2), 3);
  REQUIRE(pairs.size() == 4);
  CHECK(pairs[0].label == 1);
  CHECK(pairs[0].query == "query 0");
  CHECK(pairs[1].label == 0);
  CHECK(pairs[1].query == "query 1");
  CHECK(pairs[1].code == pairs[0].code);
  CHECK(pairs[3].query == "query 0");
  for (const auto& p : pairs) CHECK(p.provenance == cp::Provenance::kOriginal);
}

TEST_CASE("make_pairs: balance, no self pairing, determinism") {
  const auto c = Letters(100);
  auto pairs = cp::MakePairs(c, 17);
  REQUIRE(pairs.size() == 200);
  std::size_t positives = 0;
  std::map<std::string, std::string> own_query;
  for (const auto& e : c.entries) own_query[e.id] = e.query;
  for (const auto& p : pairs) {
    positives += p.label;
    if (p.label == 0) CHECK(p.query != own_query[p.origin_id]);
    if (p.label == 1) CHECK(p.query == own_query[p.origin_id]);
  }
  CHECK(positives == 100);

  cp::PerspectiveDataset a, b;
  a.examples = cp::MakePairs(c, 17);
  b.examples = cp::MakePairs(c, 17);
  CHECK(mvsearch::Sha256Hex(cp::SerializeExamples(a)) ==
        mvsearch::Sha256Hex(cp::SerializeExamples(b)));
  b.examples = cp::MakePairs(c, 18);
  CHECK(cp::SerializeExamples(a) != cp::SerializeExamples(b));
  CHECK_THROWS_AS(cp::MakePairs(Letters(1), 1), mvsearch::ContractError);
}

TEST_CASE("make_pairs: mismatched query is uniform over the others") {
  // Entry 0's negative over 4000 seeds; 4 admissible queries, expected
  // 1000 each. Chi-square with 3 dof: 16.27 is the 0.001 critical value.
  const auto c = Letters(5);
  std::map<std::string, int> counts;
  for (std::uint64_t seed = 0; seed < 4000; ++seed) {
    ++counts[cp::MakePairs(c, seed)[1].query];
  }
  REQUIRE(counts.size() == 4);
  CHECK(counts.count("query 0") == 0);
  double chi2 = 0;
  for (const auto& [q, n] : counts) chi2 += (n - 1000.0) * (n - 1000.0) / 1000.0;
  CHECK(chi2 < 16.27);
}

TEST_CASE("pairing excludes same-origin and same-query partners") {
  std::vector<cp::AugmentedEntry> entries = {
      {{"a", "int a() { return 1; }", "qa"}, "a", cp::Provenance::kOriginal},
      {{"a~renamed", "int a() { return 1; }", "qa"}, "a", cp::Provenance::kRenamed},
      {{"b", "int b() { return 2; }", "qa"}, "b", cp::Provenance::kOriginal},
      {{"c", "int c() { return 3; }", "qc"}, "c", cp::Provenance::kOriginal},
  };
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto pairs = cp::PairEntries(entries, seed);
    CHECK(pairs[1].query == "qc");
    CHECK(pairs[3].query == "qc");
    CHECK(pairs[3].provenance == cp::Provenance::kRenamed);
    CHECK(pairs[5].query == "qc");
    CHECK(pairs[7].query == "qa");
  }
  entries.pop_back();
  CHECK_THROWS_AS(cp::PairEntries(entries, 1), mvsearch::ContractError);
}

TEST_CASE("perspective: structure on entity snippet") {
  cp::Corpus c;
  c.entries.push_back({"entities", DataFile("entities_before.java"), "replace html entities"});
  c.entries.push_back({"plain", "void f() { return; }", "do nothing"});
  auto ds = cp::BuildPerspectiveDataset(c, cp::Perspective::kStructure, 5);
  std::vector<const cp::PairExample*> entities_pos;
  for (const auto& x : ds.examples) {
    if (x.label == 1 && x.origin_id == "entities") entities_pos.push_back(&x);
  }
  REQUIRE(entities_pos.size() == 2);
  CHECK(entities_pos[0]->provenance == cp::Provenance::kOriginal);
  CHECK(entities_pos[1]->provenance == cp::Provenance::kRenamed);
  CHECK(entities_pos[1]->query == "replace html entities");
  CHECK(entities_pos[1]->code == tf::RenameVariables(cm::ParseMethodSource(c.entries[0].code)).ast.source);
  // The binding-free method contributes only itself.
  CHECK(ds.stats.unchanged == 1);
  CHECK(ds.stats.augmented == 1);
  CHECK(ds.examples.size() == 6);
  REQUIRE(ds.transforms.size() == 1);
  CHECK(ds.transforms[0].origin_id == "entities");
  CHECK(ds.transforms[0].record.input_hash == mvsearch::Sha256Hex(c.entries[0].code));
}

TEST_CASE("perspective: api filter keeps cipher snippet") {
  cp::Corpus c;
  c.entries.push_back({"cipher", DataFile("cipher_before.java"), "encrypt with aes"});
  c.entries.push_back({"add", "int add(int a,int b){return a+b;}", "add numbers"});
  c.entries.push_back({"now", "long t() { return System.nanoTime(); }", "clock"});
  auto ds = cp::BuildPerspectiveDataset(c, cp::Perspective::kApi, 2);
  std::set<std::string> origins;
  for (const auto& x : ds.examples) origins.insert(x.origin_id);
  CHECK(origins == std::set<std::string>{"cipher", "now"});
  CHECK(ds.stats.filtered_out == 1);
  CHECK(ds.catalog_hash == tf::ApiCatalog::Default().Hash());
  for (const auto& x : ds.examples) CHECK(x.provenance == cp::Provenance::kOriginal);
}

TEST_CASE("perspective: variable adds one permuted copy per permutable entry") {
  cp::Corpus c;
  c.entries.push_back({"cipher", DataFile("cipher_before.java"), "encrypt with aes"});
  c.entries.push_back({"one", "void f() { g(); }", "call g"});
  auto ds = cp::BuildPerspectiveDataset(c, cp::Perspective::kVariable, 4);
  CHECK(ds.stats.augmented == 1);
  CHECK(ds.stats.unchanged == 1);
  CHECK(ds.stats.positives == 3);
  CHECK(ds.stats.negatives == 3);
  REQUIRE(ds.transforms.size() == 1);
  CHECK(ds.transforms[0].record.swap.has_value());
}

TEST_CASE("perspective: invariants on the planted corpus") {
  const auto c = cp::PlantedCorpus(30, 9);
  std::map<std::string, std::string> query_of;
  for (const auto& e : c.entries) query_of[e.id] = e.query;
  for (auto p : {cp::Perspective::kStructure, cp::Perspective::kVariable, cp::Perspective::kApi}) {
    CAPTURE(cp::PerspectiveName(p));
    cp::AugmentOptions serial;
    auto ds = cp::BuildPerspectiveDataset(c, p, 21, serial);
    std::size_t pos = 0;
    std::size_t neg = 0;
    for (const auto& x : ds.examples) {
      (x.label ? pos : neg) += 1;
      if (x.label) {
        CHECK(x.query == query_of[x.origin_id]);
      } else {
        CHECK(x.query != query_of[x.origin_id]);
      }
    }
    CHECK(pos == neg);
    CHECK(ds.stats.unparseable == 0);
    if (p == cp::Perspective::kApi) {
      for (const auto& x : ds.examples) CHECK(x.origin_id.rfind("api-", 0) == 0);
      CHECK(ds.stats.filtered_out == 60);
    } else {
      CHECK(ds.stats.augmented > 0);
    }
    // Augmented copies are exactly their logged transform of the origin.
    std::map<std::string, std::string> code_of;
    for (const auto& e : c.entries) code_of[e.id] = e.code;
    for (const auto& t : ds.transforms) {
      CHECK(t.record.input_hash == mvsearch::Sha256Hex(code_of[t.origin_id]));
      bool found = false;
      for (const auto& x : ds.examples) {
        if (x.id == t.id + ":pos") found = x.code == t.record.output_source;
      }
      CHECK(found);
    }
    cp::AugmentOptions parallel;
    parallel.threads = 4;
    CHECK(cp::SerializeExamples(cp::BuildPerspectiveDataset(c, p, 21, parallel)) ==
          cp::SerializeExamples(ds));
  }
}

TEST_CASE("split: sizes, partition and determinism") {
  const auto c = Letters(10);
  auto parts = cp::Split(c, {0.8, 0.1, 0.1}, 1);
  CHECK(parts[0].size() == 8);
  CHECK(parts[1].size() == 1);
  CHECK(parts[2].size() == 1);
  auto all_train = cp::Split(c, {1, 0, 0}, 1);
  CHECK(all_train[0].entries == c.entries);
  CHECK(all_train[1].size() + all_train[2].size() == 0);

  const auto big = Letters(103);
  auto a = cp::Split(big, {0.7, 0.1, 0.2}, 8);
  auto b = cp::Split(big, {0.7, 0.1, 0.2}, 8);
  CHECK(a[1].size() == 10);
  CHECK(a[2].size() == 20);
  CHECK(a[0].size() == 73);
  std::set<std::string> ids;
  for (int p = 0; p < 3; ++p) {
    CHECK(a[p].entries == b[p].entries);
    for (const auto& e : a[p].entries) ids.insert(e.id);
  }
  CHECK(ids.size() == 103);
  CHECK(cp::Split(big, {0.7, 0.1, 0.2}, 9)[2].entries != a[2].entries);

  CHECK_THROWS_AS(cp::Split(c, {0.5, 0.5, 0.5}, 1), mvsearch::ContractError);
  CHECK_THROWS_AS(cp::Split(c, {1.2, -0.1, -0.1}, 1), mvsearch::ContractError);
}

TEST_CASE("dataset files round trip") {
  const auto dir = TempDir("dataset");
  const auto c = cp::PlantedCorpus(5, 2);
  auto ds = cp::BuildPerspectiveDataset(c, cp::Perspective::kStructure, 3);
  const std::string hash = cp::WriteDataset(dir / "s.jsonl", ds, R"({"note": 1})");
  CHECK(hash == mvsearch::Sha256Hex(mvsearch::ReadFile(dir / "s.jsonl")));
  auto back = cp::ReadDataset(dir / "s.jsonl");
  CHECK(back.examples == ds.examples);
  REQUIRE(back.perspective.has_value());
  CHECK(*back.perspective == cp::Perspective::kStructure);
  auto manifest = json::parse(mvsearch::ReadFile(dir / "s.manifest.json"));
  CHECK(manifest["seed"] == 3);
  CHECK(manifest["note"] == 1);
  CHECK(manifest["counts"]["augmented"] == ds.stats.augmented);
  CHECK(manifest["examples_sha256"] == hash);
  const std::string log = mvsearch::ReadFile(dir / "s.transforms.jsonl");
  CHECK(std::count(log.begin(), log.end(), '\n') == static_cast<long>(ds.transforms.size()));

  auto orig = cp::BuildOriginalDataset(c, 3);
  cp::WriteDataset(dir / "o.jsonl", orig);
  CHECK(!cp::ReadDataset(dir / "o.jsonl").perspective.has_value());
  CHECK_THROWS_AS(cp::ParseExamples("{\"id\": 1}\n"), mvsearch::FormatError);
}

TEST_CASE("synthetic corpora parse") {
  const auto planted = cp::PlantedCorpus(40, 77);
  CHECK(planted.size() == 120);
  std::set<std::string> ids;
  for (const auto& e : planted.entries) {
    CAPTURE(e.code);
    ids.insert(e.id);
    CHECK_NOTHROW(cm::ParseMethodSource(e.code));
  }
  CHECK(ids.size() == 120);
  const auto random = cp::RandomMethods(300, 5);
  std::size_t with_bindings = 0;
  for (const auto& e : random.entries) {
    CAPTURE(e.code);
    cm::MethodAst ast;
    REQUIRE_NOTHROW(ast = cm::ParseMethodSource(e.code));
    with_bindings += !ast.bindings.empty();
  }
  CHECK(with_bindings > 250);
  CHECK(cp::SerializeCorpus(cp::RandomMethods(20, 5)) ==
        cp::SerializeCorpus(cp::RandomMethods(20, 5)));
}
