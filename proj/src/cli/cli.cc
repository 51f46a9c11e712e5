#include "mvsearch/cli/cli.h"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <functional>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "mvsearch/common/errors.h"
#include "mvsearch/common/hash.h"
#include "mvsearch/common/io.h"
#include "mvsearch/corpus/corpus.h"
#include "mvsearch/corpus/dataset.h"
#include "mvsearch/corpus/synth.h"
#include "mvsearch/encoder/artifact.h"
#include "mvsearch/encoder/model.h"
#include "mvsearch/encoder/train.h"
#include "mvsearch/ensemble/ensemble.h"
#include "mvsearch/evaluation/metrics.h"
#include "mvsearch/transforms/api_catalog.h"

namespace mvsearch::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Collects what a run read and wrote; written next to the command's output.
class RunRecord {
 public:
  explicit RunRecord(std::string command)
      : command_(std::move(command)), start_(std::chrono::steady_clock::now()) {}

  void Flags(const CLI::App& sub) {
    for (const CLI::Option* opt : sub.get_options()) {
      if (opt->get_name() == "--help") continue;
      const std::string name = opt->get_name();
      const bool is_flag = opt->get_expected_max() == 0;
      if (is_flag) {
        flags_[name] = opt->count() > 0;
      } else if (opt->count() > 0) {
        const auto& res = opt->results();
        flags_[name] = res.size() == 1 ? json(res.front()) : json(res);
      } else {
        flags_[name] = opt->get_default_str();
      }
    }
  }
  void Seed(const std::string& name, std::uint64_t seed) { seeds_[name] = seed; }
  void Input(const fs::path& path) { inputs_[path.string()] = HashOf(path); }
  void Output(const fs::path& path) { outputs_[path.string()] = HashOf(path); }

  void Write(const fs::path& path) const {
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json m = {{"command", command_},   {"flags", flags_},           {"seeds", seeds_},
              {"inputs", inputs_},     {"outputs", outputs_},       {"tool_version", kToolVersion},
              {"duration_seconds", seconds}};
    WriteFile(path, m.dump(2) + "\n");
  }

 private:
  // Files hash by content; artifact directories by their manifest.
  static std::string HashOf(const fs::path& path) {
    if (fs::is_directory(path)) return encoder::ArtifactHash(path);
    return Sha256Hex(ReadFile(path));
  }

  std::string command_;
  std::chrono::steady_clock::time_point start_;
  json flags_ = json::object();
  json seeds_ = json::object();
  json inputs_ = json::object();
  json outputs_ = json::object();
};

fs::path RunManifestPath(const std::string& explicit_path, const fs::path& output) {
  if (!explicit_path.empty()) return explicit_path;
  fs::path p = output;
  if (p.has_filename()) return p.string() + ".run.json";
  return p.parent_path().string() + ".run.json";
}

corpus::Corpus LoadCorpus(const fs::path& path, std::ostream& err) {
  auto r = corpus::Ingest(path);
  if (r.report.skip_count() > 0) {
    err << json({{"warning", "skipped corpus records"},
                 {"path", path.string()},
                 {"skipped", r.report.skipped}})
               .dump()
        << "\n";
  }
  return std::move(r.corpus);
}

// Either kind of trained artifact behind one scoring call.
class LoadedModel {
 public:
  explicit LoadedModel(const fs::path& dir) {
    json m;
    try {
      m = json::parse(ReadFile(dir / "manifest.json"));
    } catch (const json::exception& e) {
      throw FormatError("model manifest in " + dir.string() + ": " + e.what());
    }
    const std::string format = m.value("format", "");
    if (format == "mvsearch-ensemble/1") {
      ensemble_ = ensemble::LoadEnsemble(dir);
    } else {
      encoder_ = encoder::LoadEncoder(dir);
    }
  }

  double Score(std::string_view query, std::string_view code) const {
    if (ensemble_) return ensemble::EnsembleScore(*ensemble_, query, code);
    return encoder::Score(*encoder_, query, code);
  }

  std::string Kind() const { return ensemble_ ? "ensemble" : "encoder:" + encoder_->perspective; }

 private:
  std::optional<encoder::EncoderModel> encoder_;
  std::optional<ensemble::EnsembleModel> ensemble_;
};

struct TrainFlags {
  double lr = 1e-3;
  std::size_t batch = 32;
  int epochs = 10;
  std::string optimizer = "adam";
  double clip = 5.0;
  std::uint64_t seed = 0;

  void Add(CLI::App* sub) {
    sub->add_option("--lr", lr, "Learning rate");
    sub->add_option("--batch", batch, "Mini-batch size");
    sub->add_option("--epochs", epochs, "Training epochs");
    sub->add_option("--optimizer", optimizer, "adam or sgd");
    sub->add_option("--clip", clip, "Global gradient norm cap, 0 disables");
    sub->add_option("--seed", seed, "Initialization and batch-order seed");
  }

  encoder::TrainConfig Config() const {
    encoder::TrainConfig c;
    c.learning_rate = lr;
    c.batch_size = batch;
    c.epochs = epochs;
    c.optimizer = encoder::ParseOptimizer(optimizer);
    c.clip_norm = clip;
    c.seed = seed;
    return c;
  }
};

std::vector<std::string> SplitCsv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

void PrintRanking(std::ostream& out, const corpus::Corpus& c, const LoadedModel& model,
                  const std::string& query, std::size_t top) {
  std::vector<double> scores(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) scores[i] = model.Score(query, c.entries[i].code);
  std::vector<std::size_t> order(c.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return c.entries[a].id < c.entries[b].id;
  });
  char head[64];
  for (std::size_t r = 0; r < std::min(top, order.size()); ++r) {
    const auto& e = c.entries[order[r]];
    std::snprintf(head, sizeof head, "%zu  %.4f  ", r + 1, scores[order[r]]);
    out << head << e.id << "\n";
    std::stringstream code(e.code);
    std::string line;
    while (std::getline(code, line)) out << "    " << line << "\n";
  }
}

int ReportError(std::ostream& err, const char* kind, int code, const std::string& message) {
  err << json({{"error", kind}, {"exit_code", code}, {"message", message}}).dump() << "\n";
  return code;
}

}  // namespace

int Run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Multi-perspective semantic code search", "mvsearch"};
  app.option_defaults()->always_capture_default();
  app.set_config("--flags-file", "", "Read flags from a TOML/INI file");
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  std::function<void()> action;
  std::string run_manifest;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--run-manifest", run_manifest,
                    "Where to write the run manifest (default: next to the output)");
  };

  // ingest
  std::string in_path, out_path;
  auto* ingest = app.add_subcommand("ingest", "Normalize a JSONL(.gz) corpus");
  ingest->add_option("--in", in_path, "Input records")->required();
  ingest->add_option("--out", out_path, "Normalized corpus")->required();
  add_common(ingest);
  ingest->callback([&] {
    action = [&] {
      RunRecord rec("ingest");
      rec.Flags(*ingest);
      rec.Input(in_path);
      auto r = corpus::Ingest(in_path);
      WriteFile(out_path, corpus::SerializeCorpus(r.corpus));
      rec.Output(out_path);
      out << json({{"lines", r.report.lines},
                   {"accepted", r.report.accepted},
                   {"skipped", r.report.skipped},
                   {"corpus_sha256", corpus::CorpusHash(r.corpus)}})
                 .dump()
          << "\n";
      rec.Write(RunManifestPath(run_manifest, out_path));
    };
  });

  // synth
  std::size_t per_family = 200;
  std::size_t random_count = 0;
  std::uint64_t synth_seed = 0;
  auto* synth = app.add_subcommand("synth", "Generate a planted three-family corpus");
  synth->add_option("--per-family", per_family, "Entries per signal family");
  synth->add_option("--random", random_count, "Emit N random methods instead");
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("--out", out_path, "Corpus file")->required();
  add_common(synth);
  synth->callback([&] {
    action = [&] {
      RunRecord rec("synth");
      rec.Flags(*synth);
      rec.Seed("generator", synth_seed);
      const auto c = random_count > 0 ? corpus::RandomMethods(random_count, synth_seed)
                                      : corpus::PlantedCorpus(per_family, synth_seed);
      WriteFile(out_path, corpus::SerializeCorpus(c));
      rec.Output(out_path);
      out << "wrote " << c.size() << " entries to " << out_path << "\n";
      rec.Write(RunManifestPath(run_manifest, out_path));
    };
  });

  // split
  std::string corpus_path, out_dir, ratios = "0.7,0.1,0.2";
  std::uint64_t split_seed = 0;
  auto* split = app.add_subcommand("split", "Shuffle and partition a corpus");
  split->add_option("--corpus", corpus_path, "Corpus file")->required();
  split->add_option("--ratios", ratios, "train,valid,test fractions");
  split->add_option("--seed", split_seed, "Shuffle seed");
  split->add_option("--out-dir", out_dir, "Receives train/valid/test.jsonl")->required();
  add_common(split);
  split->callback([&] {
    action = [&] {
      RunRecord rec("split");
      rec.Flags(*split);
      rec.Seed("shuffle", split_seed);
      rec.Input(corpus_path);
      const auto parts = SplitCsv(ratios);
      MVSEARCH_REQUIRE(parts.size() == 3, "--ratios needs three comma-separated values");
      std::array<double, 3> r{};
      for (std::size_t i = 0; i < 3; ++i) {
        try {
          r[i] = std::stod(parts[i]);
        } catch (const std::exception&) {
          throw ContractError("--ratios value '" + parts[i] + "' is not a number");
        }
      }
      const auto pieces = corpus::Split(LoadCorpus(corpus_path, err), r, split_seed);
      const char* names[] = {"train.jsonl", "valid.jsonl", "test.jsonl"};
      for (std::size_t i = 0; i < 3; ++i) {
        const fs::path p = fs::path(out_dir) / names[i];
        WriteFile(p, corpus::SerializeCorpus(pieces[i]));
        rec.Output(p);
        out << names[i] << " " << pieces[i].size() << "\n";
      }
      rec.Write(RunManifestPath(run_manifest, fs::path(out_dir) / ""));
    };
  });

  // augment
  std::string perspective, catalog_path, rename_order = "lexicographic";
  std::uint64_t augment_seed = 0;
  bool all_variants = false, nonadjacent = false, conservative = false;
  std::size_t variants = 1;
  unsigned threads = 1;
  auto* augment = app.add_subcommand("augment", "Build a perspective training dataset");
  augment->add_option("--corpus", corpus_path, "Corpus file")->required();
  augment->add_option("--perspective", perspective, "structure, variable, api or original")
      ->required();
  augment->add_option("--seed", augment_seed, "Pairing and permutation seed");
  augment->add_option("--out", out_path, "Dataset .jsonl")->required();
  augment->add_option("--catalog", catalog_path, "JVM API catalog (default: built in)");
  augment->add_option("--rename-order", rename_order, "lexicographic or declaration");
  augment->add_flag("--all-variants", all_variants, "Emit every eligible swap");
  augment->add_option("--variants", variants, "Swaps per entry when not --all-variants");
  augment->add_flag("--nonadjacent", nonadjacent, "Allow non-adjacent independent swaps");
  augment->add_flag("--conservative", conservative, "Treat shared receivers as conflicts");
  augment->add_option("--threads", threads, "Worker threads (output is unaffected)");
  add_common(augment);
  augment->callback([&] {
    action = [&] {
      RunRecord rec("augment");
      rec.Flags(*augment);
      rec.Seed("dataset", augment_seed);
      rec.Input(corpus_path);
      const auto c = LoadCorpus(corpus_path, err);
      corpus::PerspectiveDataset ds;
      std::optional<transforms::ApiCatalog> catalog;
      if (perspective == "original") {
        ds = corpus::BuildOriginalDataset(c, augment_seed);
      } else {
        corpus::AugmentOptions opt;
        if (!catalog_path.empty()) {
          rec.Input(catalog_path);
          catalog = transforms::ApiCatalog::Load(catalog_path);
          opt.catalog = &*catalog;
        }
        if (rename_order == "lexicographic") {
          opt.rename_order = transforms::RenameOrder::kLexicographic;
        } else if (rename_order == "declaration") {
          opt.rename_order = transforms::RenameOrder::kDeclaration;
        } else {
          throw ContractError("unknown --rename-order '" + rename_order + "'");
        }
        opt.permute.all_variants = all_variants;
        opt.permute.variants_per_entry = variants;
        opt.permute.nonadjacent = nonadjacent;
        opt.permute.conservative = conservative;
        opt.threads = threads;
        ds = corpus::BuildPerspectiveDataset(c, corpus::ParsePerspective(perspective),
                                             augment_seed, opt);
      }
      // Content hashes only, so artifacts do not depend on where the run happened.
      const json extra = {{"corpus_sha256", corpus::CorpusHash(c)}};
      const std::string hash = corpus::WriteDataset(out_path, ds, extra.dump());
      rec.Output(out_path);
      const auto& s = ds.stats;
      out << json({{"perspective", corpus::PerspectiveTag(ds)},
                   {"examples", ds.examples.size()},
                   {"positives", s.positives},
                   {"negatives", s.negatives},
                   {"augmented", s.augmented},
                   {"unchanged", s.unchanged},
                   {"unparseable", s.unparseable},
                   {"filtered_out", s.filtered_out},
                   {"sha256", hash}})
                 .dump()
          << "\n";
      rec.Write(RunManifestPath(run_manifest, out_path));
    };
  });

  // train
  std::string dataset_path, pooling = "mean", interaction = "product", min_frequency = "2";
  std::size_t hidden_dim = 128, max_length = 256;
  bool head_only = false;
  TrainFlags tf;
  auto* train = app.add_subcommand("train", "Train one perspective encoder");
  train->add_option("--dataset", dataset_path, "Dataset .jsonl from augment")->required();
  train->add_option("--out", out_dir, "Artifact directory")->required();
  train->add_option("--hidden-dim", hidden_dim, "Hidden width d");
  train->add_option("--pooling", pooling, "mean or attention");
  train->add_option("--interaction", interaction, "product or none");
  train->add_option("--max-length", max_length, "Token limit per pair");
  train->add_option("--min-frequency", min_frequency, "Vocabulary threshold, or 'none'");
  train->add_flag("--head-only", head_only, "Train only the classifier head");
  tf.Add(train);
  add_common(train);
  train->callback([&] {
    action = [&] {
      RunRecord rec("train");
      rec.Flags(*train);
      rec.Seed("train", tf.seed);
      rec.Input(dataset_path);
      encoder::EncoderConfig ec;
      ec.hidden_dim = hidden_dim;
      ec.pooling = encoder::ParsePooling(pooling);
      ec.interaction = encoder::ParseInteraction(interaction);
      ec.max_length = max_length;
      if (min_frequency == "none") {
        ec.min_frequency = encoder::ModelVocab::kNoMinimum;
      } else {
        try {
          ec.min_frequency = std::stoul(min_frequency);
        } catch (const std::exception&) {
          throw ContractError("--min-frequency must be a count or 'none'");
        }
      }
      auto cfg = tf.Config();
      cfg.head_only = head_only;
      const auto ds = corpus::ReadDataset(dataset_path);
      const auto r = encoder::TrainEncoder(ds, ec, cfg);
      json extra = json::parse(encoder::TrainConfigJson(cfg));
      extra["dataset_sha256"] = Sha256Hex(ReadFile(dataset_path));
      encoder::SaveEncoder(r.model, out_dir, r.loss_curve, extra.dump());
      rec.Output(out_dir);
      char buf[128];
      std::snprintf(buf, sizeof buf, "trained %s encoder on %zu examples, final loss %.4f\n",
                    r.model.perspective.c_str(), ds.examples.size(), r.loss_curve.back());
      out << buf;
      rec.Write(RunManifestPath(run_manifest, fs::path(out_dir) / ""));
    };
  });

  // train-ensemble
  std::string structure_dir, variable_dir, api_dir;
  bool finetune = false;
  TrainFlags etf;
  auto* train_ens = app.add_subcommand("train-ensemble", "Train the MLP over three encoders");
  train_ens->add_option("--structure", structure_dir, "Structure encoder artifact")->required();
  train_ens->add_option("--variable", variable_dir, "Variable encoder artifact")->required();
  train_ens->add_option("--api", api_dir, "API encoder artifact")->required();
  train_ens->add_option("--dataset", dataset_path, "Original (unaugmented) dataset")->required();
  train_ens->add_option("--out", out_dir, "Ensemble artifact directory")->required();
  train_ens->add_flag("--finetune-members", finetune, "Also update the member encoders");
  etf.Add(train_ens);
  add_common(train_ens);
  train_ens->callback([&] {
    action = [&] {
      RunRecord rec("train-ensemble");
      rec.Flags(*train_ens);
      rec.Seed("train", etf.seed);
      std::vector<encoder::EncoderModel> members;
      const std::pair<const char*, std::string*> slots[] = {
          {"structure", &structure_dir}, {"variable", &variable_dir}, {"api", &api_dir}};
      for (const auto& [name, dir] : slots) {
        rec.Input(*dir);
        members.push_back(encoder::LoadEncoder(*dir));
        MVSEARCH_REQUIRE(members.back().perspective == name,
                         "--" + std::string(name) + " artifact was trained on the '" +
                             members.back().perspective + "' perspective");
      }
      rec.Input(dataset_path);
      const auto ds = corpus::ReadDataset(dataset_path);
      MVSEARCH_REQUIRE(!ds.perspective.has_value(),
                       "the ensemble trains on the original dataset, got '" +
                           corpus::PerspectiveTag(ds) + "'");
      const auto cfg = etf.Config();
      const auto r = ensemble::TrainEnsemble(std::move(members), ds, cfg, !finetune);
      json extra = json::parse(encoder::TrainConfigJson(cfg));
      extra["dataset_sha256"] = Sha256Hex(ReadFile(dataset_path));
      ensemble::SaveEnsemble(r.model, out_dir, r.loss_curve, extra.dump());
      rec.Output(out_dir);
      char buf[128];
      std::snprintf(buf, sizeof buf, "trained ensemble (d_total %zu) on %zu examples, final loss %.4f\n",
                    r.model.d_total(), ds.examples.size(), r.loss_curve.back());
      out << buf;
      rec.Write(RunManifestPath(run_manifest, fs::path(out_dir) / ""));
    };
  });

  // eval
  std::string model_dir, report_path, ks = "1,5,10";
  std::size_t distractors = 99;
  bool exhaustive = false, oracle = false;
  std::uint64_t eval_seed = 0;
  unsigned eval_threads = 1;
  auto* eval = app.add_subcommand("eval", "Rank each entry's code among distractors");
  auto* model_opt = eval->add_option("--model", model_dir, "Encoder or ensemble artifact");
  auto* oracle_opt = eval->add_flag("--oracle", oracle, "Score with the perfect test oracle");
  model_opt->excludes(oracle_opt);
  eval->add_option("--corpus", corpus_path, "Evaluation corpus")->required();
  eval->add_option("--distractors", distractors, "Distractors per query (D)");
  eval->add_flag("--exhaustive", exhaustive, "Rank against the whole corpus");
  eval->add_option("--ks", ks, "Comma-separated cutoffs for S@k");
  eval->add_option("--seed", eval_seed, "Distractor sampling seed");
  eval->add_option("--report", report_path, "Line-delimited report file");
  eval->add_option("--threads", eval_threads, "Worker threads (output is unaffected)");
  add_common(eval);
  eval->callback([&] {
    action = [&] {
      MVSEARCH_REQUIRE(oracle || !model_dir.empty(), "eval needs --model or --oracle");
      RunRecord rec("eval");
      rec.Flags(*eval);
      rec.Seed("distractors", eval_seed);
      rec.Input(corpus_path);
      const auto c = LoadCorpus(corpus_path, err);
      std::optional<LoadedModel> model;
      evaluation::Scorer scorer;
      std::string scorer_name = "oracle";
      if (oracle) {
        scorer = [](const corpus::CorpusEntry& q, const corpus::CorpusEntry& e) {
          return q.id == e.id ? 1.0 : 0.0;
        };
      } else {
        rec.Input(model_dir);
        model.emplace(model_dir);
        scorer_name = model->Kind();
        scorer = [&](const corpus::CorpusEntry& q, const corpus::CorpusEntry& e) {
          return model->Score(q.query, e.code);
        };
      }
      evaluation::EvalOptions opt;
      opt.distractors = distractors;
      opt.exhaustive = exhaustive;
      opt.seed = eval_seed;
      opt.threads = eval_threads;
      opt.ks.clear();
      for (const auto& k : SplitCsv(ks)) {
        try {
          opt.ks.push_back(std::stoul(k));
        } catch (const std::exception&) {
          throw ContractError("--ks value '" + k + "' is not a count");
        }
      }
      const auto report = evaluation::Evaluate(scorer, c, opt);
      out << evaluation::FormatTable(report);
      json prov = {{"scorer", scorer_name}, {"corpus_sha256", corpus::CorpusHash(c)}};
      if (!model_dir.empty()) prov["model_sha256"] = encoder::ArtifactHash(model_dir);
      if (!report_path.empty()) {
        WriteFile(report_path, evaluation::SerializeReport(report, prov.dump()));
        rec.Output(report_path);
        rec.Write(RunManifestPath(run_manifest, report_path));
      } else if (!run_manifest.empty()) {
        rec.Write(run_manifest);
      }
    };
  });

  // search
  std::string query;
  std::size_t top = 5;
  auto* search = app.add_subcommand("search", "Rank a corpus for a natural-language query");
  search->add_option("--model", model_dir, "Encoder or ensemble artifact")->required();
  search->add_option("--corpus", corpus_path, "Corpus to search")->required();
  search->add_option("--query", query, "Query text; omit for an interactive prompt");
  search->add_option("--top", top, "Results to print");
  add_common(search);
  search->callback([&] {
    action = [&] {
      RunRecord rec("search");
      rec.Flags(*search);
      rec.Input(corpus_path);
      rec.Input(model_dir);
      const auto c = LoadCorpus(corpus_path, err);
      const LoadedModel model(model_dir);
      if (!query.empty()) {
        PrintRanking(out, c, model, query, top);
      } else {
        std::string line;
        while (true) {
          out << "query> " << std::flush;
          if (!std::getline(in, line) || line == ":q" || line == ":quit") break;
          if (line.empty()) continue;
          PrintRanking(out, c, model, line, top);
        }
        out << "\n";
      }
      if (!run_manifest.empty()) rec.Write(run_manifest);
    };
  });

  std::vector<std::string> argv_store = {"mvsearch"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    return ReportError(err, "usage", kUsage, e.what());
  }

  try {
    action();
    return kOk;
  } catch (const IoError& e) {
    return ReportError(err, e.kind(), kIo, e.what());
  } catch (const ContractError& e) {
    return ReportError(err, e.kind(), kContract, e.what());
  } catch (const FormatError& e) {
    return ReportError(err, e.kind(), kFormat, e.what());
  } catch (const DivergenceError& e) {
    return ReportError(err, e.kind(), kDivergence, e.what());
  } catch (const Error& e) {
    return ReportError(err, e.kind(), kBadInput, e.what());
  } catch (const std::exception& e) {
    return ReportError(err, "internal", kInternal, e.what());
  }
}

}  // namespace mvsearch::cli
