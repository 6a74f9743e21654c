// subvec: train and query subword-augmented PPMI word embeddings.
//
// Exit codes: 0 success, 1 usage, 2 bad data or I/O, 3 numeric failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "subvec/cooccur.hpp"
#include "subvec/corpus.hpp"
#include "subvec/error.hpp"
#include "subvec/eval.hpp"
#include "subvec/model.hpp"
#include "subvec/model_io.hpp"
#include "subvec/subword.hpp"
#include "subvec/trainer.hpp"
#include "subvec/version.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace subvec;

namespace {

std::string digest_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open input for digest: " + path);
  std::uint64_t h = fnv1a64("");
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0)
    h = fnv1a64({buf, static_cast<std::size_t>(in.gcount())}, h);
  if (in.bad()) throw DataError("I/O error while reading: " + path);
  char hex[32];
  std::snprintf(hex, sizeof hex, "fnv1a64:%016llx",
                static_cast<unsigned long long>(h));
  return hex;
}

json input_digests(std::span<const std::string> paths) {
  json arr = json::array();
  for (const std::string& p : paths)
    arr.push_back({{"path", p}, {"digest", digest_file(p)}});
  return arr;
}

// SUBVEC_OUTPUT_DIR, when set, replaces whatever --output said.
std::string resolve_output_dir(const std::string& flag_value) {
  if (const char* env = std::getenv("SUBVEC_OUTPUT_DIR");
      env && *env != '\0') {
    if (!flag_value.empty() && flag_value != env)
      std::cerr << "note: SUBVEC_OUTPUT_DIR overrides --output (" << env
                << ")\n";
    return env;
  }
  return flag_value;
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw DataError("write failed: " + path.string());
}

std::string resolve_model_path(const std::string& given) {
  fs::path p(given);
  std::error_code ec;
  if (fs::is_directory(p, ec)) p /= "model.bin";
  return p.string();
}

struct LoadedModel {
  Model model;
  std::optional<SegmentationTable> table;

  const SegmentationTable* table_ptr() const {
    return table ? &*table : nullptr;
  }
};

LoadedModel load_model(const std::string& model_arg,
                       const std::string& segmentation_file) {
  LoadedModel lm;
  lm.model = load_model_bundle(resolve_model_path(model_arg));
  if (!segmentation_file.empty())
    lm.table = SegmentationTable::load_file(segmentation_file);
  return lm;
}

struct TrainArgs {
  std::vector<std::string> corpus;
  std::string output;
  TrainConfig config;
  std::string subwords = "ngrams";
  SubwordSpec spec;
  std::string segmentation_file;
  bool dry_run = false;
};

json train_manifest(const TrainArgs& a, const std::string& out_dir) {
  json m;
  m["tool"] = "subvec";
  m["version"] = kVersion;
  m["command"] = "train";
  m["inputs"] = input_digests(a.corpus);
  if (!a.segmentation_file.empty())
    m["inputs"].push_back({{"path", a.segmentation_file},
                           {"digest", digest_file(a.segmentation_file)}});
  json c;
  c["output"] = out_dir;
  c["dims"] = a.config.dims;
  c["window"] = a.config.window;
  c["lr"] = a.config.learning_rate;
  c["subsample"] = a.config.subsample_threshold;
  c["negatives"] = a.config.negatives;
  c["cds"] = a.config.cds_alpha;
  c["positional"] = a.config.positional;
  c["epochs"] = a.config.epochs;
  c["min_count"] = a.config.min_count;
  c["subwords"] = a.subwords;
  c["minn"] = a.spec.n_min;
  c["maxn"] = a.spec.n_max;
  c["buckets"] = a.spec.buckets;
  c["segmentation_file"] =
      a.segmentation_file.empty() ? json(nullptr) : json(a.segmentation_file);
  c["strict_morphemes"] = a.spec.strict_morphemes;
  c["seed"] = a.config.seed;
  c["threads"] = a.config.threads;
  c["shared_subsample"] = a.config.shared_subsample_stream;
  c["lr_floor_ratio"] = a.config.lr_floor_ratio;
  m["config"] = std::move(c);
  return m;
}

int run_train(TrainArgs& a) {
  std::string out_dir = resolve_output_dir(a.output);
  if (out_dir.empty()) {
    std::cerr << "train: --output (or SUBVEC_OUTPUT_DIR) is required\n";
    return 1;
  }
  a.spec.mode = subword_mode_from_string(a.subwords);
  if (!a.segmentation_file.empty() && a.spec.mode != SubwordMode::kMorphemes) {
    std::cerr << "train: --segmentation-file needs --subwords morphemes\n";
    return 1;
  }
  a.config.validate();

  fs::create_directories(out_dir);
  write_json_file(fs::path(out_dir) / "manifest.json",
                  train_manifest(a, out_dir));
  if (a.dry_run) {
    std::cout << "dry run: wrote " << (fs::path(out_dir) / "manifest.json").string()
              << ", no training performed\n";
    return 0;
  }

  std::optional<SegmentationTable> table;
  if (!a.segmentation_file.empty())
    table = SegmentationTable::load_file(a.segmentation_file);

  TrainOutput out = train(a.corpus, a.config, a.spec,
                          table ? &*table : nullptr);

  const fs::path dir(out_dir);
  out.model.vocab.save_file((dir / "vocab.txt").string());
  save_model_bundle((dir / "model.bin").string(), out.model);
  write_vectors_text_file((dir / "vectors.txt").string(), out.model);

  json r;
  r["vocab_size"] = out.model.vocab.size();
  r["total_tokens"] = out.model.vocab.total_tokens();
  r["context_size"] =
      ContextVocabulary(out.model.vocab.size(), a.config.window,
                        a.config.positional)
          .size();
  r["epochs_completed"] = out.report.epochs_completed;
  r["pair_updates"] = out.report.pair_updates;
  r["observed_pairs_per_sweep"] = out.report.observed_pairs_per_sweep;
  r["mean_epoch_loss"] = out.report.mean_epoch_loss;
  r["epoch_seconds"] = out.report.epoch_seconds;
  r["final_learning_rate"] = out.report.final_learning_rate;
  r["initial_mean_loss"] = out.report.initial_mean_loss;
  r["final_mean_loss"] = out.report.final_mean_loss;
  write_json_file(dir / "report.json", r);

  std::cout << "vocabulary: " << out.model.vocab.size() << " words, "
            << out.model.vocab.total_tokens() << " tokens\n"
            << "pairs per sweep: " << out.report.observed_pairs_per_sweep
            << ", updates: " << out.report.pair_updates << "\n"
            << "mean loss: " << out.report.initial_mean_loss << " -> "
            << out.report.final_mean_loss << "\n"
            << "outputs in " << out_dir << "\n";
  return 0;
}

struct VocabArgs {
  std::vector<std::string> corpus;
  std::string output;
  std::uint64_t min_count = 100;
};

int run_build_vocab(VocabArgs& a) {
  std::string out_dir = resolve_output_dir(a.output);
  if (out_dir.empty()) {
    std::cerr << "build-vocab: --output (or SUBVEC_OUTPUT_DIR) is required\n";
    return 1;
  }
  Vocabulary vocab = build_vocab_files(a.corpus, a.min_count);
  fs::create_directories(out_dir);

  json m;
  m["tool"] = "subvec";
  m["version"] = kVersion;
  m["command"] = "build-vocab";
  m["inputs"] = input_digests(a.corpus);
  m["config"] = {{"output", out_dir}, {"min_count", a.min_count}};
  write_json_file(fs::path(out_dir) / "manifest.json", m);

  vocab.save_file((fs::path(out_dir) / "vocab.txt").string());
  std::cout << "vocabulary: " << vocab.size() << " words, "
            << vocab.total_tokens() << " tokens\n";
  return 0;
}

struct ExportArgs {
  std::string model;
  std::string output;
  std::string format = "text";
};

int run_export(ExportArgs& a) {
  Model model = load_model_bundle(resolve_model_path(a.model));
  if (a.format == "text")
    write_vectors_text_file(a.output, model);
  else if (a.format == "binary")
    save_model_bundle(a.output, model);
  else {
    std::cerr << "export: unknown format '" << a.format
              << "' (expected text or binary)\n";
    return 1;
  }

  json m;
  m["tool"] = "subvec";
  m["version"] = kVersion;
  m["command"] = "export";
  m["inputs"] = json::array(
      {{{"path", resolve_model_path(a.model)},
        {"digest", digest_file(resolve_model_path(a.model))}}});
  m["config"] = {{"format", a.format}, {"output", a.output}};
  write_json_file(a.output + ".manifest.json", m);

  std::cout << "wrote " << a.output << "\n";
  return 0;
}

struct QueryArgs {
  std::string model;
  std::string word;
  int k = 5;
  std::string segmentation_file;
  bool as_json = false;
};

int run_query_nn(QueryArgs& a) {
  LoadedModel lm = load_model(a.model, a.segmentation_file);
  const Model& model = lm.model;

  std::string word = a.word;
  for (char& c : word)
    if (c >= 'A' && c <= 'Z') c += 'a' - 'A';

  std::int32_t id = model.vocab.id_of(word);
  RowVec<float> query;
  std::unordered_set<std::int32_t> exclude;
  if (id >= 0) {
    query = model.vector_of(id);
    exclude.insert(id);
  } else {
    query = model.oov_vector(word, lm.table_ptr());
  }

  std::vector<Neighbor> top = nearest_neighbors(query, a.k, model, exclude);
  if (a.as_json) {
    json j;
    j["word"] = word;
    j["in_vocabulary"] = id >= 0;
    j["neighbors"] = json::array();
    for (const Neighbor& n : top)
      j["neighbors"].push_back({{"word", model.vocab.word(n.word_id)},
                                {"cosine", n.similarity}});
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << word << (id >= 0 ? "" : " (out of vocabulary)") << "\n";
    for (const Neighbor& n : top) {
      char line[64];
      std::snprintf(line, sizeof line, "  %-24s %.6f",
                    model.vocab.word(n.word_id).c_str(), n.similarity);
      std::cout << line << "\n";
    }
  }
  return 0;
}

struct EvalArgs {
  std::string model;
  std::string dataset;
  std::string oov = "skip";
  std::string segmentation_file;
  bool as_json = false;
};

int run_eval_sim(EvalArgs& a) {
  LoadedModel lm = load_model(a.model, a.segmentation_file);
  OovPolicy policy = oov_policy_from_string(a.oov);
  SimilarityDataset ds = SimilarityDataset::load_file(a.dataset);
  SimilarityResult r = eval_similarity(ds, lm.model, policy, lm.table_ptr());

  if (a.as_json) {
    json j;
    j["dataset"] = a.dataset;
    j["oov_policy"] = a.oov;
    j["rho"] = r.rho;
    j["pairs_used"] = r.pairs_used;
    j["pairs_skipped"] = r.pairs_skipped;
    std::cout << j.dump(2) << "\n";
  } else {
    char line[128];
    std::snprintf(line, sizeof line,
                  "spearman rho %.4f  (pairs used %llu, skipped %llu)", r.rho,
                  static_cast<unsigned long long>(r.pairs_used),
                  static_cast<unsigned long long>(r.pairs_skipped));
    std::cout << line << "\n";
  }
  return 0;
}

int run_eval_analogy(EvalArgs& a) {
  LoadedModel lm = load_model(a.model, a.segmentation_file);
  OovPolicy policy = oov_policy_from_string(a.oov);
  AnalogyDataset ds = AnalogyDataset::load_file(a.dataset);
  AnalogyResult r = eval_analogy(ds, lm.model, policy, lm.table_ptr());

  if (a.as_json) {
    json j;
    j["dataset"] = a.dataset;
    j["oov_policy"] = a.oov;
    j["accuracy"] = r.accuracy;
    j["rows_used"] = r.rows_used;
    j["rows_skipped"] = r.rows_skipped;
    j["sections"] = json::array();
    for (const SectionStats& s : r.sections)
      j["sections"].push_back(
          {{"name", s.name}, {"used", s.used}, {"correct", s.correct}});
    std::cout << j.dump(2) << "\n";
  } else {
    char line[128];
    std::snprintf(line, sizeof line,
                  "accuracy %.4f  (rows used %llu, skipped %llu)", r.accuracy,
                  static_cast<unsigned long long>(r.rows_used),
                  static_cast<unsigned long long>(r.rows_skipped));
    std::cout << line << "\n";
    for (const SectionStats& s : r.sections) {
      if (s.used == 0) continue;
      std::snprintf(line, sizeof line, "  %-32s %.4f  (%llu rows)",
                    s.name.c_str(),
                    static_cast<double>(s.correct) / s.used,
                    static_cast<unsigned long long>(s.used));
      std::cout << line << "\n";
    }
  }
  return 0;
}

struct DumpArgs {
  std::vector<std::string> corpus;
  std::string output;
  int window = 2;
  bool positional = true;
  std::uint64_t min_count = 100;
  double subsample = 1e-5;
  double cds = 0.75;
  std::uint64_t seed = 1;
  int threads = 1;
};

int run_dump_ppmi(DumpArgs& a) {
  Vocabulary vocab = build_vocab_files(a.corpus, a.min_count);
  IdStream stream = load_id_stream(a.corpus, vocab);
  SubsampleConfig sub{a.subsample, a.seed, false};
  CooccurrenceCounts counts = count_cooccurrences(
      stream, vocab, a.window, a.positional, sub, sub.pass_key(0), a.threads);
  PpmiMatrix ppmi = PpmiMatrix::from_counts(counts, a.cds);

  if (a.output.empty()) {
    ppmi.dump(std::cout);
  } else {
    std::ofstream out(a.output);
    if (!out) throw DataError("cannot open for writing: " + a.output);
    ppmi.dump(out);
    if (!out) throw DataError("write failed: " + a.output);
    std::cout << "wrote " << ppmi.nonzeros() << " cells to " << a.output
              << "\n";
  }
  return 0;
}

void add_common_train_flags(CLI::App* cmd, TrainConfig& c) {
  cmd->add_option("--window", c.window, "Symmetric window size")
      ->capture_default_str();
  cmd->add_option("--subsample", c.subsample_threshold,
                  "Frequent-word subsampling threshold (<= 0 disables)")
      ->capture_default_str();
  cmd->add_option("--cds", c.cds_alpha,
                  "Context distribution smoothing exponent")
      ->capture_default_str();
  cmd->add_flag("--positional,!--no-positional", c.positional,
                "Key contexts by (word, relative offset)")
      ->capture_default_str();
  cmd->add_option("--min-count", c.min_count, "Minimum corpus frequency")
      ->capture_default_str();
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  cmd->add_option("--threads", c.threads, "Worker thread count")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"subword-augmented PPMI word embeddings"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  TrainArgs train_args;
  CLI::App* train_cmd =
      app.add_subcommand("train", "Train embeddings from a text corpus");
  train_cmd->add_option("--corpus", train_args.corpus, "Corpus file(s)")
      ->required();
  train_cmd->add_option("--output", train_args.output, "Output directory");
  train_cmd->add_option("--dims", train_args.config.dims,
                        "Embedding dimensionality")
      ->capture_default_str();
  train_cmd->add_option("--lr", train_args.config.learning_rate,
                        "Initial learning rate")
      ->capture_default_str();
  train_cmd->add_option("--negatives", train_args.config.negatives,
                        "Negative samples per observed pair")
      ->capture_default_str();
  train_cmd->add_option("--epochs", train_args.config.epochs,
                        "Training sweeps over the corpus")
      ->capture_default_str();
  add_common_train_flags(train_cmd, train_args.config);
  train_cmd
      ->add_option("--subwords", train_args.subwords,
                   "Subword mode: none, ngrams, or morphemes")
      ->check(CLI::IsMember({"none", "ngrams", "morphemes"}))
      ->capture_default_str();
  train_cmd->add_option("--minn", train_args.spec.n_min,
                        "Shortest n-gram length")
      ->capture_default_str();
  train_cmd->add_option("--maxn", train_args.spec.n_max,
                        "Longest n-gram length")
      ->capture_default_str();
  train_cmd->add_option("--buckets", train_args.spec.buckets,
                        "Subword hash buckets")
      ->capture_default_str();
  train_cmd->add_option("--segmentation-file", train_args.segmentation_file,
                        "Morpheme segmentation table (word<TAB>m1 m2 ...)");
  train_cmd->add_flag("--strict-morphemes", train_args.spec.strict_morphemes,
                      "Fail on words missing from the segmentation table");
  train_cmd->add_flag("--shared-subsample",
                      train_args.config.shared_subsample_stream,
                      "Replay one subsampled stream across all epochs");
  train_cmd->add_option("--lr-floor", train_args.config.lr_floor_ratio,
                        "Final learning rate as a fraction of the initial")
      ->capture_default_str();
  train_cmd->add_flag("--dry-run", train_args.dry_run,
                      "Write the run manifest and exit without training");

  VocabArgs vocab_args;
  CLI::App* vocab_cmd =
      app.add_subcommand("build-vocab", "Count tokens and write a vocabulary");
  vocab_cmd->add_option("--corpus", vocab_args.corpus, "Corpus file(s)")
      ->required();
  vocab_cmd->add_option("--output", vocab_args.output, "Output directory");
  vocab_cmd->add_option("--min-count", vocab_args.min_count,
                        "Minimum corpus frequency")
      ->capture_default_str();

  ExportArgs export_args;
  CLI::App* export_cmd =
      app.add_subcommand("export", "Re-export a trained model bundle");
  export_cmd->add_option("--model", export_args.model,
                         "Model bundle (model.bin or its directory)")
      ->required();
  export_cmd->add_option("--output", export_args.output, "Output file")
      ->required();
  export_cmd->add_option("--format", export_args.format, "text or binary")
      ->check(CLI::IsMember({"text", "binary"}))
      ->capture_default_str();

  QueryArgs query_args;
  CLI::App* query_cmd =
      app.add_subcommand("query-nn", "Nearest neighbors of a word");
  query_cmd->add_option("--model", query_args.model,
                        "Model bundle (model.bin or its directory)")
      ->required();
  query_cmd->add_option("--word", query_args.word, "Query word")->required();
  query_cmd->add_option("--k", query_args.k, "Neighbor count")
      ->capture_default_str();
  query_cmd->add_option("--segmentation-file", query_args.segmentation_file,
                        "Segmentation table for OOV morpheme lookups");
  query_cmd->add_flag("--json", query_args.as_json, "JSON output");

  EvalArgs sim_args;
  CLI::App* sim_cmd =
      app.add_subcommand("eval-sim", "Word similarity (Spearman's rho)");
  sim_cmd->add_option("--model", sim_args.model,
                      "Model bundle (model.bin or its directory)")
      ->required();
  sim_cmd->add_option("--dataset", sim_args.dataset,
                      "Pairs file: word<TAB>word<TAB>score")
      ->required();
  sim_cmd->add_option("--oov", sim_args.oov, "OOV policy: skip or compose")
      ->check(CLI::IsMember({"skip", "compose"}))
      ->capture_default_str();
  sim_cmd->add_option("--segmentation-file", sim_args.segmentation_file,
                      "Segmentation table for OOV morpheme lookups");
  sim_cmd->add_flag("--json", sim_args.as_json, "JSON output");

  EvalArgs ana_args;
  CLI::App* ana_cmd =
      app.add_subcommand("eval-analogy", "Word analogies (3CosAdd accuracy)");
  ana_cmd->add_option("--model", ana_args.model,
                      "Model bundle (model.bin or its directory)")
      ->required();
  ana_cmd->add_option("--dataset", ana_args.dataset,
                      "Analogy file: a b c d, ': name' section headers")
      ->required();
  ana_cmd->add_option("--oov", ana_args.oov, "OOV policy: skip or compose")
      ->check(CLI::IsMember({"skip", "compose"}))
      ->capture_default_str();
  ana_cmd->add_option("--segmentation-file", ana_args.segmentation_file,
                      "Segmentation table for OOV morpheme lookups");
  ana_cmd->add_flag("--json", ana_args.as_json, "JSON output");

  DumpArgs dump_args;
  CLI::App* dump_cmd =
      app.add_subcommand("dump-ppmi", "Write the PPMI matrix as text");
  dump_cmd->add_option("--corpus", dump_args.corpus, "Corpus file(s)")
      ->required();
  dump_cmd->add_option("--output", dump_args.output,
                       "Output file (default: stdout)");
  dump_cmd->add_option("--window", dump_args.window, "Symmetric window size")
      ->capture_default_str();
  dump_cmd->add_flag("--positional,!--no-positional", dump_args.positional,
                     "Key contexts by (word, relative offset)")
      ->capture_default_str();
  dump_cmd->add_option("--min-count", dump_args.min_count,
                       "Minimum corpus frequency")
      ->capture_default_str();
  dump_cmd->add_option("--subsample", dump_args.subsample,
                       "Subsampling threshold (<= 0 disables)")
      ->capture_default_str();
  dump_cmd->add_option("--cds", dump_args.cds,
                       "Context distribution smoothing exponent")
      ->capture_default_str();
  dump_cmd->add_option("--seed", dump_args.seed, "Random seed")
      ->capture_default_str();
  dump_cmd->add_option("--threads", dump_args.threads, "Worker thread count")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(train_cmd)) return run_train(train_args);
    if (app.got_subcommand(vocab_cmd)) return run_build_vocab(vocab_args);
    if (app.got_subcommand(export_cmd)) return run_export(export_args);
    if (app.got_subcommand(query_cmd)) return run_query_nn(query_args);
    if (app.got_subcommand(sim_cmd)) return run_eval_sim(sim_args);
    if (app.got_subcommand(ana_cmd)) return run_eval_analogy(ana_args);
    if (app.got_subcommand(dump_cmd)) return run_dump_ppmi(dump_args);
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
