#include "morphseg/cli/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "morphseg/data/corpus.hpp"
#include "morphseg/data/dataset.hpp"
#include "morphseg/data/stats.hpp"
#include "morphseg/data/utf8.hpp"
#include "morphseg/evaluation/metrics.hpp"
#include "morphseg/training/checkpoint.hpp"
#include "morphseg/training/trainer.hpp"

namespace morphseg::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

/// Bad flag combinations detected after parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FileSpec {
  std::optional<data::Language> language;
  fs::path path;
};

/// "LANG:path" or a plain path; a plain path takes `fallback`.
FileSpec parse_spec(const std::string& text, std::optional<data::Language> fallback) {
  const auto colon = text.find(':');
  if (colon != std::string::npos && colon + 1 < text.size()) {
    if (auto lang = data::parse_language(text.substr(0, colon))) return {lang, text.substr(colon + 1)};
  }
  return {fallback, text};
}

std::optional<data::Language> parse_tag(const std::string& tag) {
  if (tag.empty()) return std::nullopt;
  auto lang = data::parse_language(tag);
  if (!lang) throw UsageError("unknown language tag '" + tag + "' (expected MX, NA, WX or YN)");
  return lang;
}

std::vector<data::Dataset> load_specs(const std::vector<std::string>& specs, std::optional<data::Language> fallback,
                                      std::vector<std::string>* names = nullptr) {
  std::vector<data::Dataset> out;
  for (const auto& s : specs) {
    const FileSpec spec = parse_spec(s, fallback);
    out.push_back(data::load_dataset(spec.path, spec.language));
    if (names) names->push_back(spec.path.string());
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::string join_toml_array(const std::vector<std::string>& items) {
  json arr = items;
  return arr.dump();
}

void print_resolved(std::ostream& err, const std::string& text) {
  err << "# resolved configuration\n" << text;
  if (!text.empty() && text.back() != '\n') err << '\n';
}

CLI::App* add_config(CLI::App* sub) {
  // Read by expand_config before parsing; registered for --help and the
  // resolved configuration.
  sub->add_option("--config", "Read options from a flat key=value file; flags override it");
  return sub;
}

/// Turns the subcommand's `--config FILE` into flags placed ahead of the
/// command-line ones. Keys also given as flags are dropped so flags win;
/// unknown keys surface as unknown flags.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  if (args.empty() || args.front().starts_with('-')) return args;
  std::optional<std::string> file;
  std::set<std::string> given;
  for (std::size_t i = 1; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (!a.starts_with("--")) continue;
    const auto eq = a.find('=');
    const std::string key = a.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
    given.insert(key);
    if (key != "config") continue;
    if (eq != std::string::npos) {
      file = a.substr(eq + 1);
    } else if (i + 1 < args.size()) {
      file = args[i + 1];
    }
  }
  if (!file) return args;
  std::ifstream in(*file);
  if (!in) throw UsageError("cannot read config file '" + *file + "'");
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_config(in);
  } catch (const CLI::ParseError& e) {
    throw UsageError("config file '" + *file + "': " + e.what());
  }
  std::vector<std::string> expanded;
  for (const auto& item : items) {
    if (!item.parents.empty() || item.name == "++" || item.name == "--") {
      throw UsageError("config file '" + *file + "': sections are not supported, use flat key=value lines");
    }
    // Every option takes a value, so an empty list means "not set".
    if (item.name == "config" || given.contains(item.name) || item.inputs.empty()) continue;
    for (const auto& value : item.inputs) {
      expanded.push_back("--" + item.name);
      expanded.push_back(value);
    }
  }
  args.insert(args.begin() + 1, expanded.begin(), expanded.end());
  return args;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string mode;
  std::vector<std::string> train, dev, test;
  std::string aux;
  std::optional<std::size_t> m;
  std::uint64_t seed = 1;
  std::size_t replicates = 5;
  std::size_t jobs = 1;
  std::size_t max_epochs = 200;
  std::size_t eval_every = 5;
  std::size_t batch_size = 20;
  std::size_t hidden = 100;
  std::size_t embed = 300;
  std::size_t attention = 100;
  std::string lang_tag;
  std::optional<double> stop_at;
  std::string out;
};

std::string resolved_train_config(const TrainArgs& a, const training::TrainConfig& cfg) {
  std::ostringstream s;
  s << "mode=\"" << data::mode_name(cfg.mode) << "\"\n"
    << "train=" << join_toml_array(a.train) << '\n'
    << "dev=" << join_toml_array(a.dev) << '\n'
    << "test=" << join_toml_array(a.test) << '\n'
    << "aux=" << json(a.aux).dump() << '\n'
    << "m=" << cfg.m << '\n'
    << "seed=" << cfg.seed << '\n'
    << "replicates=" << cfg.replicates << '\n'
    << "jobs=" << a.jobs << '\n'
    << "max-epochs=" << cfg.max_epochs << '\n'
    << "eval-every=" << cfg.eval_every << '\n'
    << "batch-size=" << cfg.batch_size << '\n'
    << "hidden=" << cfg.model.hidden << '\n'
    << "embed=" << cfg.model.embed << '\n'
    << "attention=" << cfg.model.attention << '\n'
    << "lang-tag=" << json(a.lang_tag).dump() << '\n';
  if (cfg.stop_at_dev_accuracy) s << "stop-at-dev-accuracy=" << *cfg.stop_at_dev_accuracy << '\n';
  s << "out=" << json(a.out).dump() << '\n';
  return s.str();
}

json report_summary_json(const eval::EvalReport& r) {
  return json::parse(eval::report_json(r, false));
}

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  training::TrainConfig cfg;
  const auto mode = data::parse_mode(a.mode);
  if (!mode) throw UsageError("unknown mode '" + a.mode + "' (s2s, mtt-u, mtt-r, da-u, da-r, xling)");
  cfg.mode = *mode;
  cfg.seed = a.seed;
  cfg.replicates = a.replicates;
  cfg.max_epochs = a.max_epochs;
  cfg.eval_every = a.eval_every;
  cfg.batch_size = a.batch_size;
  cfg.model = {a.hidden, a.embed, a.attention};
  cfg.stop_at_dev_accuracy = a.stop_at;

  const auto fallback = parse_tag(a.lang_tag);
  if (cfg.mode != data::TrainingMode::Xling && a.train.size() != 1) {
    throw UsageError("mode " + std::string(data::mode_name(cfg.mode)) + " takes exactly one --train file");
  }
  if (data::uses_corpus_words(cfg.mode) && a.aux.empty()) {
    throw UsageError("mode " + std::string(data::mode_name(cfg.mode)) + " needs --aux (unlabeled word list)");
  }

  training::ExperimentData xd;
  std::vector<std::string> test_names;
  xd.train = load_specs(a.train, fallback);
  xd.dev = load_specs(a.dev, fallback);
  xd.test = load_specs(a.test, fallback, &test_names);
  if (cfg.mode == data::TrainingMode::Xling) {
    for (const auto* group : {&xd.train, &xd.dev, &xd.test}) {
      for (const auto& ds : *group) {
        if (!ds.language) throw UsageError("xling needs a language for every file (LANG:path or --lang-tag)");
      }
    }
  }
  if (data::uses_corpus_words(cfg.mode)) {
    for (auto& w : data::load_word_list(a.aux)) {
      if (w.find(data::kSeparatorChar) != std::u32string::npos) {
        err << "warning: skipping auxiliary word containing '|': " << data::to_utf8(w) << '\n';
        continue;
      }
      xd.aux_words.push_back(std::move(w));
    }
  }

  if (a.m) {
    cfg.m = *a.m;
  } else if (data::is_augmented(cfg.mode)) {
    if (!xd.train.front().language) {
      throw UsageError("--m is required when the training language is unknown");
    }
    cfg.m = training::default_multiplier(cfg.mode, *xd.train.front().language);
  }
  try {
    training::validate(cfg);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const std::string resolved = resolved_train_config(a, cfg);
  print_resolved(err, resolved);

  const fs::path dir = a.out;
  fs::create_directories(dir);
  write_text(dir / "config.ini", resolved);

  const training::ReplicateSummary summary = training::run_replicates(
      cfg, xd, [&](const std::string& line) { err << line << '\n'; }, a.jobs);

  json manifest;
  manifest["command"] = "train";
  manifest["mode"] = std::string(data::mode_name(cfg.mode));
  manifest["m"] = cfg.m;
  manifest["config"] = "config.ini";
  manifest["history"] = "history.json";
  manifest["inputs"] = {{"train", a.train}, {"dev", a.dev}, {"test", a.test}, {"aux", a.aux}};
  json runs = json::array();
  json history;
  json replicates = json::array();
  for (const auto& r : summary.runs) {
    const std::string sub = "seed-" + std::to_string(r.seed);
    fs::create_directories(dir / sub);
    training::save_checkpoint(r.run.best, dir / sub / "model.ckpt");
    runs.push_back({{"seed", r.seed},
                    {"checkpoint", sub + "/model.ckpt"},
                    {"selected_epoch", r.run.history.selected_epoch},
                    {"dev_accuracy", r.run.history.selected_dev_accuracy}});

    json evals = json::array();
    for (const auto& p : r.run.history.evaluations) {
      evals.push_back({{"epoch", p.epoch}, {"dev_accuracy", p.dev_accuracy}, {"train_loss", p.train_loss}});
    }
    json tests = json::array();
    for (std::size_t i = 0; i < r.test_reports.size(); ++i) {
      json t = report_summary_json(r.test_reports[i]);
      t["dataset"] = test_names[i];
      tests.push_back(std::move(t));
    }
    replicates.push_back({{"seed", r.seed},
                          {"corpus_size", r.corpus_size},
                          {"warnings", r.warnings},
                          {"epochs_run", r.run.history.epochs_run},
                          {"evaluations", std::move(evals)},
                          {"selected_epoch", r.run.history.selected_epoch},
                          {"selected_dev_accuracy", r.run.history.selected_dev_accuracy},
                          {"test", std::move(tests)}});
  }
  json agg = json::array();
  for (std::size_t i = 0; i < summary.accuracy.size(); ++i) {
    agg.push_back({{"dataset", test_names[i]},
                   {"accuracy_mean", summary.accuracy[i].mean},
                   {"accuracy_stddev", summary.accuracy[i].stddev},
                   {"f1_mean", summary.f1[i].mean},
                   {"f1_stddev", summary.f1[i].stddev}});
  }
  history["replicates"] = std::move(replicates);
  history["failures"] = summary.failures;
  history["summary"] = agg;
  manifest["runs"] = std::move(runs);
  manifest["failures"] = summary.failures;
  write_text(dir / "history.json", history.dump(2) + "\n");
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");

  for (const auto& f : summary.failures) err << "warning: replicate failed: " << f << '\n';
  for (const auto& r : summary.runs) {
    out << "seed " << r.seed << ": selected epoch " << r.run.history.selected_epoch << ", dev accuracy "
        << r.run.history.selected_dev_accuracy << '\n';
  }
  for (std::size_t i = 0; i < summary.accuracy.size(); ++i) {
    out << test_names[i] << ": accuracy " << summary.accuracy[i].mean << " +- " << summary.accuracy[i].stddev
        << ", f1 " << summary.f1[i].mean << " +- " << summary.f1[i].stddev << " over " << summary.runs.size()
        << " run(s)\n";
  }
  return kSuccess;
}

// ---------------------------------------------------------------- eval / segment

struct EvalArgs {
  std::string model;
  std::string test;
  std::string report;
  std::string lang_tag;
};

/// Language the examples must carry for this checkpoint.
std::optional<data::Language> inference_language(const training::Checkpoint& ckpt,
                                                 std::optional<data::Language> requested) {
  if (requested) return requested;
  if (ckpt.meta.mode == data::TrainingMode::Xling) {
    throw UsageError("this is a cross-lingual model; give the language (LANG:path or --lang-tag)");
  }
  return ckpt.meta.language;
}

std::size_t count_lossy(const data::Vocabulary& vocab, std::span<const data::SegExample> examples,
                        std::ostream& err) {
  std::size_t n = 0;
  for (const auto& ex : examples) {
    if (data::encode_source(vocab, ex).lossy) {
      err << "warning: '" << data::to_utf8(ex.source) << "' has characters outside the model vocabulary\n";
      ++n;
    }
  }
  return n;
}

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const FileSpec spec = parse_spec(a.test, parse_tag(a.lang_tag));
  const training::Checkpoint ckpt = training::load_checkpoint(a.model);
  data::Dataset test = data::load_dataset(spec.path, inference_language(ckpt, spec.language));
  if (test.examples.empty()) throw data::DataError("test file '" + spec.path.string() + "' has no examples");

  const auto examples = data::prepare_for_inference(test, ckpt.meta.mode);
  count_lossy(ckpt.vocab, examples, err);
  const auto predictions = training::predict(ckpt.params, ckpt.vocab, examples);
  std::vector<std::u32string> words, golds;
  for (const auto& ex : test.examples) {
    words.push_back(ex.source);
    golds.push_back(ex.target);
  }
  const eval::EvalReport report = eval::evaluate(words, predictions, golds);
  eval::write_report(out, report);
  if (!a.report.empty()) write_text(a.report, eval::report_json(report) + "\n");
  return kSuccess;
}

struct SegmentArgs {
  std::string model;
  std::vector<std::string> words;
  std::string input;
  std::string lang_tag;
};

int cmd_segment(const SegmentArgs& a, std::ostream& out, std::ostream& err) {
  if (a.words.empty() == a.input.empty()) throw UsageError("give either --word or --input-file");
  const training::Checkpoint ckpt = training::load_checkpoint(a.model);
  data::Dataset ds;
  ds.language = inference_language(ckpt, parse_tag(a.lang_tag));
  std::vector<std::u32string> words;
  if (!a.input.empty()) {
    words = data::load_word_list(a.input);
  } else {
    for (const auto& w : a.words) words.push_back(data::to_u32(w));
  }
  for (auto& w : words) {
    data::SegExample ex;
    ex.source = w;
    ex.target = w;
    ds.examples.push_back(std::move(ex));
  }
  if (ds.examples.empty()) return kSuccess;
  const auto examples = data::prepare_for_inference(ds, ckpt.meta.mode);
  count_lossy(ckpt.vocab, examples, err);
  const auto predictions = training::predict(ckpt.params, ckpt.vocab, examples);
  for (std::size_t i = 0; i < words.size(); ++i) {
    out << data::to_utf8(words[i]) << '\t' << data::to_utf8(predictions[i]) << '\n';
  }
  return kSuccess;
}

// ---------------------------------------------------------------- stats / make-aux

struct StatsArgs {
  std::vector<std::string> data;
  std::size_t top_k = 10;
};

int cmd_stats(const StatsArgs& a, std::ostream& out) {
  data::Dataset pooled;
  for (const auto& path : a.data) {
    auto ds = data::load_dataset(path);
    pooled.examples.insert(pooled.examples.end(), ds.examples.begin(), ds.examples.end());
  }
  if (pooled.examples.empty()) throw data::DataError("no examples in the given data");
  data::write_stats(out, data::corpus_stats(pooled, a.top_k));
  return kSuccess;
}

struct MakeAuxArgs {
  std::vector<std::string> alphabet_from;
  std::size_t n = 0;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_make_aux(const MakeAuxArgs& a) {
  std::vector<data::Dataset> labeled;
  for (const auto& path : a.alphabet_from) labeled.push_back(data::load_dataset(path));
  const auto alphabet = data::source_alphabet(labeled);
  if (alphabet.empty()) throw data::DataError("no characters found in the given data");
  std::ostringstream text;
  for (const auto& s : data::generate_random_strings(alphabet, a.n, data::source_lengths(labeled), a.seed)) {
    text << data::to_utf8(s) << '\n';
  }
  write_text(a.out, text.str());
  return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Morphological segmentation with character-level encoder-decoder models", "morphseg"};
  app.require_subcommand(1);
  app.fallthrough(false);

  TrainArgs train_args;
  auto* train = add_config(app.add_subcommand("train", "Train models and write checkpoints and history"));
  train->add_option("--mode", train_args.mode, "s2s, mtt-u, mtt-r, da-u, da-r or xling")->required();
  train->add_option("--train", train_args.train, "Training file, optionally LANG:path")->required();
  train->add_option("--dev", train_args.dev, "Development file(s), optionally LANG:path")->required();
  train->add_option("--test", train_args.test, "Test file(s) scored with the selected models");
  train->add_option("--aux", train_args.aux, "Unlabeled word list (mtt-u, da-u)");
  train->add_option("--m", train_args.m, "Auxiliary multiplier (default: tuned per language)");
  train->add_option("--seed", train_args.seed, "Seed of the first replicate")->capture_default_str();
  train->add_option("--replicates", train_args.replicates, "Number of runs")->capture_default_str();
  train->add_option("--jobs", train_args.jobs, "Replicates trained in parallel")->capture_default_str();
  train->add_option("--max-epochs", train_args.max_epochs)->capture_default_str();
  train->add_option("--eval-every", train_args.eval_every)->capture_default_str();
  train->add_option("--batch-size", train_args.batch_size)->capture_default_str();
  train->add_option("--hidden", train_args.hidden)->capture_default_str();
  train->add_option("--embed", train_args.embed)->capture_default_str();
  train->add_option("--attention", train_args.attention)->capture_default_str();
  train->add_option("--lang-tag", train_args.lang_tag, "Language of files given without LANG: (MX, NA, WX, YN)");
  train->add_option("--stop-at-dev-accuracy", train_args.stop_at, "Stop once dev accuracy reaches this value");
  train->add_option("--out", train_args.out, "Output directory")->required();

  EvalArgs eval_args;
  auto* evalc = add_config(app.add_subcommand("eval", "Score a checkpoint on a segmented file"));
  evalc->add_option("--model", eval_args.model, "Checkpoint")->required();
  evalc->add_option("--test", eval_args.test, "Test file, optionally LANG:path")->required();
  evalc->add_option("--report", eval_args.report, "Write the full report as JSON");
  evalc->add_option("--lang-tag", eval_args.lang_tag, "Language of the test file");

  SegmentArgs seg_args;
  auto* segment = add_config(app.add_subcommand("segment", "Segment words with a checkpoint"));
  segment->add_option("--model", seg_args.model, "Checkpoint")->required();
  segment->add_option("--word", seg_args.words, "Word to segment (repeatable)");
  segment->add_option("--input-file", seg_args.input, "File with one word per line");
  segment->add_option("--lang-tag", seg_args.lang_tag, "Language of the words");

  StatsArgs stats_args;
  auto* stats = add_config(app.add_subcommand("stats", "Corpus statistics of segmented files (pooled)"));
  stats->add_option("--data", stats_args.data, "Segmented file(s)")->required();
  stats->add_option("--top-k", stats_args.top_k, "Most frequent morphs to list")->capture_default_str();

  MakeAuxArgs aux_args;
  auto* make_aux = add_config(app.add_subcommand("make-aux", "Write random strings for mtt-r / da-r"));
  make_aux->add_option("--alphabet-from", aux_args.alphabet_from, "Segmented file(s) defining alphabet and lengths")
      ->required();
  make_aux->add_option("--n", aux_args.n, "Number of strings")->required();
  make_aux->add_option("--seed", aux_args.seed)->capture_default_str();
  make_aux->add_option("--out", aux_args.out, "Output file")->required();

  std::vector<std::string> args(argv + std::min(argc, 1), argv + argc);
  try {
    args = expand_config(std::move(args));
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  std::reverse(args.begin(), args.end());

  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsageError;
  }

  try {
    if (*train) return cmd_train(train_args, out, err);
    for (auto* sub : {evalc, segment, stats, make_aux}) {
      if (*sub) print_resolved(err, sub->config_to_str(true, false));
    }
    if (*evalc) return cmd_eval(eval_args, out, err);
    if (*segment) return cmd_segment(seg_args, out, err);
    if (*stats) return cmd_stats(stats_args, out);
    return cmd_make_aux(aux_args);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const data::DataError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const training::CheckpointError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"morphseg"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace morphseg::cli
