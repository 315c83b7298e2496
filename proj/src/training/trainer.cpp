#include "morphseg/training/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "morphseg/model/seq2seq.hpp"
#include "morphseg/training/adadelta.hpp"

namespace morphseg::training {

using data::SegExample;
using data::TrainingMode;

namespace {

enum class Stream : std::uint64_t { Init = 1, Shuffle = 2, Corpus = 3 };

std::uint64_t derive_seed(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::string format_accuracy(double v) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(4);
  s << v;
  return s.str();
}

}  // namespace

void validate(const TrainConfig& c) {
  if (c.batch_size == 0) throw std::invalid_argument("batch size must be at least 1");
  if (c.eval_every == 0) throw std::invalid_argument("eval_every must be at least 1");
  if (c.max_epochs == 0) throw std::invalid_argument("max_epochs must be at least 1");
  if (c.replicates == 0) throw std::invalid_argument("replicates must be at least 1");
  if (c.m == 0) throw std::invalid_argument("m must be at least 1");
  if (!(c.rho > 0.0 && c.rho < 1.0)) throw std::invalid_argument("rho must lie in (0, 1)");
  if (!(c.eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (c.bucket_batches == 0) throw std::invalid_argument("bucket_batches must be at least 1");
}

std::size_t default_multiplier(TrainingMode mode, data::Language lang) {
  using data::Language;
  switch (mode) {
    case TrainingMode::MttU: return lang == Language::YoremNokki ? 1 : 4;
    case TrainingMode::MttR: return lang == Language::Wixarika ? 4 : 8;
    case TrainingMode::DaU: return lang == Language::Nahuatl ? 2 : 1;
    case TrainingMode::DaR: return lang == Language::Nahuatl ? 8 : 4;
    case TrainingMode::S2S:
    case TrainingMode::Xling: return 1;
  }
  return 1;
}

model::ModelParams init_params(const model::ModelConfig& config, const data::Vocabulary& vocab,
                               std::uint64_t seed) {
  model::ModelParams params(config, vocab.size(), vocab.output_size());
  ad::ParamSet& arrays = params.arrays();
  std::mt19937_64 rng(derive_seed(seed, Stream::Init));
  std::uniform_real_distribution<double> uniform(-0.08, 0.08);
  for (ad::ParamId id = 0; id < arrays.size(); ++id) {
    ad::Tensor t(arrays.value(id).shape());
    for (double& v : t.data()) v = uniform(rng);
    arrays.assign(id, std::move(t));
  }
  for (ad::ParamId id : params.hidden_to_hidden()) {
    arrays.assign(id, ad::Tensor::identity(arrays.value(id).rows()));
  }
  for (ad::ParamId id : params.biases()) {
    arrays.assign(id, ad::Tensor(arrays.value(id).shape(), 0.0));
  }
  return params;
}

std::size_t select_best(std::span<const EvalPoint> points) {
  if (points.empty()) throw std::invalid_argument("select_best: no evaluation points");
  std::size_t best = 0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].dev_accuracy > points[best].dev_accuracy) best = i;
  }
  return best;
}

std::vector<std::u32string> predict(const model::ModelParams& params, const data::Vocabulary& vocab,
                                    std::span<const SegExample> examples) {
  if (params.vocab_size() != vocab.size() || params.output_size() != vocab.output_size()) {
    throw std::invalid_argument("model parameters do not match the vocabulary");
  }
  std::vector<data::EncodedExample> sources;
  sources.reserve(examples.size());
  for (const auto& ex : examples) sources.push_back(data::encode_source(vocab, ex));
  std::vector<std::u32string> out;
  out.reserve(examples.size());
  for (auto& d : model::greedy_decode(params, vocab, sources)) out.push_back(std::move(d.output));
  return out;
}

namespace {

std::vector<std::vector<std::size_t>> make_batches(const std::vector<data::EncodedExample>& corpus,
                                                   const TrainConfig& cfg, std::mt19937_64& rng) {
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  const std::size_t pool = cfg.batch_size * cfg.bucket_batches;
  for (std::size_t begin = 0; begin < order.size(); begin += pool) {
    const auto first = order.begin() + static_cast<std::ptrdiff_t>(begin);
    const auto last = order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), begin + pool));
    std::stable_sort(first, last, [&](std::size_t a, std::size_t b) {
      return corpus[a].source.size() < corpus[b].source.size();
    });
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
    const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(begin),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  std::shuffle(batches.begin(), batches.end(), rng);
  return batches;
}

}  // namespace

TrainResult train(const TrainConfig& config, const data::Vocabulary& vocab, std::span<const SegExample> corpus,
                  std::span<const SegExample> dev, const ProgressFn& progress) {
  validate(config);
  if (corpus.empty()) throw std::invalid_argument("training corpus is empty");

  std::vector<SegExample> scored;
  for (const auto& ex : dev) {
    if (ex.task != data::Task::Autoencode) scored.push_back(ex);
  }
  if (scored.empty()) throw std::invalid_argument("development set has no segmentation examples");
  std::vector<std::u32string> dev_gold;
  for (const auto& ex : scored) dev_gold.push_back(ex.target);

  std::vector<data::EncodedExample> encoded;
  encoded.reserve(corpus.size());
  for (const auto& ex : corpus) encoded.push_back(data::encode_example(vocab, ex));

  model::ModelParams params = init_params(config.model, vocab, config.seed);
  AdadeltaState optimizer(params.arrays());
  std::mt19937_64 rng(derive_seed(config.seed, Stream::Shuffle));

  RunHistory history;
  std::optional<model::ModelParams> best;
  std::size_t best_epoch = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (const auto& indices : make_batches(encoded, config, rng)) {
      std::vector<data::EncodedExample> members;
      members.reserve(indices.size());
      for (std::size_t i : indices) members.push_back(encoded[i]);
      const model::Batch batch = model::make_batch(members);

      ad::Tape tape;
      const model::BoundModel bound = model::bind(tape, params);
      const ad::Node loss = model::sequence_nll(bound, batch).total;
      const double value = loss.value()[0];
      if (!std::isfinite(value)) {
        throw NumericError("non-finite training loss at epoch " + std::to_string(epoch) + " (seed " +
                           std::to_string(config.seed) + ")");
      }
      epoch_loss += value;
      ad::GradStore grads = ad::GradStore::zeros_like(params.arrays());
      tape.backward(loss, grads);
      if (!grads.all_finite()) {
        throw NumericError("non-finite gradient at epoch " + std::to_string(epoch) + " (seed " +
                           std::to_string(config.seed) + ")");
      }
      adadelta_step(params.arrays(), grads, optimizer, config.rho, config.eps);
    }
    history.epochs_run = epoch;

    if (epoch % config.eval_every != 0 && epoch != config.max_epochs) continue;
    const auto predictions = predict(params, vocab, scored);
    const double accuracy = eval::token_accuracy(predictions, dev_gold);
    const double mean_loss = epoch_loss / static_cast<double>(encoded.size());
    history.evaluations.push_back({epoch, accuracy, mean_loss});
    if (!best || accuracy > history.selected_dev_accuracy) {
      best = params;
      best_epoch = epoch;
      history.selected_epoch = epoch;
      history.selected_dev_accuracy = accuracy;
    }
    if (progress) {
      progress("epoch " + std::to_string(epoch) + " loss " + format_accuracy(mean_loss) + " dev_accuracy " +
               format_accuracy(accuracy) + (best_epoch == epoch ? " *" : ""));
    }
    if (config.stop_at_dev_accuracy && accuracy >= *config.stop_at_dev_accuracy) break;
  }

  CheckpointMeta meta;
  meta.mode = config.mode;
  meta.m = config.m;
  meta.seed = config.seed;
  meta.epoch = best_epoch;
  meta.dev_accuracy = history.selected_dev_accuracy;
  return TrainResult{Checkpoint{vocab, std::move(*best), meta}, std::move(history)};
}

MetricSummary summarize(std::span<const double> values) {
  MetricSummary s;
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return s;
}

data::Vocabulary experiment_vocabulary(const ExperimentData& data, TrainingMode mode) {
  if (data::uses_corpus_words(mode)) return data::Vocabulary::build(data.train, data.aux_words);
  return data::Vocabulary::build(data.train);
}

ReplicateResult run_replicate(const TrainConfig& config, const ExperimentData& data, std::uint64_t seed,
                              const ProgressFn& progress) {
  if (data.train.empty() || data.dev.empty()) throw std::invalid_argument("experiment needs train and dev data");
  data::AugmentationConfig aug;
  aug.mode = config.mode;
  aug.m = config.m;
  aug.aux_words = data.aux_words;
  aug.seed = derive_seed(seed, Stream::Corpus);
  data::TrainingCorpus corpus = data::build_training_corpus(data.train, aug);
  if (progress) {
    progress("seed " + std::to_string(seed) + ": " + std::string(data::mode_name(config.mode)) + " corpus of " +
             std::to_string(corpus.examples.size()) + " examples");
    for (const auto& w : corpus.warnings) progress("warning: " + w);
  }

  std::vector<SegExample> dev;
  for (const auto& ds : data.dev) {
    auto prepared = data::prepare_for_inference(ds, config.mode);
    dev.insert(dev.end(), prepared.begin(), prepared.end());
  }

  TrainConfig run_config = config;
  run_config.seed = seed;
  const data::Vocabulary vocab = experiment_vocabulary(data, config.mode);
  ReplicateResult result{seed, train(run_config, vocab, corpus.examples, dev, progress), corpus.examples.size(),
                         corpus.warnings, {}};
  if (config.mode != TrainingMode::Xling && data.train.size() == 1) {
    result.run.best.meta.language = data.train.front().language;
  }

  for (const auto& ds : data.test) {
    const auto examples = data::prepare_for_inference(ds, config.mode);
    const auto predictions = predict(result.run.best.params, vocab, examples);
    std::vector<std::u32string> words, golds;
    for (const auto& ex : ds.examples) {
      words.push_back(ex.source);
      golds.push_back(ex.target);
    }
    result.test_reports.push_back(eval::evaluate(words, predictions, golds));
  }
  return result;
}

ReplicateSummary run_replicates(const TrainConfig& config, const ExperimentData& data, const ProgressFn& progress,
                                std::size_t jobs) {
  validate(config);
  const std::size_t k = config.replicates;
  std::vector<std::optional<ReplicateResult>> slots(k);
  std::vector<std::exception_ptr> errors(k);
  std::mutex log_mutex;
  auto log = [&](std::size_t i, const std::string& line) {
    if (!progress) return;
    std::lock_guard lock(log_mutex);
    progress("[replicate " + std::to_string(i) + "] " + line);
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < k; i = next++) {
      try {
        slots[i] = run_replicate(config, data, config.seed + i,
                                 [&, i](const std::string& line) { log(i, line); });
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> threads;
    const std::size_t n = std::clamp<std::size_t>(jobs, 1, k);
    for (std::size_t t = 1; t < n; ++t) threads.emplace_back(worker);
    worker();
  }

  ReplicateSummary summary;
  for (std::size_t i = 0; i < k; ++i) {
    if (slots[i]) {
      summary.runs.push_back(std::move(*slots[i]));
      continue;
    }
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      summary.failures.push_back("seed " + std::to_string(config.seed + i) + ": " + e.what());
    }
  }
  if (summary.runs.empty()) std::rethrow_exception(errors.front());

  for (std::size_t d = 0; d < data.test.size(); ++d) {
    std::vector<double> acc, f1;
    for (const auto& run : summary.runs) {
      acc.push_back(run.test_reports[d].accuracy);
      f1.push_back(run.test_reports[d].border.f1);
    }
    summary.accuracy.push_back(summarize(acc));
    summary.f1.push_back(summarize(f1));
  }
  return summary;
}

}  // namespace morphseg::training
