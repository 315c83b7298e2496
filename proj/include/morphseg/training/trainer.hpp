#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "morphseg/data/corpus.hpp"
#include "morphseg/data/types.hpp"
#include "morphseg/data/vocabulary.hpp"
#include "morphseg/evaluation/metrics.hpp"
#include "morphseg/model/params.hpp"
#include "morphseg/training/checkpoint.hpp"

namespace morphseg::training {

/// Loss or gradient became NaN/Inf.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  data::TrainingMode mode = data::TrainingMode::S2S;
  std::size_t m = 1;
  std::uint64_t seed = 1;
  std::size_t max_epochs = 200;
  std::size_t eval_every = 5;
  std::size_t batch_size = 20;
  std::size_t replicates = 5;
  model::ModelConfig model;
  double rho = 0.95;
  double eps = 1e-6;
  /// Shuffled examples are sorted by length inside pools of this many
  /// batches before batching, which keeps padding low.
  std::size_t bucket_batches = 5;
  /// Stop once an evaluation reaches this dev accuracy.
  std::optional<double> stop_at_dev_accuracy;
};

/// Checks the invariants of a configuration; throws std::invalid_argument.
void validate(const TrainConfig& config);

/// Default m per language and mode, as tuned on the development sets.
std::size_t default_multiplier(data::TrainingMode mode, data::Language language);

/// Uniform [-0.08, 0.08] for every array, then identity for the square
/// hidden-to-hidden matrices and zero for the biases.
model::ModelParams init_params(const model::ModelConfig& config, const data::Vocabulary& vocab,
                               std::uint64_t seed);

struct EvalPoint {
  std::size_t epoch = 0;
  double dev_accuracy = 0.0;
  /// Mean per-example training loss over the epoch.
  double train_loss = 0.0;
};

struct RunHistory {
  std::vector<EvalPoint> evaluations;
  std::size_t selected_epoch = 0;
  double selected_dev_accuracy = 0.0;
  std::size_t epochs_run = 0;
};

/// Index of the highest dev accuracy, earliest on ties.
std::size_t select_best(std::span<const EvalPoint> points);

struct TrainResult {
  Checkpoint best;
  RunHistory history;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Greedy-decodes `examples` (markers applied) and returns the predicted
/// segmentations.
std::vector<std::u32string> predict(const model::ModelParams& params, const data::Vocabulary& vocab,
                                    std::span<const data::SegExample> examples);

/// Trains with ADADELTA on `corpus`, evaluating dev token accuracy every
/// `eval_every` epochs and keeping the best parameters. Only segmentation
/// examples of `dev` are scored (autoencoding examples are skipped).
TrainResult train(const TrainConfig& config, const data::Vocabulary& vocab,
                  std::span<const data::SegExample> corpus, std::span<const data::SegExample> dev,
                  const ProgressFn& progress = {});

/// Everything one experiment needs. For cross-lingual runs `train`, `dev`
/// and `test` hold one dataset per language.
struct ExperimentData {
  std::vector<data::Dataset> train;
  std::vector<data::Dataset> dev;
  std::vector<data::Dataset> test;
  std::vector<std::u32string> aux_words;
};

struct ReplicateResult {
  std::uint64_t seed = 0;
  TrainResult run;
  std::size_t corpus_size = 0;
  std::vector<std::string> warnings;
  /// One report per test dataset.
  std::vector<eval::EvalReport> test_reports;
};

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;
};

struct ReplicateSummary {
  std::vector<ReplicateResult> runs;
  std::vector<std::string> failures;
  /// Per test dataset, over completed runs.
  std::vector<MetricSummary> accuracy;
  std::vector<MetricSummary> f1;
};

/// Sample mean and standard deviation (0 for fewer than two values).
MetricSummary summarize(std::span<const double> values);

data::Vocabulary experiment_vocabulary(const ExperimentData& data, data::TrainingMode mode);

/// Trains one model on the data of a single seed and scores it on the test
/// sets.
ReplicateResult run_replicate(const TrainConfig& config, const ExperimentData& data, std::uint64_t seed,
                              const ProgressFn& progress = {});

/// Runs seeds config.seed ... config.seed + replicates - 1 on up to `jobs`
/// threads. A failing replicate is recorded and the aggregate covers the
/// rest; if every replicate fails the first error is rethrown.
ReplicateSummary run_replicates(const TrainConfig& config, const ExperimentData& data,
                                const ProgressFn& progress = {}, std::size_t jobs = 1);

}  // namespace morphseg::training
