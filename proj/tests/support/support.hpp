#pragma once

// Shared fixtures and independent oracles for the unit tests and the
// acceptance runner.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "morphseg/autodiff/gradcheck.hpp"
#include "morphseg/data/types.hpp"
#include "morphseg/model/params.hpp"
#include "morphseg/training/trainer.hpp"

namespace morphseg::testing {

ad::Tensor random_tensor(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double lo = -1.0,
                         double hi = 1.0);

/// One randomized instance of a differentiable operation, reduced to a
/// scalar through a fixed random projection so every gradient entry matters.
struct GradCase {
  ad::ScalarFunction f;
  std::vector<ad::Tensor> inputs;
};

struct OpCase {
  std::string name;
  std::function<GradCase(std::mt19937_64&)> make;
};

/// Every differentiable tape operation.
const std::vector<OpCase>& op_cases();

/// Model parameters filled uniformly in [-scale, scale].
model::ModelParams random_params(const model::ModelConfig& config, std::size_t vocab_size, std::size_t output_size,
                                 std::uint64_t seed, double scale = 0.5);

/// Finite-difference check of the full teacher-forced sequence loss over
/// every parameter array (hidden 4, embed 6, a 3-character word). Uses
/// Richardson-extrapolated central differences: at a plain 1e-5 step the
/// roundoff of the loss swamps its smallest gradient entries.
ad::GradCheckResult sequence_nll_gradcheck(std::uint64_t seed, double eps = 1e-3,
                                           ad::FiniteDifference scheme = ad::FiniteDifference::Richardson);

/// Border scores computed by walking each string character by character.
struct OracleScores {
  std::size_t matched = 0, predicted = 0, gold = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};
std::vector<std::size_t> brute_force_boundaries(const std::u32string& segmented);
OracleScores brute_force_border(const std::vector<std::u32string>& predictions,
                                const std::vector<std::u32string>& golds);

/// Random word over `alphabet` with separators. Well-formed strings never
/// start or end with '|' nor double it; malformed ones may.
std::u32string random_segmentation(std::mt19937_64& rng, std::u32string_view alphabet, bool well_formed);

/// prefix|stem|suffix words with a unique parse.
struct SyntheticGrammar {
  std::vector<std::u32string> prefixes, stems, suffixes;
  /// All segmented words, shuffled deterministically.
  std::vector<std::u32string> words;

  static SyntheticGrammar make(std::uint64_t seed);
  /// Number of ways `word` splits into prefix + stem + suffix.
  std::size_t parses(std::u32string_view word) const;
};

/// Disjoint word pools for train/dev/test (2/3, 1/9, 2/9 of the grammar),
/// sampled with replacement to the requested sizes. Auxiliary words are the
/// unsegmented grammar words.
training::ExperimentData synthetic_experiment(const SyntheticGrammar& grammar, std::uint64_t seed,
                                              std::size_t n_train = 500, std::size_t n_dev = 100,
                                              std::size_t n_test = 200);

/// Words of 1-3 random morphs over a 16-letter alphabet.
data::Dataset random_morph_dataset(std::uint64_t seed, std::size_t n);

}  // namespace morphseg::testing
