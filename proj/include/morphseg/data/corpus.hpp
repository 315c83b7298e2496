#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "morphseg/data/types.hpp"
#include "morphseg/data/vocabulary.hpp"

namespace morphseg::data {

/// How the labeled data is combined with auxiliary examples.
///  S2S    labeled data only
///  MttU   + m*|T| autoencoding examples over corpus words, task-marked
///  MttR   + m*|T| autoencoding examples over random strings, task-marked
///  DaU    + m*|T| unmarked identity examples over corpus words
///  DaR    + m*|T| unmarked identity examples over random strings
///  Xling  all languages' labeled data, each example language-tagged
enum class TrainingMode { S2S, MttU, MttR, DaU, DaR, Xling };

std::string_view mode_name(TrainingMode mode);  // "s2s", "mtt-u", ...
std::optional<TrainingMode> parse_mode(std::string_view text);
bool uses_corpus_words(TrainingMode mode);
bool uses_random_strings(TrainingMode mode);
bool uses_task_markers(TrainingMode mode);
bool is_augmented(TrainingMode mode);

struct AugmentationConfig {
  TrainingMode mode = TrainingMode::S2S;
  std::size_t m = 1;
  /// Unlabeled corpus words; required by MttU and DaU.
  std::vector<std::u32string> aux_words;
  std::uint64_t seed = 0;
};

struct TrainingCorpus {
  std::vector<SegExample> examples;
  std::vector<std::string> warnings;
};

/// `n` strings over `alphabet`. Lengths are drawn uniformly from `lengths`
/// (an empirical multiset); characters are i.i.d. uniform over the alphabet.
std::vector<std::u32string> generate_random_strings(std::u32string_view alphabet, std::size_t n,
                                                    std::span<const std::size_t> lengths,
                                                    std::uint64_t seed);

/// Characters of the labeled sources (code-point order) and the multiset of
/// their lengths; the random-string generator draws from both.
std::u32string source_alphabet(std::span<const Dataset> labeled);
std::vector<std::size_t> source_lengths(std::span<const Dataset> labeled);

/// Assembles the training examples for `cfg.mode`. Non-Xling modes take
/// exactly one labeled dataset; Xling takes one per language, each with its
/// language set.
TrainingCorpus build_training_corpus(std::span<const Dataset> labeled, const AugmentationConfig& cfg);

/// Applies the markers a model trained in `mode` expects at inference time:
/// the SEG marker for multi-task models, the dataset's language tag for
/// cross-lingual ones.
std::vector<SegExample> prepare_for_inference(const Dataset& dataset, TrainingMode mode);

struct EncodedExample {
  /// [language tag][task marker] word characters.
  std::vector<std::size_t> source;
  /// Output-space indices of the segmentation followed by <eos>.
  std::vector<std::size_t> target;
  /// Vocabulary indices fed to the decoder under teacher forcing: <bos> then
  /// the segmentation symbols.
  std::vector<std::size_t> decoder_input;
  /// Number of word characters in the source (markers excluded).
  std::size_t word_length = 0;
  /// Some source character mapped to <unk>.
  bool lossy = false;
};

/// Target characters must be in the vocabulary; source characters that are
/// not become <unk>.
EncodedExample encode_example(const Vocabulary& vocab, const SegExample& ex);
/// Source side only (targets left empty), for inference.
EncodedExample encode_source(const Vocabulary& vocab, const SegExample& ex);
/// Inverse of encode_example; <unk> decodes to U+FFFD.
SegExample decode_example(const Vocabulary& vocab, const EncodedExample& encoded);

}  // namespace morphseg::data
