#include "morphseg/data/corpus.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <unordered_set>

#include "morphseg/data/utf8.hpp"

namespace morphseg::data {

std::string_view mode_name(TrainingMode mode) {
  switch (mode) {
    case TrainingMode::S2S: return "s2s";
    case TrainingMode::MttU: return "mtt-u";
    case TrainingMode::MttR: return "mtt-r";
    case TrainingMode::DaU: return "da-u";
    case TrainingMode::DaR: return "da-r";
    case TrainingMode::Xling: return "xling";
  }
  return "?";
}

std::optional<TrainingMode> parse_mode(std::string_view text) {
  std::string t(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) {
    return c == '_' ? '-' : static_cast<char>(std::tolower(c));
  });
  for (auto mode : {TrainingMode::S2S, TrainingMode::MttU, TrainingMode::MttR, TrainingMode::DaU,
                    TrainingMode::DaR, TrainingMode::Xling}) {
    if (t == mode_name(mode)) return mode;
  }
  return std::nullopt;
}

bool uses_corpus_words(TrainingMode mode) {
  return mode == TrainingMode::MttU || mode == TrainingMode::DaU;
}
bool uses_random_strings(TrainingMode mode) {
  return mode == TrainingMode::MttR || mode == TrainingMode::DaR;
}
bool uses_task_markers(TrainingMode mode) {
  return mode == TrainingMode::MttU || mode == TrainingMode::MttR;
}
bool is_augmented(TrainingMode mode) { return uses_corpus_words(mode) || uses_random_strings(mode); }

std::vector<std::u32string> generate_random_strings(std::u32string_view alphabet, std::size_t n,
                                                    std::span<const std::size_t> lengths,
                                                    std::uint64_t seed) {
  if (alphabet.empty()) throw std::invalid_argument("generate_random_strings: empty alphabet");
  if (n > 0 && lengths.empty()) throw std::invalid_argument("generate_random_strings: no lengths to draw from");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_length(0, lengths.empty() ? 0 : lengths.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_char(0, alphabet.size() - 1);
  std::vector<std::u32string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t len = std::max<std::size_t>(1, lengths[pick_length(rng)]);
    std::u32string s(len, U'\0');
    for (auto& c : s) c = alphabet[pick_char(rng)];
    out.push_back(std::move(s));
  }
  return out;
}

std::u32string source_alphabet(std::span<const Dataset> labeled) {
  std::set<char32_t> chars;
  for (const auto& ds : labeled) {
    for (const auto& ex : ds.examples) chars.insert(ex.source.begin(), ex.source.end());
  }
  return {chars.begin(), chars.end()};
}

std::vector<std::size_t> source_lengths(std::span<const Dataset> labeled) {
  std::vector<std::size_t> lengths;
  for (const auto& ds : labeled) {
    for (const auto& ex : ds.examples) lengths.push_back(ex.source.size());
  }
  return lengths;
}

namespace {

// Deduplicated corpus words, shuffled and taken without replacement; once the
// pool is exhausted the remainder is drawn with replacement.
std::vector<std::u32string> sample_corpus_words(const std::vector<std::u32string>& words, std::size_t n,
                                                std::mt19937_64& rng, std::vector<std::string>& warnings) {
  std::vector<std::u32string> pool;
  std::unordered_set<std::u32string> seen;
  std::size_t rejected = 0;
  for (const auto& w : words) {
    if (w.empty() || w.find(kSeparatorChar) != std::u32string::npos) {
      ++rejected;
      continue;
    }
    if (seen.insert(w).second) pool.push_back(w);
  }
  if (rejected) {
    warnings.push_back(std::to_string(rejected) + " auxiliary words were empty or contained '|' and were skipped");
  }
  if (pool.empty()) throw DataError("auxiliary corpus has no usable words");

  std::shuffle(pool.begin(), pool.end(), rng);
  std::vector<std::u32string> out(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(std::min(n, pool.size())));
  if (n > pool.size()) {
    warnings.push_back("auxiliary corpus has " + std::to_string(pool.size()) + " distinct words but " +
                       std::to_string(n) + " are needed; sampling the rest with replacement");
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    while (out.size() < n) out.push_back(pool[pick(rng)]);
  }
  return out;
}

}  // namespace

TrainingCorpus build_training_corpus(std::span<const Dataset> labeled, const AugmentationConfig& cfg) {
  if (cfg.m < 1) throw std::invalid_argument("augmentation multiplier m must be at least 1");
  if (labeled.empty()) throw std::invalid_argument("no labeled data");

  TrainingCorpus corpus;
  if (cfg.mode == TrainingMode::Xling) {
    for (const auto& ds : labeled) {
      if (!ds.language) throw std::invalid_argument("cross-lingual training needs a language for every dataset");
      for (auto ex : ds.examples) {
        ex.language = ds.language;
        ex.task.reset();
        corpus.examples.push_back(std::move(ex));
      }
    }
    if (corpus.examples.empty()) throw DataError("labeled training data is empty");
    return corpus;
  }

  if (labeled.size() != 1) {
    throw std::invalid_argument(std::string(mode_name(cfg.mode)) + " training takes exactly one labeled dataset");
  }
  const Dataset& train = labeled.front();
  if (train.empty()) throw DataError("labeled training data is empty");

  const bool marked = uses_task_markers(cfg.mode);
  for (auto ex : train.examples) {
    ex.task = marked ? std::optional<Task>(Task::Segment) : std::nullopt;
    ex.language.reset();
    corpus.examples.push_back(std::move(ex));
  }
  if (!is_augmented(cfg.mode)) return corpus;

  const std::size_t n_aux = cfg.m * train.size();
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::u32string> aux;
  if (uses_corpus_words(cfg.mode)) {
    if (cfg.aux_words.empty()) {
      throw std::invalid_argument(std::string(mode_name(cfg.mode)) + " needs an auxiliary word list");
    }
    aux = sample_corpus_words(cfg.aux_words, n_aux, rng, corpus.warnings);
  } else {
    const std::u32string alphabet = source_alphabet(labeled);
    const std::vector<std::size_t> lengths = source_lengths(labeled);
    aux = generate_random_strings(alphabet, n_aux, lengths, rng());
  }
  for (auto& w : aux) {
    SegExample ex;
    ex.source = w;
    ex.target = std::move(w);
    if (marked) ex.task = Task::Autoencode;
    corpus.examples.push_back(std::move(ex));
  }
  return corpus;
}

std::vector<SegExample> prepare_for_inference(const Dataset& dataset, TrainingMode mode) {
  if (mode == TrainingMode::Xling && !dataset.language) {
    throw std::invalid_argument("a cross-lingual model needs the language of the data");
  }
  std::vector<SegExample> out;
  out.reserve(dataset.size());
  for (auto ex : dataset.examples) {
    ex.task = uses_task_markers(mode) ? std::optional<Task>(Task::Segment) : std::nullopt;
    ex.language = mode == TrainingMode::Xling ? dataset.language : std::nullopt;
    out.push_back(std::move(ex));
  }
  return out;
}

EncodedExample encode_source(const Vocabulary& vocab, const SegExample& ex) {
  EncodedExample enc;
  if (ex.language) enc.source.push_back(Vocabulary::language_index(*ex.language));
  if (ex.task) enc.source.push_back(Vocabulary::marker_index(*ex.task));
  for (char32_t c : ex.source) {
    const auto idx = vocab.char_index(c);
    if (!idx || *idx == Vocabulary::kSeparator) {
      enc.source.push_back(Vocabulary::kUnk);
      enc.lossy = true;
    } else {
      enc.source.push_back(*idx);
    }
  }
  enc.word_length = ex.source.size();
  return enc;
}

EncodedExample encode_example(const Vocabulary& vocab, const SegExample& ex) {
  EncodedExample enc = encode_source(vocab, ex);
  enc.decoder_input.push_back(Vocabulary::kBos);
  for (char32_t c : ex.target) {
    const auto idx = vocab.char_index(c);
    if (!idx) {
      throw DataError("target character '" + to_utf8(c) + "' of '" + to_utf8(ex.target) +
                      "' is not in the vocabulary");
    }
    enc.target.push_back(*vocab.symbol_to_output(*idx));
    enc.decoder_input.push_back(*idx);
  }
  enc.target.push_back(Vocabulary::kOutputEos);
  return enc;
}

SegExample decode_example(const Vocabulary& vocab, const EncodedExample& encoded) {
  SegExample ex;
  for (std::size_t idx : encoded.source) {
    if (idx >= Vocabulary::kFirstLanguage && idx < Vocabulary::kReserved) {
      ex.language = static_cast<Language>(idx - Vocabulary::kFirstLanguage);
    } else if (idx == Vocabulary::kSegMarker) {
      ex.task = Task::Segment;
    } else if (idx == Vocabulary::kAeMarker) {
      ex.task = Task::Autoencode;
    } else if (idx == Vocabulary::kUnk) {
      ex.source.push_back(U'�');
    } else {
      ex.source.push_back(vocab.character(idx).value_or(U'�'));
    }
  }
  for (std::size_t out : encoded.target) {
    if (out == Vocabulary::kOutputEos) break;
    ex.target.push_back(*vocab.character(vocab.output_to_symbol(out)));
  }
  return ex;
}

}  // namespace morphseg::data
