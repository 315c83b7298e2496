#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "morphseg/data/types.hpp"

namespace morphseg::data {

struct MorphCount {
  std::u32string morph;
  std::size_t count = 0;
};

struct CorpusStats {
  std::size_t words = 0;
  /// Words with more than one morph.
  std::size_t seg_words = 0;
  std::size_t morphs = 0;
  std::size_t unique_morphs = 0;
  double seg_per_word = 0.0;
  double morphs_per_word = 0.0;
  std::size_t max_morphs = 0;
  /// Most frequent morphs, by count then code-point order.
  std::vector<MorphCount> top_morphs;
};

CorpusStats corpus_stats(const Dataset& dataset, std::size_t top_k = 20);

/// Key/value block followed by a frequency/morph table.
void write_stats(std::ostream& out, const CorpusStats& stats);

}  // namespace morphseg::data
