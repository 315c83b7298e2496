#include "morphseg/data/stats.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <ostream>

#include "morphseg/data/utf8.hpp"

namespace morphseg::data {

CorpusStats corpus_stats(const Dataset& dataset, std::size_t top_k) {
  if (dataset.empty()) throw DataError("cannot compute statistics of an empty dataset");

  CorpusStats s;
  std::map<std::u32string, std::size_t> freq;
  for (const auto& ex : dataset.examples) {
    const auto morphs = split_morphs(ex.target);
    ++s.words;
    if (morphs.size() > 1) ++s.seg_words;
    s.morphs += morphs.size();
    s.max_morphs = std::max(s.max_morphs, morphs.size());
    for (const auto& m : morphs) ++freq[m];
  }
  s.unique_morphs = freq.size();
  s.seg_per_word = static_cast<double>(s.seg_words) / static_cast<double>(s.words);
  s.morphs_per_word = static_cast<double>(s.morphs) / static_cast<double>(s.words);

  std::vector<MorphCount> ranked;
  ranked.reserve(freq.size());
  for (const auto& [morph, count] : freq) ranked.push_back({morph, count});
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const MorphCount& a, const MorphCount& b) { return a.count > b.count; });
  ranked.resize(std::min(top_k, ranked.size()));
  s.top_morphs = std::move(ranked);
  return s;
}

void write_stats(std::ostream& out, const CorpusStats& s) {
  const auto flags = out.flags();
  out << "Words: " << s.words << '\n'
      << "SegWords: " << s.seg_words << '\n'
      << "Morphs: " << s.morphs << '\n'
      << "UniMorphs: " << s.unique_morphs << '\n'
      << std::fixed << std::setprecision(3)
      << "Seg/W: " << s.seg_per_word << '\n'
      << "Morphs/W: " << s.morphs_per_word << '\n'
      << "MaxMorphs: " << s.max_morphs << '\n';
  out.flags(flags);
  out << '\n' << "frq.\tm.\n";
  for (const auto& mc : s.top_morphs) out << mc.count << '\t' << to_utf8(mc.morph) << '\n';
}

}  // namespace morphseg::data
