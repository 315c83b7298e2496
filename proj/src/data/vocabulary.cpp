#include "morphseg/data/vocabulary.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "morphseg/data/utf8.hpp"

namespace morphseg::data {

namespace {

constexpr std::array<std::string_view, Vocabulary::kReserved> kReservedNames = {
    "<pad>", "<bos>", "<eos>", "<unk>", "<sep>", "<SEG>", "<AE>", "L=MX", "L=NA", "L=WX", "L=YN"};

}  // namespace

Vocabulary::Vocabulary(std::u32string alphabet) {
  std::sort(alphabet.begin(), alphabet.end());
  alphabet.erase(std::unique(alphabet.begin(), alphabet.end()), alphabet.end());
  std::erase(alphabet, kSeparatorChar);
  alphabet_ = std::move(alphabet);
  for (std::size_t i = 0; i < alphabet_.size(); ++i) index_.emplace(alphabet_[i], kReserved + i);
}

Vocabulary Vocabulary::build(std::span<const Dataset> datasets,
                             std::span<const std::u32string> aux_words) {
  std::set<char32_t> chars;
  for (const auto& ds : datasets) {
    for (const auto& ex : ds.examples) {
      chars.insert(ex.source.begin(), ex.source.end());
      chars.insert(ex.target.begin(), ex.target.end());
    }
  }
  for (const auto& w : aux_words) chars.insert(w.begin(), w.end());
  return Vocabulary(std::u32string(chars.begin(), chars.end()));
}

Vocabulary Vocabulary::from_symbols(std::span<const std::string> symbols) {
  if (symbols.size() < kReserved) throw DataError("vocabulary listing is missing reserved symbols");
  for (std::size_t i = 0; i < kReserved; ++i) {
    if (symbols[i] != kReservedNames[i]) {
      throw DataError("vocabulary listing has '" + symbols[i] + "' where '" +
                      std::string(kReservedNames[i]) + "' is expected");
    }
  }
  std::u32string alphabet;
  for (std::size_t i = kReserved; i < symbols.size(); ++i) {
    const std::u32string c = to_u32(symbols[i]);
    if (c.size() != 1) throw DataError("vocabulary symbol '" + symbols[i] + "' is not one character");
    alphabet.push_back(c.front());
  }
  Vocabulary v(alphabet);
  if (v.alphabet_ != alphabet) throw DataError("vocabulary listing is not in code-point order");
  return v;
}

std::optional<std::size_t> Vocabulary::char_index(char32_t c) const {
  if (c == kSeparatorChar) return kSeparator;
  auto it = index_.find(c);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocabulary::index_or_unk(char32_t c) const { return char_index(c).value_or(kUnk); }

std::size_t Vocabulary::marker_index(Task task) {
  return task == Task::Segment ? kSegMarker : kAeMarker;
}

std::size_t Vocabulary::language_index(Language lang) {
  return kFirstLanguage + static_cast<std::size_t>(lang);
}

std::string Vocabulary::symbol_name(std::size_t index) const {
  if (index < kReserved) return std::string(kReservedNames[index]);
  return to_utf8(alphabet_.at(index - kReserved));
}

std::vector<std::string> Vocabulary::symbols() const {
  std::vector<std::string> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(symbol_name(i));
  return out;
}

std::optional<char32_t> Vocabulary::character(std::size_t index) const {
  if (index == kSeparator) return kSeparatorChar;
  if (index >= kReserved && index < size()) return alphabet_[index - kReserved];
  return std::nullopt;
}

std::size_t Vocabulary::output_to_symbol(std::size_t output) const {
  if (output == kOutputEos) return kEos;
  if (output == kOutputSeparator) return kSeparator;
  if (output < output_size()) return kReserved + (output - 2);
  throw std::out_of_range("output index " + std::to_string(output) + " outside vocabulary");
}

std::optional<std::size_t> Vocabulary::symbol_to_output(std::size_t symbol) const {
  if (symbol == kEos) return kOutputEos;
  if (symbol == kSeparator) return kOutputSeparator;
  if (symbol >= kReserved && symbol < size()) return 2 + (symbol - kReserved);
  return std::nullopt;
}

}  // namespace morphseg::data
