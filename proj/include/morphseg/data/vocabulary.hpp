#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "morphseg/data/types.hpp"

namespace morphseg::data {

/// Symbol <-> index bijection. Reserved symbols occupy the first indices in
/// a fixed order, followed by the alphabet in code-point order:
///
///   0 <pad>  1 <bos>  2 <eos>  3 <unk>  4 <sep>  5 <SEG>  6 <AE>
///   7 L=MX   8 L=NA   9 L=WX  10 L=YN  11.. alphabet
///
/// The decoder predicts over a smaller "output" space: <eos>, <sep> and the
/// alphabet, in that order.
class Vocabulary {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kBos = 1;
  static constexpr std::size_t kEos = 2;
  static constexpr std::size_t kUnk = 3;
  static constexpr std::size_t kSeparator = 4;
  static constexpr std::size_t kSegMarker = 5;
  static constexpr std::size_t kAeMarker = 6;
  static constexpr std::size_t kFirstLanguage = 7;
  static constexpr std::size_t kReserved = 11;

  static constexpr std::size_t kOutputEos = 0;
  static constexpr std::size_t kOutputSeparator = 1;

  Vocabulary() : Vocabulary(std::u32string{}) {}
  /// Alphabet characters are sorted and deduplicated; the separator is
  /// never part of the alphabet.
  explicit Vocabulary(std::u32string alphabet);

  /// Alphabet = every character in sources, targets and aux words.
  static Vocabulary build(std::span<const Dataset> datasets,
                          std::span<const std::u32string> aux_words = {});
  /// Restores a vocabulary from its symbol listing (see symbols()).
  static Vocabulary from_symbols(std::span<const std::string> symbols);

  std::size_t size() const noexcept { return kReserved + alphabet_.size(); }
  const std::u32string& alphabet() const noexcept { return alphabet_; }

  std::optional<std::size_t> char_index(char32_t c) const;
  /// Separator maps to kSeparator, unknown characters to kUnk.
  std::size_t index_or_unk(char32_t c) const;
  static std::size_t marker_index(Task task);
  static std::size_t language_index(Language lang);

  /// Printable name of a symbol: "<pad>", "L=YN", or the UTF-8 character.
  std::string symbol_name(std::size_t index) const;
  std::vector<std::string> symbols() const;

  /// Character for an alphabet index, kSeparatorChar for kSeparator.
  std::optional<char32_t> character(std::size_t index) const;

  std::size_t output_size() const noexcept { return 2 + alphabet_.size(); }
  std::size_t output_to_symbol(std::size_t output) const;
  std::optional<std::size_t> symbol_to_output(std::size_t symbol) const;

  bool operator==(const Vocabulary& other) const { return alphabet_ == other.alphabet_; }

 private:
  std::u32string alphabet_;
  std::unordered_map<char32_t, std::size_t> index_;
};

}  // namespace morphseg::data
