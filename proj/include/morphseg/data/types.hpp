#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace morphseg::data {

/// Separator between morphs, both on disk and inside SegExample::target.
inline constexpr char32_t kSeparatorChar = U'|';

/// Malformed input data (bad encoding, missing files, empty corpora).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A dataset line that violates the file format. Carries the 1-based line.
class ParseError : public DataError {
 public:
  ParseError(std::string source, std::size_t line, const std::string& what)
      : DataError(source + ":" + std::to_string(line) + ": " + what),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

enum class Task { Segment, Autoencode };
enum class Language { Mexicanero, Nahuatl, Wixarika, YoremNokki };

inline constexpr Language kAllLanguages[] = {Language::Mexicanero, Language::Nahuatl,
                                             Language::Wixarika, Language::YoremNokki};

/// "MX", "NA", "WX", "YN".
std::string_view language_code(Language lang);
/// Accepts the two-letter codes and the short names mex/nah/wix/yn
/// (case-insensitive) as well as the full language names.
std::optional<Language> parse_language(std::string_view text);

/// One word and its segmentation. `target` holds the word's characters with
/// kSeparatorChar between morphs.
struct SegExample {
  std::u32string source;
  std::u32string target;
  std::optional<Task> task;
  std::optional<Language> language;

  bool operator==(const SegExample&) const = default;
};

struct Dataset {
  std::vector<SegExample> examples;
  std::optional<Language> language;

  std::size_t size() const noexcept { return examples.size(); }
  bool empty() const noexcept { return examples.empty(); }
};

/// The target with separators removed.
std::u32string strip_separators(std::u32string_view segmented);
/// The separator-delimited morphs of a segmentation.
std::vector<std::u32string> split_morphs(std::u32string_view segmented);

}  // namespace morphseg::data
