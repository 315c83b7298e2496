#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "morphseg/data/types.hpp"

namespace morphseg::data {

/// Reads "<word>\t<segmentation>" lines; '#' lines and blank lines are
/// skipped. Every example is marked as a segmentation task and carries
/// `language` when given.
Dataset load_dataset(const std::filesystem::path& path, std::optional<Language> language = std::nullopt);
Dataset parse_dataset(std::istream& in, const std::string& source_name,
                      std::optional<Language> language = std::nullopt);

/// Inverse of parse_dataset (comments and blank lines are not preserved).
void write_dataset(std::ostream& out, const Dataset& dataset);

/// One word per line; blank lines skipped, surrounding whitespace trimmed.
std::vector<std::u32string> load_word_list(const std::filesystem::path& path);
std::vector<std::u32string> parse_word_list(std::istream& in, const std::string& source_name);

/// Checks the separator rules of a segmentation (no empty morphs).
bool well_formed_segmentation(std::u32string_view segmented);

}  // namespace morphseg::data
