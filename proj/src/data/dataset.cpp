#include "morphseg/data/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>

#include "morphseg/data/utf8.hpp"

namespace morphseg::data {

std::string_view language_code(Language lang) {
  switch (lang) {
    case Language::Mexicanero: return "MX";
    case Language::Nahuatl: return "NA";
    case Language::Wixarika: return "WX";
    case Language::YoremNokki: return "YN";
  }
  return "??";
}

std::optional<Language> parse_language(std::string_view text) {
  std::string t(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t.starts_with("l=")) t.erase(0, 2);
  if (t == "mx" || t == "mex" || t == "mexicanero") return Language::Mexicanero;
  if (t == "na" || t == "nah" || t == "nahuatl") return Language::Nahuatl;
  if (t == "wx" || t == "wix" || t == "wixarika") return Language::Wixarika;
  if (t == "yn" || t == "yorem" || t == "yorem_nokki" || t == "yoremnokki") return Language::YoremNokki;
  return std::nullopt;
}

std::u32string strip_separators(std::u32string_view segmented) {
  std::u32string out;
  out.reserve(segmented.size());
  for (char32_t c : segmented) {
    if (c != kSeparatorChar) out.push_back(c);
  }
  return out;
}

std::vector<std::u32string> split_morphs(std::u32string_view segmented) {
  std::vector<std::u32string> morphs;
  std::u32string current;
  for (char32_t c : segmented) {
    if (c == kSeparatorChar) {
      if (!current.empty()) morphs.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) morphs.push_back(std::move(current));
  return morphs;
}

bool well_formed_segmentation(std::u32string_view segmented) {
  if (segmented.empty()) return false;
  if (segmented.front() == kSeparatorChar || segmented.back() == kSeparatorChar) return false;
  for (std::size_t i = 1; i < segmented.size(); ++i) {
    if (segmented[i] == kSeparatorChar && segmented[i - 1] == kSeparatorChar) return false;
  }
  return true;
}

namespace {

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

Dataset parse_dataset(std::istream& in, const std::string& source_name,
                      std::optional<Language> language) {
  Dataset ds;
  ds.language = language;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty() || line.front() == '#') continue;

    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(source_name, lineno, "missing TAB between word and segmentation");
    if (line.find('\t', tab + 1) != std::string::npos) {
      throw ParseError(source_name, lineno, "more than one TAB");
    }
    SegExample ex;
    try {
      ex.source = to_u32(std::string_view(line).substr(0, tab));
      ex.target = to_u32(std::string_view(line).substr(tab + 1));
    } catch (const DataError& e) {
      throw ParseError(source_name, lineno, e.what());
    }
    if (ex.source.empty()) throw ParseError(source_name, lineno, "empty word");
    if (ex.source.find(kSeparatorChar) != std::u32string::npos) {
      throw ParseError(source_name, lineno, "word contains the separator '|'");
    }
    if (!well_formed_segmentation(ex.target)) {
      throw ParseError(source_name, lineno, "segmentation has an empty morph (leading, trailing or doubled '|')");
    }
    if (strip_separators(ex.target) != ex.source) {
      throw ParseError(source_name, lineno, "segmentation does not spell the word once separators are removed");
    }
    ex.task = Task::Segment;
    ex.language = language;
    ds.examples.push_back(std::move(ex));
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path, std::optional<Language> language) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path.string() + "'");
  return parse_dataset(in, path.string(), language);
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
  for (const auto& ex : dataset.examples) {
    out << to_utf8(ex.source) << '\t' << to_utf8(ex.target) << '\n';
  }
}

std::vector<std::u32string> parse_word_list(std::istream& in, const std::string& source_name) {
  std::vector<std::u32string> words;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string word = trim(line);
    if (word.empty()) continue;
    try {
      words.push_back(to_u32(word));
    } catch (const DataError& e) {
      throw ParseError(source_name, lineno, e.what());
    }
  }
  return words;
}

std::vector<std::u32string> load_word_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open word list '" + path.string() + "'");
  return parse_word_list(in, path.string());
}

}  // namespace morphseg::data
