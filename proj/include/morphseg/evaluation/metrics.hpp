#pragma once

#include <cstddef>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace morphseg::eval {

/// Morph boundaries of a segmentation, each identified by the number of
/// non-separator characters before it. For "ne|p+|ti" this is {2, 4}.
using BoundarySet = std::set<std::size_t>;

/// Repeated separators count once; separators at either end of the string
/// (position 0 or the full length) are not boundaries.
BoundarySet boundary_positions(std::u32string_view segmented);

/// Fraction of exact string matches. Throws std::invalid_argument on empty
/// or differently sized lists.
double token_accuracy(std::span<const std::u32string> predictions, std::span<const std::u32string> golds);

struct BorderScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t matched = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;
};

/// Micro-averaged boundary precision/recall/F1. Boundary positions are
/// computed on each string independently, so an inserted or deleted
/// character shifts (and thereby misses) every later boundary. With no
/// predicted and no gold boundaries at all the scores are 1.
BorderScores border_f1(std::span<const std::u32string> predictions, std::span<const std::u32string> golds);

struct ExampleRecord {
  std::u32string word;
  std::u32string prediction;
  std::u32string gold;
  bool correct = false;
  std::size_t matched = 0;
  std::size_t predicted = 0;
  std::size_t gold_boundaries = 0;
};

struct EvalReport {
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  BorderScores border;
  std::vector<ExampleRecord> examples;
};

EvalReport evaluate(std::span<const std::u32string> words, std::span<const std::u32string> predictions,
                    std::span<const std::u32string> golds);

/// "key: value" lines (accuracy, precision, recall, f1 and the counts).
void write_report(std::ostream& out, const EvalReport& report);
/// JSON object with the same fields plus per-example records.
std::string report_json(const EvalReport& report, bool include_examples = true);

}  // namespace morphseg::eval
