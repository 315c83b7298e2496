#include "morphseg/evaluation/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "morphseg/data/types.hpp"
#include "morphseg/data/utf8.hpp"

namespace morphseg::eval {

using data::kSeparatorChar;

BoundarySet boundary_positions(std::u32string_view segmented) {
  BoundarySet positions;
  std::size_t letters = 0;
  for (char32_t c : segmented) {
    if (c == kSeparatorChar) {
      if (letters > 0) positions.insert(letters);
    } else {
      ++letters;
    }
  }
  positions.erase(letters);
  return positions;
}

namespace {

void check_aligned(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": " + std::to_string(a) + " predictions for " +
                                std::to_string(b) + " gold segmentations");
  }
}

std::size_t count_matches(const BoundarySet& a, const BoundarySet& b) {
  std::size_t n = 0;
  for (std::size_t p : a) n += b.contains(p) ? 1 : 0;
  return n;
}

BorderScores finish(std::size_t matched, std::size_t predicted, std::size_t gold) {
  BorderScores s;
  s.matched = matched;
  s.predicted = predicted;
  s.gold = gold;
  if (predicted == 0 && gold == 0) {
    s.precision = s.recall = s.f1 = 1.0;
    return s;
  }
  s.precision = predicted ? static_cast<double>(matched) / static_cast<double>(predicted) : 0.0;
  s.recall = gold ? static_cast<double>(matched) / static_cast<double>(gold) : 0.0;
  s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

}  // namespace

double token_accuracy(std::span<const std::u32string> predictions, std::span<const std::u32string> golds) {
  check_aligned(predictions.size(), golds.size(), "token_accuracy");
  if (golds.empty()) throw std::invalid_argument("token_accuracy: empty lists");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < golds.size(); ++i) correct += predictions[i] == golds[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(golds.size());
}

BorderScores border_f1(std::span<const std::u32string> predictions, std::span<const std::u32string> golds) {
  check_aligned(predictions.size(), golds.size(), "border_f1");
  std::size_t matched = 0, predicted = 0, gold = 0;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    const BoundarySet p = boundary_positions(predictions[i]);
    const BoundarySet g = boundary_positions(golds[i]);
    matched += count_matches(p, g);
    predicted += p.size();
    gold += g.size();
  }
  return finish(matched, predicted, gold);
}

EvalReport evaluate(std::span<const std::u32string> words, std::span<const std::u32string> predictions,
                    std::span<const std::u32string> golds) {
  check_aligned(predictions.size(), golds.size(), "evaluate");
  check_aligned(words.size(), golds.size(), "evaluate");
  EvalReport r;
  r.accuracy = token_accuracy(predictions, golds);
  r.border = border_f1(predictions, golds);
  r.total = golds.size();
  for (std::size_t i = 0; i < golds.size(); ++i) {
    const BoundarySet p = boundary_positions(predictions[i]);
    const BoundarySet g = boundary_positions(golds[i]);
    ExampleRecord rec{words[i], predictions[i], golds[i], predictions[i] == golds[i],
                      count_matches(p, g), p.size(), g.size()};
    r.correct += rec.correct ? 1 : 0;
    r.examples.push_back(std::move(rec));
  }
  return r;
}

void write_report(std::ostream& out, const EvalReport& r) {
  const auto flags = out.flags();
  out << std::fixed << std::setprecision(4) << "accuracy: " << r.accuracy << '\n'
      << "precision: " << r.border.precision << '\n'
      << "recall: " << r.border.recall << '\n'
      << "f1: " << r.border.f1 << '\n';
  out.flags(flags);
  out << "correct: " << r.correct << '\n'
      << "total: " << r.total << '\n'
      << "matched_boundaries: " << r.border.matched << '\n'
      << "predicted_boundaries: " << r.border.predicted << '\n'
      << "gold_boundaries: " << r.border.gold << '\n';
}

std::string report_json(const EvalReport& r, bool include_examples) {
  nlohmann::ordered_json j;
  j["accuracy"] = r.accuracy;
  j["precision"] = r.border.precision;
  j["recall"] = r.border.recall;
  j["f1"] = r.border.f1;
  j["correct"] = r.correct;
  j["total"] = r.total;
  j["matched_boundaries"] = r.border.matched;
  j["predicted_boundaries"] = r.border.predicted;
  j["gold_boundaries"] = r.border.gold;
  if (include_examples) {
    auto& ex = j["examples"] = nlohmann::ordered_json::array();
    for (const auto& e : r.examples) {
      ex.push_back({{"word", data::to_utf8(e.word)},
                    {"prediction", data::to_utf8(e.prediction)},
                    {"gold", data::to_utf8(e.gold)},
                    {"correct", e.correct},
                    {"matched", e.matched},
                    {"predicted", e.predicted},
                    {"gold_boundaries", e.gold_boundaries}});
    }
  }
  return j.dump(2);
}

}  // namespace morphseg::eval
