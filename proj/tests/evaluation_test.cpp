#include <gtest/gtest.h>

#include <json.hpp>
#include <random>
#include <sstream>

#include "morphseg/evaluation/metrics.hpp"
#include "support/support.hpp"

namespace morphseg::eval {
namespace {

using Strings = std::vector<std::u32string>;

TEST(Boundaries, WorkedExample) {
  EXPECT_EQ(boundary_positions(U"ne|p+|ti|kuye|kai"), (BoundarySet{2, 4, 6, 10}));
  EXPECT_EQ(boundary_positions(U"malo"), BoundarySet{});
}

TEST(Boundaries, MalformedPredictions) {
  EXPECT_EQ(boundary_positions(U"|ab||c|"), BoundarySet{2});
  EXPECT_EQ(boundary_positions(U"|"), BoundarySet{});
  EXPECT_EQ(boundary_positions(U""), BoundarySet{});
}

TEST(Accuracy, ExactMatchOnly) {
  const Strings pred{U"ne|pa", U"nepa", U"ma|lo"}, gold{U"ne|pa", U"ne|pa", U"malo"};
  EXPECT_DOUBLE_EQ(token_accuracy(pred, gold), 1.0 / 3.0);
  EXPECT_THROW(token_accuracy(Strings{}, Strings{}), std::invalid_argument);
  EXPECT_THROW(token_accuracy(pred, Strings{U"a"}), std::invalid_argument);
}

TEST(BorderF1, SingleHandWorkedPair) {
  // gold {2, 4, 6, 10}, predicted {2, 6, 8}
  const Strings pred{U"ne|p+ti|ku|yekai"}, gold{U"ne|p+|ti|kuye|kai"};
  const BorderScores s = border_f1(pred, gold);
  EXPECT_EQ(s.matched, 2u);
  EXPECT_EQ(s.predicted, 3u);
  EXPECT_EQ(s.gold, 4u);
  EXPECT_DOUBLE_EQ(s.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.recall, 0.5);
  EXPECT_DOUBLE_EQ(s.f1, 4.0 / 7.0);
}

TEST(BorderF1, MicroAveraged) {
  const Strings pred{U"a|b", U"cd", U"e|f|g"}, gold{U"a|b", U"c|d", U"ef|g"};
  const BorderScores s = border_f1(pred, gold);
  EXPECT_EQ(s.matched, 2u);
  EXPECT_EQ(s.predicted, 3u);
  EXPECT_EQ(s.gold, 3u);
  EXPECT_DOUBLE_EQ(s.f1, 2.0 / 3.0);
}

TEST(BorderF1, DegenerateCounts) {
  const BorderScores none = border_f1(Strings{U"ab"}, Strings{U"ab"});
  EXPECT_EQ(none.f1, 1.0);
  EXPECT_EQ(none.precision, 1.0);
  const BorderScores no_pred = border_f1(Strings{U"ab"}, Strings{U"a|b"});
  EXPECT_EQ(no_pred.precision, 0.0);
  EXPECT_EQ(no_pred.f1, 0.0);
  const BorderScores no_gold = border_f1(Strings{U"a|b"}, Strings{U"ab"});
  EXPECT_EQ(no_gold.recall, 0.0);
  EXPECT_EQ(no_gold.f1, 0.0);
}

TEST(BorderF1, InsertedCharacterShiftsLaterBoundaries) {
  const BorderScores s = border_f1(Strings{U"ab|xcd|e"}, Strings{U"ab|cd|e"});
  EXPECT_EQ(s.matched, 1u);
}

TEST(BorderF1, AgreesWithCharacterWalkOracle) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    Strings pred, gold;
    const std::size_t n = 1 + rng() % 8;
    for (std::size_t i = 0; i < n; ++i) {
      pred.push_back(testing::random_segmentation(rng, U"abc", rng() % 2 == 0));
      gold.push_back(testing::random_segmentation(rng, U"abc", true));
    }
    const BorderScores s = border_f1(pred, gold);
    const testing::OracleScores o = testing::brute_force_border(pred, gold);
    ASSERT_EQ(s.matched, o.matched);
    ASSERT_EQ(s.predicted, o.predicted);
    ASSERT_EQ(s.gold, o.gold);
    ASSERT_DOUBLE_EQ(s.f1, o.f1);
  }
}

TEST(Evaluate, ReportAndJson) {
  const Strings words{U"nepa", U"malo"}, pred{U"ne|pa", U"ma|lo"}, gold{U"ne|pa", U"malo"};
  const EvalReport r = evaluate(words, pred, gold);
  EXPECT_EQ(r.correct, 1u);
  EXPECT_EQ(r.total, 2u);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.5);
  ASSERT_EQ(r.examples.size(), 2u);
  EXPECT_FALSE(r.examples[1].correct);
  EXPECT_EQ(r.examples[1].predicted, 1u);

  std::ostringstream text;
  write_report(text, r);
  EXPECT_NE(text.str().find("accuracy: 0.5000"), std::string::npos) << text.str();

  const auto j = nlohmann::json::parse(report_json(r));
  EXPECT_DOUBLE_EQ(j["accuracy"].get<double>(), 0.5);
  EXPECT_EQ(j["examples"].size(), 2u);
  EXPECT_EQ(j["examples"][1]["prediction"], "ma|lo");
  EXPECT_FALSE(nlohmann::json::parse(report_json(r, false)).contains("examples"));
}

}  // namespace
}  // namespace morphseg::eval
