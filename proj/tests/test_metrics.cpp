#include <gtest/gtest.h>

#include <cmath>

#include "tablesage/errors.hpp"
#include "tablesage/metrics.hpp"
#include "test_support.hpp"

namespace tablesage {
namespace {

ColumnRecord rec(const std::string& gold, OutcomeKind kind, std::optional<std::string> label = std::nullopt) {
  static std::size_t counter = 0;
  ColumnRecord r;
  r.table_id = "t";
  r.column_index = counter++;
  r.gold = gold;
  r.outcome = {kind, label, label.value_or("")};
  return r;
}

// 6 correct, 2 wrong in-vocabulary, 2 abstentions.
std::vector<ColumnRecord> worked_case() {
  std::vector<ColumnRecord> r;
  for (int i = 0; i < 6; ++i) {
    r.push_back(rec("Date", OutcomeKind::kMatched, "Date"));
  }
  r.push_back(rec("Date", OutcomeKind::kMatched, "Time"));
  r.push_back(rec("Time", OutcomeKind::kSynonymMatched, "Date"));
  r.push_back(rec("Time", OutcomeKind::kIDontKnow));
  r.push_back(rec("Time", OutcomeKind::kIDontKnow));
  return r;
}

TEST(Metrics, WorkedCase) {
  auto records = worked_case();
  auto m = compute_micro(records);
  auto oracle = testing::brute_force_micro(records);
  EXPECT_NEAR(m.precision, oracle.precision, 1e-12);
  EXPECT_NEAR(m.recall, oracle.recall, 1e-12);
  EXPECT_EQ(to_percent(m.precision), 75.00);
  EXPECT_EQ(to_percent(m.recall), 60.00);
  EXPECT_EQ(to_percent(m.f1), 66.67);
  EXPECT_EQ(format_percent(to_percent(m.f1)), "66.67");
  auto e = evaluate(records);
  EXPECT_EQ(e.n_total, 10u);
  EXPECT_EQ(e.n_predicted, 8u);
  EXPECT_EQ(e.n_correct, 6u);
  EXPECT_EQ(e.n_idk, 2u);
  EXPECT_EQ(e.n_synonym, 1u);
}

TEST(Metrics, PerfectAndAllAbstain) {
  std::vector<ColumnRecord> perfect;
  for (int i = 0; i < 250; ++i) {
    perfect.push_back(rec("Date", OutcomeKind::kMatched, "Date"));
  }
  auto m = compute_micro(perfect);
  EXPECT_EQ(to_percent(m.precision), 100.0);
  EXPECT_EQ(to_percent(m.f1), 100.0);

  std::vector<ColumnRecord> idk = {rec("Date", OutcomeKind::kIDontKnow), rec("Time", OutcomeKind::kIDontKnow)};
  auto z = compute_micro(idk);
  EXPECT_EQ(z, (MicroScores{0.0, 0.0, 0.0}));
  EXPECT_THROW(compute_micro({}), ArgumentError);
}

TEST(Metrics, MatchesBruteForceOnRandomSets) {
  std::mt19937_64 rng(99);
  const std::vector<std::string> labels = {"Date", "Time", "Telephone", "Country", "email"};
  for (int trial = 0; trial < 200; ++trial) {
    auto records = testing::random_records(rng, labels, 1 + rng() % 1000);
    auto m = compute_micro(records);
    auto o = testing::brute_force_micro(records);
    ASSERT_NEAR(m.precision, o.precision, 1e-12);
    ASSERT_NEAR(m.recall, o.recall, 1e-12);
    ASSERT_NEAR(m.f1, o.f1, 1e-12);
    if (m.precision + m.recall > 0) {
      ASSERT_NEAR(m.f1, 2 * m.precision * m.recall / (m.precision + m.recall), 1e-9);
    }
    auto e = evaluate(records);
    ASSERT_EQ(e.n_predicted + e.n_idk + e.n_oov + e.n_missing, e.n_total);
    std::size_t tp = 0;
    for (const auto& [label, c] : e.per_label) {
      tp += c.tp;
    }
    ASSERT_EQ(tp, e.n_correct);
  }
}

TEST(Metrics, AddingCorrectRecordNeverHurts) {
  std::mt19937_64 rng(5);
  const std::vector<std::string> labels = {"Date", "Time", "Telephone"};
  for (int trial = 0; trial < 100; ++trial) {
    auto records = testing::random_records(rng, labels, 1 + rng() % 50);
    auto before = compute_micro(records);
    records.push_back(rec("Date", OutcomeKind::kMatched, "Date"));
    auto after = compute_micro(records);
    EXPECT_GE(after.precision + 1e-12, before.precision);
    EXPECT_GE(after.recall + 1e-12, before.recall);
    EXPECT_GE(after.f1 + 1e-12, before.f1);
  }
}

TEST(Metrics, PerLabelF1) {
  std::vector<ColumnRecord> records = {rec("Date", OutcomeKind::kMatched, "Date"),
                                       rec("Date", OutcomeKind::kMatched, "Time"),
                                       rec("Country", OutcomeKind::kIDontKnow)};
  auto f1 = per_label_f1(records);
  ASSERT_EQ(f1.size(), 3u);
  // Date: tp 1, fn 1. Time: fp 1. Country: fn 1.
  EXPECT_NEAR(f1["Date"], 2.0 / 3.0, 1e-12);
  EXPECT_EQ(f1["Time"], 0.0);
  EXPECT_EQ(f1["Country"], 0.0);
  EXPECT_EQ(f1.count("email"), 0u);
  EXPECT_EQ(label_f1({0, 0, 0}), 0.0);
}

TEST(Metrics, OovSummary) {
  std::vector<ColumnRecord> records = {rec("Time", OutcomeKind::kSynonymMatched, "Time"),
                                       rec("Time", OutcomeKind::kOutOfVocabulary),
                                       rec("Time", OutcomeKind::kMatched, "Time"),
                                       rec("Time", OutcomeKind::kIDontKnow)};
  EXPECT_EQ(oov_summary(records), (OovSummary{2, 1}));
  EXPECT_EQ(oov_summary({rec("Time", OutcomeKind::kMatched, "Time")}), (OovSummary{0, 0}));
}

TEST(Metrics, DeltaTable) {
  std::vector<ExperimentScores> e = {{"column", 47.70, 31.25, 45.85, std::nullopt},
                                     {"table+inst+roles", 85.91, 82.01, 85.25, std::nullopt}};
  auto rows = delta_table(e, "column");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].delta_f1, 0.0);
  EXPECT_NEAR(rows[1].delta_f1, 39.40, 1e-9);
  EXPECT_EQ(format_percent(rows[1].delta_f1), "39.40");
  EXPECT_THROW(delta_table(e, "missing"), ArgumentError);
}

TEST(Metrics, RoundingHalfUp) {
  EXPECT_EQ(round2(66.665), 66.67);
  EXPECT_EQ(round2(66.664), 66.66);
  EXPECT_EQ(format_percent(0.0), "0.00");
  EXPECT_EQ(to_percent(2.0 / 3.0), 66.67);
}

}  // namespace
}  // namespace tablesage
