#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "stpen/errors.hpp"
#include "stpen/evaluation.hpp"
#include "stpen/vocab.hpp"
#include "support/oracles.hpp"

namespace stpen {
namespace {

/// One record per (score, label) on class 0; other classes all negative.
std::vector<PredictionRecord> single_class(const std::vector<std::pair<double, int>>& items) {
  std::vector<PredictionRecord> out;
  int id = 0;
  for (const auto& [score, label] : items) {
    PredictionRecord r{"v", 0, id++, std::vector<double>(13, 0.0), std::vector<int>(13, 0)};
    r.scores[0] = score;
    r.targets[0] = label;
    out.push_back(r);
  }
  return out;
}

TEST(PrPoints, AllPositive) {
  const auto pts = pr_points(single_class({{0.3, 1}, {0.9, 1}, {0.5, 1}, {0.1, 1}}), 0);
  ASSERT_EQ(pts.size(), 4u);
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_EQ(pts[j].precision, 1.0);
    EXPECT_DOUBLE_EQ(pts[j].recall, (j + 1) / 4.0);
  }
}

TEST(PrPoints, SinglePositiveFirst) {
  const auto pts = pr_points(single_class({{0.2, 0}, {0.8, 1}}), 0);
  EXPECT_EQ(pts, (std::vector<PrPoint>{{1.0, 1.0}, {0.5, 1.0}}));
}

TEST(PrPoints, UndefinedAndMissingTargets) {
  EXPECT_THROW(pr_points(single_class({{0.2, 0}, {0.8, 0}}), 0), UndefinedClassError);
  auto recs = single_class({{0.2, 1}});
  recs[0].targets.clear();
  EXPECT_THROW(pr_points(recs, 0), ArgumentError);
}

TEST(AveragePrecision, HandCases) {
  EXPECT_DOUBLE_EQ(average_precision(single_class({{0.9, 1}, {0.5, 0}, {0.1, 1}}), 0), 5.0 / 6.0);
  EXPECT_DOUBLE_EQ(average_precision(single_class({{0.9, 0}, {0.7, 0}, {0.5, 0}, {0.1, 1}}), 0), 0.25);
  EXPECT_EQ(average_precision(single_class({{0.9, 1}, {0.8, 1}, {0.3, 0}, {0.1, 0}}), 0), 1.0);
}

TEST(AveragePrecision, InterpolatedFlag) {
  // Raw: 1/2 + 1/2 * 2/3. Interpolated replaces P(1)=1 by itself and the tail max 2/3.
  const auto recs = single_class({{0.9, 1}, {0.5, 0}, {0.1, 1}});
  EXPECT_DOUBLE_EQ(average_precision(recs, 0, true), 5.0 / 6.0);
  const auto dip = single_class({{0.9, 0}, {0.5, 1}, {0.4, 1}});
  EXPECT_DOUBLE_EQ(average_precision(dip, 0), 0.5 * 0.5 + 0.5 * (2.0 / 3.0));
  EXPECT_DOUBLE_EQ(average_precision(dip, 0, true), 0.5 * (2.0 / 3.0) + 0.5 * (2.0 / 3.0));
}

TEST(AveragePrecision, TiesBrokenByRecordIdentity) {
  // Equal scores: actor 0 (negative) ranks before actor 1 (positive).
  EXPECT_DOUBLE_EQ(average_precision(single_class({{0.5, 0}, {0.5, 1}}), 0), 0.5);
  EXPECT_DOUBLE_EQ(average_precision(single_class({{0.5, 1}, {0.5, 0}}), 0), 1.0);
}

std::vector<PredictionRecord> random_records(Rng& rng, std::size_t n) {
  std::vector<PredictionRecord> recs;
  for (std::size_t i = 0; i < n; ++i) {
    PredictionRecord r{"v" + std::to_string(uniform_index(rng, 3)), static_cast<int>(uniform_index(rng, 4)),
                       static_cast<int>(i), std::vector<double>(13, 0.0), std::vector<int>(13, 0)};
    // Coarse scores force ties.
    for (auto& s : r.scores) s = std::round(uniform01(rng) * 4) / 4;
    for (auto& t : r.targets) t = uniform01(rng) < 0.4 ? 1 : 0;
    recs.push_back(r);
  }
  recs[0].targets[0] = 1;
  return recs;
}

double oracle_ap(const std::vector<PredictionRecord>& recs, std::size_t k) {
  std::vector<oracle::ScoredLabel> items;
  for (const auto& r : recs) items.push_back({r.video_id, r.timestamp_s, r.actor_id, r.scores[k], r.targets[k] == 1});
  return oracle::brute_force_ap(items);
}

TEST(AveragePrecision, MatchesBruteForceOracle) {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto recs = random_records(rng, 1 + uniform_index(rng, 12));
    EXPECT_EQ(average_precision(recs, 0), oracle_ap(recs, 0)) << trial;
  }
}

TEST(AveragePrecision, MonotoneTransformInvariance) {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    auto recs = random_records(rng, 8);
    const double ap = average_precision(recs, 0);
    for (auto& r : recs) r.scores[0] = std::exp(3 * r.scores[0]) - 7;
    EXPECT_EQ(average_precision(recs, 0), ap);
  }
}

TEST(AveragePrecision, PermutationInvariance) {
  Rng rng(13);
  auto recs = random_records(rng, 12);
  const EvalReport base = mean_ap(recs);
  for (int trial = 0; trial < 20; ++trial) {
    for (std::size_t i = recs.size() - 1; i > 0; --i)
      std::swap(recs[i], recs[uniform_index(rng, i + 1)]);
    const EvalReport r = mean_ap(recs);
    EXPECT_EQ(r.ap, base.ap);
    EXPECT_EQ(r.map, base.map);
  }
}

TEST(MeanAp, ArithmeticCases) {
  EXPECT_EQ(mean_of({1.0, 1.0}), 1.0);
  EXPECT_EQ(mean_of({0.5, 1.0}), 0.75);
  EXPECT_EQ(mean_of({0.3, 0.3, 0.3}), 0.3);
}

TEST(MeanAp, PublishedPerClassValuesAverageToHeadline) {
  const std::vector<double> ours{81.63, 95.75, 96.67, 94.23, 92.29, 82.77, 90.13,
                                 72.48, 85.33, 60.75, 40.00, 52.37, 41.98};
  EXPECT_NEAR(mean_of(ours), 75.92, 0.05);
}

TEST(MeanAp, UndefinedClassesExcludedWithNote) {
  const auto recs = single_class({{0.9, 1}, {0.5, 0}, {0.1, 1}});
  const EvalReport r = mean_ap(recs);
  EXPECT_EQ(r.defined_classes(), 1u);
  EXPECT_DOUBLE_EQ(r.map, 5.0 / 6.0);
  EXPECT_EQ(r.positives[0], 2u);
  EXPECT_EQ(r.records, 3u);
  EXPECT_FALSE(r.ap[1].has_value());
  EXPECT_NE(r.note().find(behavior_name(1)), std::string::npos) << r.note();
  EXPECT_THROW(mean_ap({}), EmptyEvalError);
  EXPECT_THROW(mean_ap(single_class({{0.1, 0}})), EmptyEvalError);
}

TEST(MeanAp, ReportFiles) {
  const EvalReport r = mean_ap(single_class({{0.9, 1}, {0.5, 0}, {0.1, 1}}));
  const std::string csv = report_csv(r);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 15);
  EXPECT_NE(csv.find("0,drink,0.8333,2\n"), std::string::npos) << csv;
  EXPECT_NE(report_text(r).find("mAP"), std::string::npos);
}

// ---- ablation report -----------------------------------------------------------------

EvalReport report_with(double map, std::optional<double> ap0) {
  EvalReport r;
  r.map = map;
  r.ap[0] = ap0;
  return r;
}

TEST(Ablation, SingleFullRunHasZeroDeltas) {
  const AblationTable t = ablation_report({{ModuleToggles{}, report_with(0.8, 0.7)}});
  EXPECT_EQ(t.columns, (std::vector<std::string>{"full"}));
  ASSERT_EQ(t.rows.size(), 14u);
  EXPECT_EQ(t.rows.back(), "mAP");
  EXPECT_EQ(t.deltas[13][0], 0.0);
  EXPECT_EQ(t.deltas[0][0], 0.0);
  EXPECT_FALSE(t.values[1][0].has_value());
}

TEST(Ablation, DeltaAgainstFull) {
  ModuleToggles no_mfem;
  no_mfem.mfem = false;
  const AblationTable t = ablation_report({{no_mfem, report_with(0.72, 0.5)}, {ModuleToggles{}, report_with(0.75, 0.6)}});
  EXPECT_EQ(t.columns, (std::vector<std::string>{"full", "no_mfem"}));
  EXPECT_NEAR(*t.deltas[13][1], -0.03, 1e-15);
  EXPECT_NEAR(*t.deltas[0][1], -0.1, 1e-15);
}

TEST(Ablation, FiveRunFixture) {
  std::vector<AblationRun> runs{{ModuleToggles{}, report_with(0.80, 0.90)}};
  const char* names[] = {"no_fl_sam", "no_kmfem", "no_cl_sam", "no_mfem"};
  for (int i = 0; i < 4; ++i) {
    ModuleToggles t;
    (i == 0 ? t.fl_sam : i == 1 ? t.kmfem : i == 2 ? t.cl_sam : t.mfem) = false;
    runs.push_back({t, report_with(0.80 - 0.01 * (i + 1), 0.90 - 0.1 * (i + 1))});
  }
  const AblationTable t = ablation_report(runs);
  ASSERT_EQ(t.columns.size(), 5u);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(t.columns[i + 1], names[i]);
    EXPECT_NEAR(*t.values[13][i + 1], 0.80 - 0.01 * (i + 1), 1e-15);
    EXPECT_NEAR(*t.deltas[13][i + 1], -0.01 * (i + 1), 1e-15);
    EXPECT_NEAR(*t.deltas[0][i + 1], -0.1 * (i + 1), 1e-15);
  }
  const std::string csv = ablation_csv(t);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "behavior,full,no_fl_sam,no_kmfem,no_cl_sam,no_mfem,delta_no_fl_sam,"
                                          "delta_no_kmfem,delta_no_cl_sam,delta_no_mfem");
  EXPECT_NE(ablation_text(t).find("no_mfem"), std::string::npos);
}

TEST(Ablation, DuplicateTogglesRejected) {
  EXPECT_THROW(ablation_report({{ModuleToggles{}, report_with(0.8, 0.7)}, {ModuleToggles{}, report_with(0.7, 0.7)}}),
               DuplicateConfigError);
}

TEST(Ablation, ElevenConfigurations) {
  const auto cfgs = ablation_configs();
  ASSERT_EQ(cfgs.size(), 11u);
  EXPECT_EQ(cfgs[0].name(), "full");
  std::set<std::string> names;
  for (const auto& c : cfgs) names.insert(c.name());
  EXPECT_EQ(names.size(), 11u);
  EXPECT_TRUE(names.count("fl_sam+mfem"));
}

}  // namespace
}  // namespace stpen
