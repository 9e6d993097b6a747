#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "gen.hpp"
#include "ghosttrack/metrics.hpp"
#include "oracles.hpp"
#include "trials.hpp"

using namespace ghosttrack;

namespace {

GtBox gt(int frame, int id, BBox b, double vis) { return GtBox{frame, id, b, vis, 1}; }

PredEntry pred(int frame, int id, std::vector<BBox> boxes, bool occluded = false) {
  return PredEntry{frame, id, HypothesisSet{std::move(boxes)}, occluded, 0.1};
}

struct RandomSequence {
  GtRecord gts;
  PredictionRecord preds;
};

RandomSequence random_sequence(gt_test::Gen& g, int frames, int hyps) {
  RandomSequence s;
  for (int f = 1; f <= frames; ++f) {
    gt_test::RandomFrame rf = gt_test::random_frame(g, 5, 6, hyps);
    for (GtBox& b : rf.gts) b.frame = f;
    for (PredEntry& p : rf.preds) p.frame = f;
    if (!rf.gts.empty()) s.gts[f] = rf.gts;
    if (!rf.preds.empty()) s.preds[f] = rf.preds;
  }
  return s;
}

EvalParams params(int k, MatchingMode mode = MatchingMode::Optimal) {
  EvalParams p;
  p.k = k;
  p.matching = mode;
  return p;
}

const BBox kA{50, 50, 0.5, 40};

}  // namespace

TEST(SetOverlap, BestOfFirstK) {
  const BBox far{500, 500, 0.5, 40};
  // Same size, shifted so that IoU = 0.7: overlap width w satisfies w/(40-w) = 0.7.
  const double w = 0.7 * 40 / 1.7;
  const BBox close{50 + (20 - w), 50, 0.5, 40};
  const HypothesisSet h{{far, far, far, close}};
  EXPECT_DOUBLE_EQ(set_overlap(kA, h, 3), 0.0);
  EXPECT_NEAR(set_overlap(kA, h, 4), 0.7, 1e-12);
  EXPECT_NEAR(set_overlap(kA, h, 100), 0.7, 1e-12);
  EXPECT_DOUBLE_EQ(set_overlap(kA, h, 0), 0.0);
}

TEST(MatchTopkFrame, FourthHypothesisMatchesAtK4) {
  const double w = 0.7 * 40 / 1.7;
  const BBox far{500, 500, 0.5, 40};
  const std::vector<GtBox> gts{gt(1, 1, kA, 0.0)};
  const std::vector<PredEntry> ps{pred(1, 1, {far, far, far, BBox{50 + (20 - w), 50, 0.5, 40}}, true)};
  EXPECT_TRUE(match_topk_frame(gts, ps, 0.5, 3).pairs.empty());
  const FrameMatch m = match_topk_frame(gts, ps, 0.5, 4);
  ASSERT_EQ(m.pairs.size(), 1u);
  EXPECT_NEAR(m.overlaps[0], 0.7, 1e-12);
}

TEST(MatchTopkFrame, PrefersMoreOccludedMatches) {
  // One prediction sits between a visible and an occluded GT, closer to the visible one.
  const std::vector<GtBox> gts{gt(1, 1, BBox{50, 50, 0.5, 40}, 1.0), gt(1, 2, BBox{53, 50, 0.5, 40}, 0.0)};
  const std::vector<PredEntry> ps{pred(1, 1, {BBox{51, 50, 0.5, 40}})};
  const FrameMatch plain = match_topk_frame(gts, ps, 0.5);
  ASSERT_EQ(plain.pairs.size(), 1u);
  EXPECT_EQ(plain.pairs[0].first, 0);
  const FrameMatch occl = match_topk_frame(gts, ps, 0.5, 1 << 30, MatchingMode::Optimal, 0.1);
  ASSERT_EQ(occl.pairs.size(), 1u);
  EXPECT_EQ(occl.pairs[0].first, 1);
  const FrameMatch greedy = match_topk_frame(gts, ps, 0.5, 1 << 30, MatchingMode::Greedy, 0.1);
  EXPECT_EQ(greedy.pairs[0].first, 1);
}

TEST(MatchTopkFrame, GreedyTakesHighestOverlapFirst) {
  // Greedy pairs p1-g1 (best overlap) and leaves g2 unmatched; optimal matches both.
  const std::vector<GtBox> gts{gt(1, 1, BBox{50, 50, 0.5, 40}, 1.0), gt(1, 2, BBox{56, 50, 0.5, 40}, 1.0)};
  const std::vector<PredEntry> ps{pred(1, 1, {BBox{53, 50, 0.5, 40}}), pred(1, 2, {BBox{46, 50, 0.5, 40}})};
  EXPECT_EQ(match_topk_frame(gts, ps, 0.5).pairs.size(), 2u);
  EXPECT_EQ(match_topk_frame(gts, ps, 0.5, 1 << 30, MatchingMode::Greedy).pairs.size(), 1u);
}

TEST(MatchTopkFrame, AgreesWithEnumeration) {
  gt_test::Gen g(31);
  for (int i = 0; i < 500; ++i) ASSERT_TRUE(gt_test::frame_match_trial(g, 5, 5, false)) << "trial " << i;
}

TEST(MatchTopkFrame, AgreesWithEnumerationPreferringOccluded) {
  gt_test::Gen g(32);
  for (int i = 0; i < 500; ++i) ASSERT_TRUE(gt_test::frame_match_trial(g, 5, 5, true)) << "trial " << i;
}

TEST(TopkCounts, K1AllModeIsPlainDetectionF1) {
  gt_test::Gen g(5);
  for (int i = 0; i < 100; ++i) {
    const RandomSequence s = random_sequence(g, 8, 3);
    const DetectionCounts c = topk_counts(s.gts, s.preds, params(1), false);
    const gt_test::PlainCounts o = gt_test::plain_detection_counts(s.gts, s.preds, 0.5);
    ASSERT_EQ(c.tp, o.tp) << i;
    ASSERT_EQ(c.fp, o.fp) << i;
    ASSERT_EQ(c.fn, o.fn) << i;
    ASSERT_DOUBLE_EQ(c.f1(), o.f1()) << i;
  }
}

TEST(TopkCounts, F1IsMonotoneInK) {
  gt_test::Gen g(6);
  for (int i = 0; i < 100; ++i) {
    const RandomSequence s = random_sequence(g, 6, 5);
    for (bool occl : {false, true}) {
      double prev = -1;
      for (int k = 1; k <= 5; ++k) {
        const double f1 = topk_f1(s.gts, s.preds, params(k), occl).f1;
        ASSERT_GE(f1, prev - 1e-12) << "seq " << i << " k " << k << " occluded " << occl;
        prev = f1;
      }
    }
  }
}

TEST(TopkCounts, OccludedFalsePositivesIgnoreVisibilityThreshold) {
  gt_test::Gen g(7);
  for (int i = 0; i < 100; ++i) {
    const RandomSequence s = random_sequence(g, 5, 2);
    EvalParams a = params(2), b = params(2);
    a.v_thresh = 0.05;
    b.v_thresh = 0.6;
    ASSERT_EQ(topk_counts(s.gts, s.preds, a, true).fp, topk_counts(s.gts, s.preds, b, true).fp) << i;
  }
}

TEST(TopkCounts, InvariantToOrderWithinFrames) {
  gt_test::Gen g(8);
  for (int i = 0; i < 100; ++i) {
    RandomSequence s = random_sequence(g, 5, 2);
    const MetricReport before = evaluate_sequence("x", s.gts, s.preds, params(2));
    for (auto& [f, v] : s.gts) std::shuffle(v.begin(), v.end(), g.engine());
    for (auto& [f, v] : s.preds) std::shuffle(v.begin(), v.end(), g.engine());
    const MetricReport after = evaluate_sequence("x", s.gts, s.preds, params(2));
    ASSERT_EQ(before.entries(), after.entries()) << i;
  }
}

TEST(TopkCounts, OccludedModeExamples) {
  GtRecord gts;
  gts[1] = {gt(1, 1, kA, 1.0), gt(1, 2, BBox{200, 50, 0.5, 40}, 0.0)};
  PredictionRecord ps;
  ps[1] = {pred(1, 1, {kA}), pred(1, 2, {BBox{200, 50, 0.5, 40}}, true), pred(1, 3, {BBox{400, 50, 0.5, 40}}, true)};
  const DetectionCounts c = topk_counts(gts, ps, params(1), true);
  EXPECT_EQ(c.tp, 1);
  EXPECT_EQ(c.fn, 0);
  EXPECT_EQ(c.fp, 1);
  const DetectionCounts all = topk_counts(gts, ps, params(1), false);
  EXPECT_EQ(all.tp, 2);
  EXPECT_EQ(all.fp, 1);
}

TEST(TopkCounts, NoOccludedGroundTruthScoresZero) {
  GtRecord gts;
  gts[1] = {gt(1, 1, kA, 1.0)};
  PredictionRecord ps;
  ps[1] = {pred(1, 1, {kA})};
  const PrecisionRecall pr = topk_f1(gts, ps, params(5), true);
  EXPECT_EQ(pr.recall, 0.0);
  EXPECT_EQ(pr.f1, 0.0);
  EXPECT_EQ(f1_score(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(f1_score(0.5, 1.0), 2.0 / 3.0);
}

TEST(TopkCounts, PerfectPredictionsScoreOne) {
  gt_test::Gen g(9);
  GtRecord gts;
  PredictionRecord ps;
  for (int f = 1; f <= 20; ++f)
    for (int id = 1; id <= 3; ++id) {
      const BBox b{100.0 * id + f, 50, 0.5, 40};
      gts[f].push_back(gt(f, id, b, g.chance(0.5) ? 0.0 : 1.0));
      ps[f].push_back(pred(f, id, {b}));
    }
  for (bool occl : {false, true}) EXPECT_DOUBLE_EQ(topk_f1(gts, ps, params(5), occl).f1, 1.0);
  EXPECT_DOUBLE_EQ(*mota_occluded(gts, ps, params(1)), 1.0);
}

TEST(Identity, PerfectSingleSegmentTrackerScoresOne) {
  GtRecord gts;
  PredictionRecord ps;
  for (int f = 1; f <= 10; ++f)
    for (int id = 1; id <= 2; ++id) {
      const BBox b{100.0 * id, 50, 0.5, 40};
      gts[f].push_back(gt(f, id, b, (f >= 4 && f <= 7) ? 0.0 : 1.0));
      ps[f].push_back(pred(f, id + 10, {b}));
    }
  EXPECT_DOUBLE_EQ(idf1_occluded(gts, ps, params(1)), 1.0);
  EXPECT_DOUBLE_EQ(identity_counts(gts, ps, params(1), false).idf1(), 1.0);
}

TEST(Identity, EmptyInputsScoreZero) {
  EXPECT_EQ(idf1_occluded({}, {}, params(1)), 0.0);
  GtRecord gts;
  gts[1] = {gt(1, 1, kA, 0.0)};
  EXPECT_EQ(idf1_occluded(gts, {}, params(1)), 0.0);
}

TEST(Identity, SwitchInsideOccludedSegment) {
  // One person visible on frames 1 and 6, hidden on 2..5. The tracker follows it as id 10 on
  // frames 1..4 and as id 20 on frames 5..6. The best segment pairing is id 10 (3 frames):
  // IDTP 3, IDFN 1, IDFP 1 (id 20 on frame 5); frames 1 and 6 sit on visible GT and are neutral.
  GtRecord gts;
  PredictionRecord ps;
  for (int f = 1; f <= 6; ++f) {
    gts[f] = {gt(f, 1, kA, (f == 1 || f == 6) ? 1.0 : 0.0)};
    ps[f] = {pred(f, f <= 4 ? 10 : 20, {kA}, f != 1 && f != 6)};
  }
  const IdentityCounts c = identity_counts(gts, ps, params(1), true);
  EXPECT_EQ(c.idtp, 3);
  EXPECT_EQ(c.idfn, 1);
  EXPECT_EQ(c.idfp, 1);
  EXPECT_DOUBLE_EQ(c.idf1(), 0.75);

  // Exhaustive check over the two possible single-id assignments of the segment.
  double best = 0;
  for (int chosen : {10, 20}) {
    int tp = 0, fp = 0;
    for (int f = 2; f <= 5; ++f) (ps[f][0].id == chosen ? tp : fp) += 1;
    const int fn = 4 - tp;
    best = std::max(best, 2.0 * tp / (2.0 * tp + fp + fn));
  }
  EXPECT_DOUBLE_EQ(best, c.idf1());
}

TEST(Clear, OccludedMotaExamples) {
  GtRecord gts;
  for (int f = 1; f <= 4; ++f) gts[f] = {gt(f, 1, kA, 0.0), gt(f, 2, BBox{200, 50, 0.5, 40}, 1.0)};
  PredictionRecord perfect;
  for (int f = 1; f <= 4; ++f) perfect[f] = {pred(f, 1, {kA}, true), pred(f, 2, {BBox{200, 50, 0.5, 40}})};
  EXPECT_DOUBLE_EQ(*mota_occluded(gts, perfect, params(1)), 1.0);
  EXPECT_DOUBLE_EQ(*mota_occluded(gts, {}, params(1)), 0.0);

  PredictionRecord noisy = perfect;
  for (int f = 1; f <= 4; ++f)
    for (int j = 0; j < 3; ++j) noisy[f].push_back(pred(f, 100 + j, {BBox{400.0 + 60 * j, 50, 0.5, 40}}, true));
  EXPECT_LT(*mota_occluded(gts, noisy, params(1)), 0.0);

  PredictionRecord swapped = perfect;
  swapped[3][0].id = 7;
  swapped[4][0].id = 7;
  const ClearCounts c = clear_counts(gts, swapped, params(1), true);
  EXPECT_EQ(c.ids, 1);
  EXPECT_DOUBLE_EQ(*c.mota(), 1.0 - 1.0 / 4.0);
}

TEST(Clear, AbsentWithoutGroundTruth) {
  GtRecord gts;
  gts[1] = {gt(1, 1, kA, 1.0)};
  EXPECT_FALSE(mota_occluded(gts, {}, params(1)).has_value());
  EXPECT_FALSE(clear_counts({}, {}, params(1), false).mota().has_value());
}

TEST(Report, AggregateSumsCounts) {
  gt_test::Gen g(10);
  const RandomSequence a = random_sequence(g, 5, 2), b = random_sequence(g, 5, 2);
  const std::vector<MetricReport> r{evaluate_sequence("a", a.gts, a.preds, params(2)),
                                    evaluate_sequence("b", b.gts, b.preds, params(2))};
  const MetricReport sum = aggregate(r);
  EXPECT_EQ(sum.name, "aggregate");
  EXPECT_EQ(sum.counts.topk_occl.tp, r[0].counts.topk_occl.tp + r[1].counts.topk_occl.tp);
  EXPECT_EQ(sum.counts.id_all.idfp, r[0].counts.id_all.idfp + r[1].counts.id_all.idfp);
  const std::string table = format_table(r);
  EXPECT_NE(table.find("a"), std::string::npos);
  EXPECT_NE(format_key_values(r).find("b."), std::string::npos);
}
