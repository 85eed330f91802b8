#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "cdcnet/losses/losses.hpp"
#include "cdcnet/metrics/metrics.hpp"
#include "cdcnet/tensor/gradcheck.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace cdcnet;
using cdcnet::testing::random_param;

namespace {

double loss_value(Var<double> (*fn)(Var<double>, Var<double>), const Tensor<double>& p, const Tensor<double>& t) {
  Tape<double> tape(false);
  return fn(tape.constant(p), tape.constant(t)).value().item();
}

/// Direct definition: for each of the 8 neighbours, the squared difference of
/// (pred - target) contrasts, averaged over interior pixels and kernels.
double cdl_oracle(const Tensor<double>& p, const Tensor<double>& t) {
  const Shape s = p.shape();
  double acc = 0;
  std::size_t n = 0;
  for (std::size_t b = 0; b < s.n; ++b)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dy == 0 && dx == 0) continue;
        for (std::size_t y = 1; y + 1 < s.h; ++y)
          for (std::size_t x = 1; x + 1 < s.w; ++x) {
            const std::size_t yy = y + dy, xx = x + dx;
            const double cp = p.at(b, 0, yy, xx) - p.at(b, 0, y, x);
            const double ct = t.at(b, 0, yy, xx) - t.at(b, 0, y, x);
            acc += (cp - ct) * (cp - ct);
            ++n;
          }
      }
  return acc / static_cast<double>(n);
}

ScoreSet hand_case() {
  ScoreSet s;
  s.add_live("l0", 0.9);
  s.add_live("l1", 0.2);
  s.add_attack("a0", 0.8, "A");
  s.add_attack("b0", 0.1, "B");
  return s;
}

}  // namespace

TEST(Losses, MseMatchesDefinition) {
  Tensor<double> p(Shape{1, 1, 2, 2}, std::vector<double>{1, 2, 3, 4});
  Tensor<double> t(Shape{1, 1, 2, 2}, std::vector<double>{0, 2, 5, 4});
  EXPECT_DOUBLE_EQ(loss_value(loss_mse<double>, p, t), (1.0 + 0 + 4 + 0) / 4);
}

TEST(Losses, ContrastKernelsAreNeighbourMinusCentre) {
  const Tensor<double> bank = contrast_kernel_bank<double>();
  ASSERT_EQ(bank.shape(), (Shape{8, 1, 3, 3}));
  for (std::size_t k = 0; k < 8; ++k) {
    double sum = 0;
    int ones = 0;
    for (std::size_t i = 0; i < 9; ++i) {
      sum += bank[k * 9 + i];
      ones += bank[k * 9 + i] == 1.0;
    }
    EXPECT_EQ(sum, 0.0);
    EXPECT_EQ(ones, 1);
    EXPECT_EQ(bank[k * 9 + 4], -1.0);
  }
}

TEST(Losses, CdlMatchesNeighbourOracle) {
  Rng rng(501);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t h = 3 + rng.below(4), w = 3 + rng.below(4);
    auto p = cdcnet::testing::random_tensor<double>(Shape{2, 1, h, w}, rng);
    auto t = cdcnet::testing::random_tensor<double>(Shape{2, 1, h, w}, rng, 0, 1);
    EXPECT_NEAR(loss_value(loss_cdl<double>, p, t), cdl_oracle(p, t), 1e-12);
  }
}

TEST(Losses, CdlIgnoresConstantOffsetsAndOverallIsTheSum) {
  Rng rng(502);
  auto t = cdcnet::testing::random_tensor<double>(Shape{1, 1, 5, 5}, rng, 0, 1);
  Tensor<double> shifted = t;
  for (auto& v : shifted.data()) v += 0.3;
  EXPECT_NEAR(loss_value(loss_cdl<double>, shifted, t), 0.0, 1e-15);
  auto p = cdcnet::testing::random_tensor<double>(Shape{1, 1, 5, 5}, rng);
  EXPECT_NEAR(loss_value(loss_overall<double>, p, t),
              loss_value(loss_mse<double>, p, t) + loss_value(loss_cdl<double>, p, t), 1e-14);
}

TEST(Losses, RejectBadShapes) {
  Tape<double> tape(false);
  auto a = tape.constant(Tensor<double>(Shape{1, 1, 4, 4}));
  auto b = tape.constant(Tensor<double>(Shape{1, 1, 4, 5}));
  EXPECT_THROW(loss_mse(a, b), ShapeError);
  auto small = tape.constant(Tensor<double>(Shape{1, 1, 2, 2}));
  EXPECT_THROW(loss_cdl(small, small), ShapeError);
  auto two = tape.constant(Tensor<double>(Shape{1, 2, 4, 4}));
  EXPECT_THROW(loss_cdl(two, two), ShapeError);
}

TEST(Losses, GradientsMatchFiniteDifferences) {
  Rng rng(503);
  for (int trial = 0; trial < 20; ++trial) {
    auto p = random_param<double>("pred", Shape{2, 1, 4, 5}, rng);
    auto t = random_param<double>("target", Shape{2, 1, 4, 5}, rng, 0, 1);
    auto rep = finite_difference_check([&](Tape<double>& g) { return loss_overall(g.watch(p), g.watch(t)); }, {&p, &t});
    EXPECT_LE(rep.max_rel_error, 1e-4) << rep.worst;
  }
}

TEST(Metrics, HandEnumeratedCase) {
  const ErrorRates r = apcer_bpcer_acer(hand_case(), 0.5);
  EXPECT_EQ(r.apcer, 1.0);
  EXPECT_EQ(r.bpcer, 0.5);
  EXPECT_EQ(r.acer, 0.75);
  ASSERT_EQ(r.apcer_per_type.size(), 2u);
  EXPECT_EQ(r.apcer_per_type[0], 1.0);
  EXPECT_EQ(r.apcer_per_type[1], 0.0);
}

TEST(Metrics, ScoreAtThresholdIsLive) {
  ScoreSet s;
  s.add_live("l", 0.5);
  s.add_attack("a", 0.5, "A");
  const ErrorRates r = apcer_bpcer_acer(s, 0.5);
  EXPECT_EQ(r.bpcer, 0.0);
  EXPECT_EQ(r.apcer, 1.0);
}

TEST(Metrics, AgreeWithBruteForceOnRandomSets) {
  Rng rng(601);
  for (int trial = 0; trial < 200; ++trial) {
    const ScoreSet s = oracle::random_scores(rng);
    std::vector<double> cuts;
    for (const auto& e : s.entries) cuts.push_back(e.score);
    const double thr = cuts[rng.below(cuts.size())] + (rng.below(2) ? 0.0 : 0.05);

    const ErrorRates r = apcer_bpcer_acer(s, thr);
    const double apcer = oracle::apcer(s, thr);
    const oracle::Counts c = oracle::rates(s, thr);
    EXPECT_EQ(r.apcer, apcer);
    EXPECT_EQ(r.bpcer, c.frr);
    EXPECT_EQ(r.acer, (apcer + c.frr) / 2);
    EXPECT_EQ(half_total_error(s, thr), (c.far + c.frr) / 2);

    const EerPoint e = eer(s);
    EXPECT_EQ(e.eer, oracle::eer(s));
    const oracle::Counts at = oracle::rates(s, e.threshold);
    EXPECT_EQ(e.far, at.far);
    EXPECT_EQ(e.frr, at.frr);
    EXPECT_NEAR(auc(s), oracle::auc(s), 1e-9);
  }
}

TEST(Metrics, Invariants) {
  Rng rng(602);
  for (int trial = 0; trial < 50; ++trial) {
    ScoreSet s = oracle::random_scores(rng);
    const double a = auc(s);
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 1.0);
    // Negating every score mirrors the ranking.
    ScoreSet neg = s;
    for (auto& e : neg.entries) e.score = -e.score;
    EXPECT_NEAR(auc(neg), 1.0 - a, 1e-12);
    // A strictly increasing transform leaves AUC and EER unchanged.
    ScoreSet mono = s;
    for (auto& e : mono.entries) e.score = std::exp(e.score);
    EXPECT_NEAR(auc(mono), a, 1e-12);
    EXPECT_EQ(eer(mono).eer, eer(s).eer);
    // Lowering the threshold never rejects more lives or accepts fewer attacks.
    const ErrorRates lo = apcer_bpcer_acer(s, 0.0), hi = apcer_bpcer_acer(s, 0.5);
    EXPECT_LE(lo.bpcer, hi.bpcer);
    EXPECT_GE(lo.apcer, hi.apcer);
    EXPECT_EQ(hter(s, s), half_total_error(s, eer(s).threshold));
  }
}

TEST(Metrics, PerfectSeparation) {
  ScoreSet s;
  for (int i = 0; i < 5; ++i) s.add_live("l" + std::to_string(i), 1 + i);
  for (int i = 0; i < 5; ++i) s.add_attack("a" + std::to_string(i), -1 - i, "A");
  EXPECT_EQ(auc(s), 1.0);
  EXPECT_EQ(eer(s).eer, 0.0);
  EXPECT_EQ(apcer_bpcer_acer(s, eer(s).threshold).acer, 0.0);
}

TEST(Metrics, ValidationRejectsDegenerateSets) {
  ScoreSet only_live;
  only_live.add_live("l", 1);
  EXPECT_THROW(eer(only_live), DataError);
  ScoreSet nan_set = hand_case();
  nan_set.entries[0].score = std::nan("");
  EXPECT_THROW(auc(nan_set), DataError);
}

TEST(ScoreCsv, RoundTripIsExact) {
  Rng rng(603);
  for (int trial = 0; trial < 20; ++trial) {
    const ScoreSet s = oracle::random_scores(rng);
    EXPECT_EQ(parse_scores_csv(format_scores_csv(s)), s);
  }
  ScoreSet bad;
  bad.add_live("a,b", 1);
  bad.add_attack("c", 0, "A");
  EXPECT_THROW(format_scores_csv(bad), DataError);
  EXPECT_THROW(parse_scores_csv("sample_id,score,label\nx,abc,live\n"), DataError);
  EXPECT_THROW(parse_scores_csv("wrong header\n"), DataError);
}
