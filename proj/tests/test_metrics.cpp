#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include "evidloss/metrics.hpp"
#include "evidloss/random.hpp"
#include "oracles.hpp"

using namespace evidloss;

namespace {

struct Labels {
  std::unique_ptr<bool[]> data;
  std::size_t n;
  std::span<const bool> span() const { return {data.get(), n}; }
};

Labels labels(std::initializer_list<int> v) {
  Labels l{std::make_unique<bool[]>(v.size()), v.size()};
  std::size_t i = 0;
  for (int x : v) l.data[i++] = x != 0;
  return l;
}

struct Instance {
  std::vector<double> scores;
  Labels y;
};

Instance random_instance(Rng& rng) {
  const std::size_t n = 2 + rng.below(199);
  Instance inst{std::vector<double>(n), Labels{std::make_unique<bool[]>(n), n}};
  const bool coarse = rng.below(2) == 0;  // coarse scores force ties
  for (std::size_t i = 0; i < n; ++i) {
    inst.y.data[i] = rng.uniform() < 0.3;
    inst.scores[i] = coarse ? double(rng.below(6)) : rng.normal();
  }
  inst.y.data[0] = true;
  inst.y.data[1] = false;
  return inst;
}

}  // namespace

TEST(Ece, HandCases) {
  const std::vector<double> ones(5, 1.0);
  auto all_true = labels({1, 1, 1, 1, 1}), all_false = labels({0, 0, 0, 0, 0});
  EXPECT_EQ(ece(ones, all_true.span()), 0.0);
  EXPECT_EQ(ece(ones, all_false.span()), 1.0);
  const std::vector<double> c95(4, 0.95);
  auto three = labels({1, 1, 1, 0});
  EXPECT_NEAR(ece(c95, three.span()), 0.2, 1e-15);
}

TEST(Ece, BinsAreRightClosed) {
  // 0.1 sits in the first bin (0, 0.1]; 0 is absorbed by the first bin too.
  const std::vector<double> c{0.1, 0.0, 0.15};
  auto y = labels({0, 0, 1});
  const double first_bin = (2.0 / 3.0) * std::abs(0.0 - 0.05);
  const double second_bin = (1.0 / 3.0) * std::abs(1.0 - 0.15);
  EXPECT_NEAR(ece(c, y.span()), first_bin + second_bin, 1e-15);
}

TEST(Ece, ZeroWhenEveryBinIsCalibrated) {
  // bin (0.7, 0.8]: 4 at 0.75, 3 correct; bin (0.4, 0.5]: 2 at 0.5, 1 correct
  const std::vector<double> c{0.75, 0.75, 0.75, 0.75, 0.5, 0.5};
  auto y = labels({1, 1, 1, 0, 1, 0});
  EXPECT_NEAR(ece(c, y.span()), 0.0, 1e-15);
}

TEST(Ece, Errors) {
  const std::vector<double> c{0.5};
  auto two = labels({1, 0});
  EXPECT_THROW(ece(c, two.span()), MetricError);
  EXPECT_THROW(ece({}, {}), MetricError);
  auto one = labels({1});
  EXPECT_THROW(ece(std::vector<double>{1.5}, one.span()), MetricError);
  EXPECT_THROW(ece(c, one.span(), 0), MetricError);
}

TEST(Auroc, HandCases) {
  const std::vector<double> s{0.9, 0.8, 0.7, 0.6};
  auto perfect = labels({1, 1, 0, 0}), mixed = labels({1, 0, 1, 0});
  EXPECT_EQ(auroc(s, perfect.span()), 1.0);
  EXPECT_EQ(auroc(s, mixed.span()), 0.75);
  const std::vector<double> flat(4, 0.3);
  EXPECT_EQ(auroc(flat, mixed.span()), 0.5);
  auto single = labels({1, 1, 1, 1});
  EXPECT_THROW(auroc(s, single.span()), MetricError);
}

TEST(Auroc, ComplementAndMonotoneInvariance) {
  Rng rng(31);
  for (int i = 0; i < 100; ++i) {
    auto inst = random_instance(rng);
    std::vector<double> neg(inst.scores), warped(inst.scores);
    for (double& v : neg) v = -v;
    for (double& v : warped) v = std::exp(v / 3.0) * 5.0 - 1.0;
    const double a = auroc(inst.scores, inst.y.span());
    EXPECT_NEAR(a + auroc(neg, inst.y.span()), 1.0, 1e-12);
    EXPECT_EQ(a, auroc(warped, inst.y.span()));
  }
}

TEST(Aupr, HandCases) {
  const std::vector<double> s{0.9, 0.8, 0.7, 0.6};
  auto perfect = labels({1, 1, 0, 0});
  EXPECT_EQ(aupr(s, perfect.span()), 1.0);
  // single positive ranked last among n: precision 1/n at recall 1
  for (int n : {2, 10, 50}) {
    std::vector<double> sc(n);
    Labels y{std::make_unique<bool[]>(n), std::size_t(n)};
    for (int i = 0; i < n; ++i) {
      sc[i] = n - i;
      y.data[i] = i == n - 1;
    }
    EXPECT_NEAR(aupr(sc, y.span()), 1.0 / n, 1e-15);
  }
  auto none = labels({0, 0, 0, 0});
  EXPECT_THROW(aupr(s, none.span()), MetricError);
}

TEST(Aupr, RandomScoresGivePrevalence) {
  Rng rng(77);
  const std::size_t n = 10000;
  std::vector<double> s(n);
  Labels y{std::make_unique<bool[]>(n), n};
  double pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = rng.uniform();
    y.data[i] = rng.uniform() < 0.2;
    pos += y.data[i];
  }
  EXPECT_NEAR(aupr(s, y.span()), pos / n, 0.02);
}

TEST(Aupr, OracleScorerAtLeastPrevalence) {
  auto y = labels({0, 1, 0, 0, 1, 0});
  const std::vector<double> oracle{0, 1, 0, 0, 1, 0};
  EXPECT_EQ(aupr(oracle, y.span()), 1.0);
  EXPECT_GE(aupr(oracle, y.span()), 2.0 / 6.0);
}

TEST(Fpr95, HandCases) {
  const std::vector<double> s{0.9, 0.8, 0.7, 0.6};
  auto perfect = labels({1, 1, 0, 0});
  EXPECT_EQ(fpr_at_95_tpr(s, perfect.span()), 0.0);
  const std::vector<double> flat(4, 0.1);
  EXPECT_EQ(fpr_at_95_tpr(flat, perfect.span()), 1.0);
}

TEST(Fpr95, InterleavedTwentyByTwenty) {
  // positives at even ranks, negatives at odd ranks: 19 positives need 37
  // admitted points, so 18 negatives are in: FPR = 18 / 20.
  std::vector<double> s(40);
  Labels y{std::make_unique<bool[]>(40), 40};
  for (int i = 0; i < 40; ++i) {
    s[i] = 40 - i;
    y.data[i] = i % 2 == 0;
  }
  EXPECT_EQ(fpr_at_95_tpr(s, y.span()), oracle::fpr95(s, y.span()));
  EXPECT_DOUBLE_EQ(fpr_at_95_tpr(s, y.span()), 18.0 / 20.0);
}

TEST(Metrics, AgreeWithBruteForce) {
  Rng rng(2025);
  for (int i = 0; i < 100; ++i) {
    auto inst = random_instance(rng);
    EXPECT_NEAR(auroc(inst.scores, inst.y.span()), oracle::auroc(inst.scores, inst.y.span()), 1e-15) << i;
    EXPECT_EQ(aupr(inst.scores, inst.y.span()), oracle::aupr(inst.scores, inst.y.span())) << i;
    EXPECT_EQ(fpr_at_95_tpr(inst.scores, inst.y.span()), oracle::fpr95(inst.scores, inst.y.span())) << i;
  }
}

TEST(Iou, HandCases) {
  auto a = labels({1, 0, 1, 0}), b = labels({0, 1, 0, 1}), none = labels({0, 0, 0, 0});
  EXPECT_EQ(iou(a.span(), a.span()), 1.0);
  EXPECT_EQ(iou(a.span(), b.span()), 0.0);
  EXPECT_EQ(iou(none.span(), none.span()), 1.0);
  // TP=2, FP=1, FN=1
  auto pred = labels({1, 1, 1, 0, 0}), truth = labels({1, 1, 0, 1, 0});
  EXPECT_EQ(iou(pred.span(), truth.span()), 0.5);
  auto short_mask = labels({1});
  EXPECT_THROW(iou(a.span(), short_mask.span()), MetricError);
}

TEST(Report, JsonFieldNames) {
  MetricsReport r;
  r.ood = DetectionMetrics{0.9, 0.8, 0.1};
  const auto j = r.to_json();
  for (const char* k : {"iou", "ece", "mis_auroc", "mis_aupr", "mis_fpr95", "ood_auroc", "ood_aupr", "ood_fpr95", "counts"}) {
    EXPECT_TRUE(j.contains(k)) << k;
  }
  EXPECT_TRUE(j.at("mis_auroc").is_null());
  EXPECT_EQ(j.at("ood_aupr").get<double>(), 0.8);
}
