#include <gtest/gtest.h>

#include <cmath>

#include "evidloss/losses.hpp"
#include "evidloss/verify.hpp"

using namespace evidloss;
using namespace evidloss::verify;

TEST(MeanAccumulator, MatchesTwoPass) {
  const std::vector<double> xs{1.5, 2.0, -3.0, 4.25, 0.0, 7.5};
  MeanAccumulator acc;
  for (double x : xs) acc.add(x);
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const auto e = acc.estimate();
  EXPECT_NEAR(e.mean, mean, 1e-15);
  EXPECT_NEAR(e.sem, std::sqrt(ss / (xs.size() - 1) / xs.size()), 1e-15);
  EXPECT_EQ(e.samples, xs.size());
}

TEST(MonteCarlo, FocalEstimateAgreesWithClosedForm) {
  const DirichletParams a({3, 2, 1});
  const auto e = mc_expected_focal(a, 0, 2.0, 200'000, 3);
  EXPECT_LE(std::abs(e.mean - ufce(a, 0, 2.0)), 4 * e.sem);
  EXPECT_THROW(mc_expected_focal(a, 0, 2.0, 10, 3), std::invalid_argument);
}

TEST(FiniteDiff, StepValidationAndDomain) {
  const DirichletParams a({1.5, 2.0});
  auto f = [](const DirichletParams& d) { return uce(d, 0); };
  EXPECT_THROW(finite_diff_gradient(f, a, 1e-2), std::invalid_argument);
  EXPECT_THROW(finite_diff_gradient(f, a, 1e-9), std::invalid_argument);
  EXPECT_THROW(finite_diff_gradient(f, DirichletParams({1.0, 2.0}), 1e-5), InvalidParameters);
  EXPECT_EQ(finite_diff_gradient(f, a, 1e-5).size(), 2u);
}

TEST(Suites, NamesRoundTrip) {
  for (auto s : {Suite::kProp1, Suite::kLowerBounds, Suite::kGradientThresholds, Suite::kGRatio,
                 Suite::kPsi1Scan, Suite::kMcClosedForm, Suite::kFiniteDiff, Suite::kAll}) {
    EXPECT_EQ(parse_suite(suite_name(s)), s);
  }
  EXPECT_THROW(parse_suite("bogus"), std::invalid_argument);
}

TEST(Suites, PassingSuitesPass) {
  SuiteOptions o;
  o.case_count = 200;
  for (auto s : {Suite::kProp1, Suite::kLowerBounds, Suite::kGRatio, Suite::kFiniteDiff}) {
    const auto r = run_proposition_suite(s, 7, o);
    EXPECT_TRUE(r.ok()) << suite_name(s) << ": " << r.to_json().dump();
    EXPECT_EQ(r.total, r.passes);
    EXPECT_GT(r.total, 0u);
  }
}

TEST(Suites, ReportIsDeterministicAndThreadCountInvariant) {
  SuiteOptions one, many;
  one.case_count = many.case_count = 100;
  one.threads = 1;
  many.threads = 4;
  const auto a = run_proposition_suite(Suite::kFiniteDiff, 11, one).to_json().dump();
  const auto b = run_proposition_suite(Suite::kFiniteDiff, 11, many).to_json().dump();
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.find("wall"), std::string::npos);
}

TEST(Suites, McBatteryCatchesAWrongClosedForm) {
  SuiteOptions o;
  o.case_count = 10;
  o.mc_samples = 100'000;
  const auto good = run_proposition_suite(Suite::kMcClosedForm, 3, o);
  EXPECT_TRUE(good.ok()) << good.to_json().dump();

  // Perturb the closed form by 1 %; the 4-SEM band must notice.
  o.ufce_closed_form = [](const DirichletParams& a, std::size_t c, double g) { return 1.01 * ufce(a, c, g); };
  const auto bad = run_proposition_suite(Suite::kMcClosedForm, 3, o);
  EXPECT_FALSE(bad.ok());
}

TEST(Suites, FailuresCarryInputs) {
  const auto r = run_proposition_suite(Suite::kGradientThresholds, 7);
  ASSERT_FALSE(r.failures.empty());
  const auto& f = r.failures.front();
  EXPECT_EQ(f.check, "f_positive_near_lower_endpoint");
  EXPECT_EQ(f.inputs.at("alpha0").get<double>(), 3.0);
  EXPECT_EQ(f.inputs.at("gamma").get<double>(), 5.0);
  const auto j = r.to_json();
  EXPECT_TRUE(j.at("observations").contains("g_bounding_relation"));
  EXPECT_TRUE(j.at("observations").contains("target_inequality_scan"));
}

TEST(Report, NonFiniteNumbersSerialize) {
  VerificationReport r;
  r.record("x", false, {{"a", 1}}, INFINITY, NAN, 0.0);
  const auto j = r.to_json();
  EXPECT_EQ(j.at("failures")[0].at("expected"), "inf");
  EXPECT_EQ(j.at("failures")[0].at("actual"), "nan");
}

TEST(Parallel, CoversEveryIndexOnce) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 3, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
}

TEST(RandomAlpha, StaysInRange) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_alpha(rng, 4);
    for (double v : a.alpha()) {
      EXPECT_GE(v, 1.0);
      EXPECT_LE(v, 200.0);
    }
  }
}
