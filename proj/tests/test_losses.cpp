#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "evidloss/losses.hpp"
#include "evidloss/specfn.hpp"
#include "evidloss/verify.hpp"

using namespace evidloss;

namespace {

DirichletParams dir(std::vector<double> a) { return DirichletParams(std::move(a)); }

// Monte-Carlo oracle that shares nothing with the library sampler.
struct StdMc {
  double mean, sem;
};

template <typename F>
StdMc std_mc(const std::vector<double>& alpha, F f, int n, unsigned seed) {
  std::mt19937_64 eng(seed);
  std::vector<std::gamma_distribution<double>> g;
  for (double a : alpha) g.emplace_back(a, 1.0);
  std::vector<double> p(alpha.size());
  double sum = 0, sum_sq = 0;
  for (int i = 0; i < n; ++i) {
    double tot = 0;
    for (std::size_t k = 0; k < p.size(); ++k) tot += (p[k] = g[k](eng));
    for (double& v : p) v /= tot;
    const double x = f(p);
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / n;
  return {mean, std::sqrt((sum_sq / n - mean * mean) / (n - 1))};
}

}  // namespace

TEST(Uce, HandValues) {
  EXPECT_NEAR(uce(dir({1, 1}), 0), 1.0, 1e-14);
  EXPECT_NEAR(uce(dir({2, 1, 1}), 0), 5.0 / 6.0, 1e-14);
  EXPECT_THROW(uce(dir({1, 1}), 2), InvalidParameters);
  double prev = INFINITY;
  for (double a = 1; a < 200; a *= 1.5) {
    const double v = uce(dir({a, 1, 1}), 0);
    EXPECT_LT(v, prev);
    EXPECT_GT(v, 0.0);
    prev = v;
  }
}

TEST(Uce, DigammaSumForm) {
  EXPECT_NEAR(uce_digamma_sum(1, 3), 1.5, 1e-15);
  EXPECT_NEAR(uce_digamma_sum(1, 2), 1.0, 1e-15);
  EXPECT_NEAR(uce_digamma_sum(2, 2), 0.5, 1e-15);
  for (int k = 2; k <= 9; ++k) {
    for (double ac : {1.0, 2.5, 17.0}) {
      std::vector<double> a(k, 1.0);
      a[0] = ac;
      EXPECT_NEAR(uce_digamma_sum(ac, k), uce(dir(a), 0), 1e-10);
    }
  }
}

TEST(Ufce, HandValues) {
  EXPECT_NEAR(ufce(dir({1, 1}), 0, 1.0), 0.75, 1e-14);
  // mpmath
  EXPECT_NEAR(ufce(dir({2, 3, 4}), 1, 2.5), 0.58470035197515867699, 1e-12);
  EXPECT_NEAR(ufce(dir({5, 1, 1, 1}), 0, 0.3), 0.39976530061126110445, 1e-12);
}

TEST(Ufce, ReducesToUceBitExactly) {
  Rng rng(17);
  for (int i = 0; i < 1000; ++i) {
    const auto a = verify::random_alpha(rng, 2 + rng.below(9));
    const std::size_t c = rng.below(a.classes());
    EXPECT_EQ(ufce(a, c, 0.0), uce(a, c));
  }
}

TEST(Ufce, MatchesIndependentMonteCarlo) {
  const std::vector<double> a{3, 2, 1};
  const auto mc = std_mc(a, [](const std::vector<double>& p) { return (1 - p[0]) * (1 - p[0]) * -std::log(p[0]); },
                         1'000'000, 2024);
  EXPECT_LE(std::abs(ufce(dir(a), 0, 2.0) - mc.mean), 4 * mc.sem);
}

TEST(Ufce, AttenuatesUce) {
  Rng rng(8);
  for (int i = 0; i < 500; ++i) {
    const auto a = verify::random_alpha(rng, 2 + rng.below(6));
    const std::size_t c = rng.below(a.classes());
    const double g = rng.uniform(0, 5);
    EXPECT_LE(ufce(a, c, g), uce(a, c) * (1 + 1e-12));
    EXPECT_GT(ufce(a, c, g), 0.0);
  }
}

TEST(Ufce, IntegerGammaForm) {
  EXPECT_NEAR(ufce_integer_gamma(1, 2, 1), 0.75, 1e-12);
  EXPECT_NEAR(ufce_integer_gamma(2, 3, 1), ufce(dir({2, 1, 1}), 0, 1), 1e-10);
  EXPECT_NEAR(ufce_integer_gamma(1, 2, 2), ufce(dir({1, 1}), 0, 2), 1e-10);
  for (int k = 2; k <= 6; ++k) {
    for (int g = 1; g <= 5; ++g) {
      std::vector<double> a(k, 1.0);
      a[0] = 3.7;
      EXPECT_NEAR(ufce_integer_gamma(3.7, k, g), ufce(dir(a), 0, g), 1e-10) << k << " " << g;
    }
  }
}

TEST(Regularizers, EntAndEr) {
  EXPECT_EQ(ent_regularizer(DirichletParams::uniform(3)), 0.0);
  EXPECT_GT(ent_regularizer(dir({2, 1})), 0.0);
  EXPECT_GT(ent_regularizer(dir({50, 50})), ent_regularizer(dir({5, 5})));
  EXPECT_EQ(er_loss(dir({2, 3, 4})), ent_regularizer(dir({2, 3, 4})));
  double prev = INFINITY;
  for (double t = 9; t >= 0; t -= 1) {
    const double v = er_loss(dir({1 + t, 1, 1}));
    EXPECT_LT(v, prev);
    prev = v;
  }
  EXPECT_EQ(er_loss(DirichletParams::uniform(4)), 0.0);
}

TEST(Regularizers, UceEnt) {
  const auto a = dir({4, 2, 1});
  EXPECT_EQ(uce_ent_objective(a, 0, 0.0), uce(a, 0));
  EXPECT_EQ(uce_ent_objective(DirichletParams::uniform(3), 1, 0.001), uce(DirichletParams::uniform(3), 1));
  EXPECT_NEAR(uce_ent_objective(a, 0, 0.5), uce(a, 0) + 0.5 * ent_regularizer(a), 1e-15);
}

TEST(Eus, Multiplier) {
  EXPECT_EQ(eus_multiplier(7.0, 3, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(eus_multiplier(128.0, 2, 64.0), 2.0);
  EXPECT_DOUBLE_EQ(ufce_eus(dir({1, 1}), 0, 1.0, 64.0), 48.75);
  EXPECT_EQ(ufce_eus(dir({3, 1}), 0, 1.0, 0.0), ufce(dir({3, 1}), 0, 1.0));
}

TEST(Combined, Objective) {
  LossConfig cfg;
  cfg.xi = 0;
  std::vector<SupervisedSample> batch{SupervisedSample::in_distribution(dir({3, 1}), 0),
                                      SupervisedSample::in_distribution(dir({1, 2}), 1)};
  const double mean_ufce = 0.5 * (ufce(dir({3, 1}), 0, cfg.gamma) + ufce(dir({1, 2}), 1, cfg.gamma));
  EXPECT_NEAR(combined_objective(batch, cfg), mean_ufce, 1e-15);

  batch.push_back(SupervisedSample::pseudo_ood(DirichletParams::uniform(2)));
  EXPECT_NEAR(combined_objective(batch, cfg), mean_ufce, 1e-15);

  // 2 ID + 2 OOD by hand
  cfg.xi = 64;
  cfg.lambda = 0.01;
  batch.back() = SupervisedSample::pseudo_ood(dir({4, 1}));
  batch.push_back(SupervisedSample::pseudo_ood(dir({2, 2})));
  const double id = 0.5 * (eus_multiplier(4, 2, 64) * ufce(dir({3, 1}), 0, 1) +
                           eus_multiplier(3, 2, 64) * ufce(dir({1, 2}), 1, 1));
  const double ood = 0.5 * (er_loss(dir({4, 1})) + er_loss(dir({2, 2})));
  EXPECT_NEAR(combined_objective(batch, cfg), id + 0.01 * ood, 1e-13);

  std::vector<SupervisedSample> only_ood{SupervisedSample::pseudo_ood(dir({2, 2}))};
  EXPECT_THROW(combined_objective(only_ood, cfg), InvalidParameters);
}

TEST(Combined, ClassWeight) {
  LossConfig cfg;
  cfg.positive_class_weight = 2.0;
  cfg.xi = 0;
  EXPECT_EQ(class_weight(0, cfg), 2.0);
  EXPECT_EQ(class_weight(1, cfg), 1.0);
  std::vector<SupervisedSample> batch{SupervisedSample::in_distribution(dir({3, 1}), 0)};
  EXPECT_NEAR(combined_objective(batch, cfg), 2.0 * ufce(dir({3, 1}), 0, cfg.gamma), 1e-15);
}

TEST(LossConfig, Validation) {
  LossConfig ok;
  EXPECT_NO_THROW(ok.validate());
  auto bad = [](auto mutate, const std::string& key) {
    LossConfig c;
    mutate(c);
    try {
      c.validate();
      ADD_FAILURE() << "expected rejection for " << key;
    } catch (const std::invalid_argument& e) {
      EXPECT_EQ(std::string(e.what()).rfind(key, 0), 0u) << e.what();
    }
  };
  bad([](LossConfig& c) { c.gamma = 5.5; }, "loss.gamma");
  bad([](LossConfig& c) { c.gamma = -0.1; }, "loss.gamma");
  bad([](LossConfig& c) { c.temperature = 0; }, "loss.temperature");
  bad([](LossConfig& c) { c.beta = -1; }, "loss.beta");
  bad([](LossConfig& c) { c.positive_class_weight = 0; }, "loss.positive_class_weight");
}

TEST(Deterministic, CrossEntropyAndFocal) {
  const SimplexVector onehot({1, 0, 0});
  EXPECT_EQ(cross_entropy(onehot, 0), 0.0);
  EXPECT_EQ(focal(onehot, 0, 2.0), 0.0);
  const SimplexVector half({0.5, 0.5});
  EXPECT_NEAR(focal(half, 0, 1.0), 0.5 * std::numbers::ln2, 1e-15);
  EXPECT_NEAR(focal(half, 0, 0.0), std::numbers::ln2, 1e-15);
  EXPECT_LE(focal(SimplexVector({0.3, 0.7}), 0, 2.0), cross_entropy(SimplexVector({0.3, 0.7}), 0));
  EXPECT_THROW(cross_entropy(onehot, 1), SaturationError);
  EXPECT_THROW(focal(onehot, 2, 1.0), SaturationError);
}

TEST(Deterministic, SoftmaxEntropyAndEnergy) {
  const std::vector<double> eq{0.3, 0.3, 0.3, 0.3};
  EXPECT_NEAR(softmax_entropy(eq), std::log(4.0), 1e-15);
  const std::vector<double> big{1000.0, 0.0};
  EXPECT_NEAR(softmax_entropy(big), 0.0, 1e-9);
  const std::vector<double> one{1.0, 0.0};
  const double s = 1.0 / (1.0 + std::exp(-1.0));
  EXPECT_NEAR(softmax_entropy(one), -(s * std::log(s) + (1 - s) * std::log(1 - s)), 1e-14);
  EXPECT_NEAR(softmax_entropy(one), 0.58220, 1e-5);

  const std::vector<double> zeros{0.0, 0.0};
  EXPECT_NEAR(energy_score(zeros, 1.0), -std::numbers::ln2, 1e-15);
  const std::vector<double> single{3.25};
  EXPECT_EQ(energy_score(single, 1.0), -3.25);
  const std::vector<double> l{0.2, -1.0, 2.5}, shifted{7.2, 6.0, 9.5};
  EXPECT_NEAR(energy_score(shifted, 1.0), energy_score(l, 1.0) - 7.0, 1e-13);
  EXPECT_NEAR(energy_score(std::vector<double>{2000.0, 1999.0}, 1.0),
              -2000.0 - std::log1p(std::exp(-1.0)), 1e-10);
  const std::vector<double> nan{1.0, NAN};
  EXPECT_THROW(energy_score(nan, 1.0), InvalidParameters);
  EXPECT_THROW(softmax_entropy(nan), InvalidParameters);
}

TEST(Deterministic, EnergyBoundPenalty) {
  const double m_in = -6, m_out = -1;
  const std::vector<double> in_ok{-7, -6.5}, out_ok{0, -1};
  EXPECT_EQ(energy_bound_penalty(in_ok, out_ok, m_in, m_out), 0.0);
  const std::vector<double> one_over{m_in + 1}, none{};
  EXPECT_EQ(energy_bound_penalty(one_over, none, m_in, m_out), 1.0);
  EXPECT_THROW(energy_bound_penalty(none, none, m_in, m_out), InvalidParameters);
  const std::vector<double> out_low{-3};
  EXPECT_EQ(energy_bound_penalty(none, out_low, m_in, m_out), 4.0);
}
