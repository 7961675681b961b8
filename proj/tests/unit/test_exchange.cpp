#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ecotherm/error.hpp"
#include "ecotherm/exchange.hpp"
#include "oracle.hpp"

using namespace ecotherm;

TEST(InitEnsemble, EqualSplit) {
  EXPECT_EQ(init_ensemble(4, 8.0, 1, InitMode::equal).holdings, (std::vector<double>{2, 2, 2, 2}));
  EXPECT_EQ(init_ensemble(2, 1.0, 1, InitMode::equal).holdings, (std::vector<double>{0.5, 0.5}));
  const Ensemble big = init_ensemble(10000, 10000.0, 42, InitMode::equal);
  EXPECT_TRUE(std::all_of(big.holdings.begin(), big.holdings.end(), [](double h) { return h == 1.0; }));
  EXPECT_EQ(big.steps_done, 0u);
  EXPECT_EQ(big.rng_seed, 42u);
}

TEST(InitEnsemble, RandomSumsToTotal) {
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    const Ensemble e = init_ensemble(1000, 123.456, seed, InitMode::random);
    EXPECT_LE(conservation_drift(e), 1e-12 * 123.456);
    EXPECT_TRUE(std::all_of(e.holdings.begin(), e.holdings.end(), [](double h) { return h >= 0.0; }));
    EXPECT_FALSE(fit_boltzmann(e).degenerate);
  }
  EXPECT_NE(init_ensemble(10, 1.0, 1, InitMode::random).holdings,
            init_ensemble(10, 1.0, 2, InitMode::random).holdings);
}

TEST(InitEnsemble, Errors) {
  EXPECT_THROW(init_ensemble(1, 1.0, 0, InitMode::equal), Error);
  EXPECT_THROW(init_ensemble(0, 1.0, 0, InitMode::equal), Error);
  EXPECT_THROW(init_ensemble(10, 0.0, 0, InitMode::equal), Error);
  EXPECT_THROW(init_ensemble(10, -1.0, 0, InitMode::equal), Error);
  EXPECT_THROW(init_ensemble(10, 1.0, 0, InitMode::equal, FixedTransfer{0.0}), Error);
  EXPECT_THROW(init_ensemble(10, 1.0, 0, InitMode::equal, MultiplicativeSave{1.5}), Error);
  EXPECT_THROW(init_ensemble(10, 1.0, 0, InitMode::equal, MultiplicativeSave{-0.1}), Error);
}

TEST(ExchangeRules, Arithmetic) {
  auto [a, b] = apply_exchange(UniformPair{}, 1.0, 1.0, 0.25);
  EXPECT_EQ(a, 0.5);
  EXPECT_EQ(b, 1.5);

  auto [c, d] = apply_exchange(FixedTransfer{2.0}, 1.0, 3.0, 0.7);
  EXPECT_EQ(c, 1.0);
  EXPECT_EQ(d, 3.0);
  auto [e, f] = apply_exchange(FixedTransfer{2.0}, 3.0, 1.0, 0.7);
  EXPECT_EQ(e, 1.0);
  EXPECT_EQ(f, 3.0);

  for (double eps : {0.0, 0.3, 0.999}) {
    auto [g, h] = apply_exchange(MultiplicativeSave{1.0}, 1.7, 0.2, eps);
    EXPECT_EQ(g, 1.7);
    EXPECT_EQ(h, 0.2);
  }
  auto [k, l] = apply_exchange(MultiplicativeSave{0.5}, 2.0, 4.0, 0.25);
  EXPECT_DOUBLE_EQ(k, 1.0 + 0.75);
  EXPECT_DOUBLE_EQ(l, 2.0 + 2.25);
  auto [m, n] = apply_exchange(MultiplicativeSave{0.0}, 2.0, 4.0, 0.25);
  EXPECT_DOUBLE_EQ(m, 1.5);
  EXPECT_DOUBLE_EQ(n, 4.5);
}

TEST(ExchangeRules, Names) {
  EXPECT_EQ(rule_name(UniformPair{}), "uniform_pair");
  EXPECT_EQ(rule_name(FixedTransfer{1.0}), "fixed_transfer");
  EXPECT_EQ(rule_name(MultiplicativeSave{0.5}), "multiplicative_save");
}

TEST(RngStreams, DeterministicAndIndependent) {
  Rng a(7), b(7), c(7, 1), d(8);
  std::vector<double> va, vb, vc, vd;
  for (int i = 0; i < 100; ++i) {
    va.push_back(a.uniform01());
    vb.push_back(b.uniform01());
    vc.push_back(c.uniform01());
    vd.push_back(d.uniform01());
  }
  EXPECT_EQ(va, vb);
  EXPECT_NE(va, vc);
  EXPECT_NE(va, vd);
  EXPECT_TRUE(a == b);
  for (double u : va) {
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(RngStreams, BelowIsUniform) {
  Rng r(3);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const auto k = r.below(7);
    ASSERT_LT(k, 7u);
    ++counts[k];
  }
  for (int c : counts) EXPECT_NEAR(c, n / 7, 5.0 * std::sqrt(n / 7.0));
}

TEST(ExchangeProperty, Determinism) {
  for (ExchangeRule rule : {ExchangeRule{UniformPair{}}, ExchangeRule{FixedTransfer{0.1}},
                            ExchangeRule{MultiplicativeSave{0.3}}}) {
    const Ensemble a = run(init_ensemble(500, 500.0, 11, InitMode::random, rule), 200000);
    const Ensemble b = run(init_ensemble(500, 500.0, 11, InitMode::random, rule), 200000);
    EXPECT_EQ(a.holdings, b.holdings) << rule_name(rule);
    EXPECT_EQ(a.steps_done, 200000u);
    // Two runs of half the length continue the same stream.
    const Ensemble c = run(run(init_ensemble(500, 500.0, 11, InitMode::random, rule), 100000), 100000);
    EXPECT_EQ(a.holdings, c.holdings) << rule_name(rule);
    const Ensemble d = run(init_ensemble(500, 500.0, 12, InitMode::random, rule), 200000);
    EXPECT_NE(a.holdings, d.holdings) << rule_name(rule);
  }
}

TEST(ExchangeProperty, ConservationOverTenMillionSteps) {
  const Ensemble e = run(init_ensemble(10000, 10000.0, 42, InitMode::equal), 10000000);
  EXPECT_LE(conservation_drift(e), 1e-9 * 10000.0);
}

TEST(ExchangeProperty, NonNegativeUnderEveryRule) {
  for (ExchangeRule rule : {ExchangeRule{UniformPair{}}, ExchangeRule{FixedTransfer{0.7}},
                            ExchangeRule{FixedTransfer{3.0}}, ExchangeRule{MultiplicativeSave{0.0}},
                            ExchangeRule{MultiplicativeSave{0.9}}}) {
    Ensemble e = init_ensemble(200, 200.0, 5, InitMode::random, rule);
    for (int chunk = 0; chunk < 20; ++chunk) {
      e = run(std::move(e), 10000);
      ASSERT_TRUE(std::all_of(e.holdings.begin(), e.holdings.end(), [](double h) { return h >= 0.0; }))
          << rule_name(rule);
    }
    EXPECT_LE(conservation_drift(e), 1e-9 * 200.0) << rule_name(rule);
  }
}

TEST(FitBoltzmann, ExponentialOracleSample) {
  const auto sample = oracle::exponential_sample(10000, 1.0, 2024);
  const FitResult fit = fit_boltzmann(sample);
  EXPECT_NEAR(fit.T_hat, 1.0, 0.03);
  EXPECT_LT(fit.ks_stat, 0.02);
  EXPECT_FALSE(fit.degenerate);
  ASSERT_TRUE(fit.tail_alpha);

  // Independent KS: sup over the sorted sample of the CDF gap.
  std::vector<double> s = sample;
  std::sort(s.begin(), s.end());
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double F = 1.0 - std::exp(-s[k] / mean);
    d = std::max({d, std::fabs(static_cast<double>(k + 1) / s.size() - F),
                  std::fabs(static_cast<double>(k) / s.size() - F)});
  }
  EXPECT_NEAR(fit.ks_stat, d, 1e-12);
}

TEST(FitBoltzmann, DegenerateEnsemble) {
  const FitResult fit = fit_boltzmann(init_ensemble(100, 100.0, 1, InitMode::equal));
  EXPECT_TRUE(fit.degenerate);
  EXPECT_EQ(fit.T_hat, 1.0);
  EXPECT_GE(fit.ks_stat, 0.0);
  EXPECT_LE(fit.ks_stat, 1.0);
  EXPECT_THROW(fit_boltzmann(std::vector<double>{}), Error);
}

TEST(FitBoltzmann, HillEstimateOnParetoTail) {
  const auto sample = oracle::pareto_sample(100000, 1.0, 1.5, 77);
  const FitResult fit = fit_boltzmann(sample);
  ASSERT_TRUE(fit.tail_alpha);
  EXPECT_NEAR(*fit.tail_alpha, 1.5, 0.15);
  EXPECT_FALSE(fit_boltzmann(std::vector<double>(50, 1.0)).tail_alpha);
}

TEST(ExchangeProperty, UniformPairEquilibriumIsExponential) {
  const Ensemble e = run(init_ensemble(10000, 10000.0, 42, InitMode::equal), 10000000);
  const FitResult fit = fit_boltzmann(e);
  EXPECT_NEAR(fit.T_hat, 1.0, 0.03);
  EXPECT_LT(fit.ks_stat, 0.02);
}

TEST(ExchangeProperty, SavingGivesNonExponentialEquilibrium) {
  const Ensemble e = run(init_ensemble(10000, 10000.0, 42, InitMode::equal, MultiplicativeSave{0.5}),
                         10000000);
  const FitResult fit = fit_boltzmann(e);
  EXPECT_NEAR(fit.T_hat, 1.0, 1e-9);
  EXPECT_GT(fit.ks_stat, 0.05);
}

TEST(EmpiricalEntropy, ExponentialSampleNearOne) {
  const auto sample = oracle::exponential_sample(100000, 1.0, 8);
  EXPECT_NEAR(empirical_entropy(sample, 100), 1.0, 0.1);
  const auto scaled = oracle::exponential_sample(100000, 3.0, 8);
  EXPECT_NEAR(empirical_entropy(scaled, 100), 1.0 + std::log(3.0), 0.1);
}

TEST(EmpiricalEntropy, AllEqualIsMinimal) {
  const Ensemble flat = init_ensemble(1000, 1000.0, 3, InitMode::equal);
  const double s_flat = empirical_entropy(flat, 50);
  EXPECT_NEAR(s_flat, std::log(1.0 / 50.0), 1e-12);
  // Any rearrangement keeping the same total and maximum spreads over more bins.
  for (std::uint64_t steps : {1000u, 5000u, 20000u}) {
    const Ensemble moved = run(flat, steps);
    EXPECT_GT(empirical_entropy(moved, 50), s_flat);
  }
}

TEST(EmpiricalEntropy, GrowsUnderEquilibration) {
  const Ensemble e0 = init_ensemble(10000, 10000.0, 42, InitMode::equal);
  const Ensemble e3 = run(e0, 1000);
  const Ensemble e6 = run(e3, 1000000 - 1000);
  const double s0 = empirical_entropy(e0, 100), s3 = empirical_entropy(e3, 100),
               s6 = empirical_entropy(e6, 100);
  EXPECT_LE(s0, s3);
  EXPECT_LE(s3, s6);
}

TEST(EmpiricalEntropy, Errors) {
  EXPECT_THROW(empirical_entropy(std::vector<double>{}, 20), Error);
  EXPECT_THROW(empirical_entropy(std::vector<double>{1.0, 2.0}, 9), Error);
}

TEST(Histogram, CountsAndDensities) {
  const auto sample = oracle::exponential_sample(5000, 2.0, 1);
  const auto bins = histogram(sample, 40);
  ASSERT_EQ(bins.size(), 40u);
  std::size_t total = 0;
  double mass = 0.0;
  for (std::size_t k = 0; k < bins.size(); ++k) {
    total += bins[k].count;
    mass += bins[k].density * (bins[k].hi - bins[k].lo);
    if (k > 0) {
      EXPECT_EQ(bins[k].lo, bins[k - 1].hi);
    }
  }
  EXPECT_EQ(total, 5000u);
  EXPECT_NEAR(mass, 1.0, 1e-12);
  EXPECT_EQ(bins.front().lo, 0.0);
  EXPECT_EQ(bins.back().hi, *std::max_element(sample.begin(), sample.end()));
  EXPECT_THROW(histogram(sample, 0), Error);
}
