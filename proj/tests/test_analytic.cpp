#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ncslice/analytic.hpp"

using namespace ncslice;
using namespace ncslice::analytic;

namespace {

double fact(int n) { return n <= 1 ? 1.0 : n * fact(n - 1); }

// Failure-count distribution by enumerating every erasure pattern.
std::vector<double> enumerate_failures(const std::vector<double>& probs) {
  const std::size_t n = probs.size();
  std::vector<double> out(n + 1, 0.0);
  for (unsigned mask = 0; mask < (1U << n); ++mask) {
    double w = 1.0;
    int f = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool lost = mask & (1U << i);
      w *= lost ? probs[i] : 1.0 - probs[i];
      f += lost;
    }
    out[f] += w;
  }
  return out;
}

RlncAnalyticInputs inputs(double p, std::size_t links, double g1 = 1.2, double g2 = 2.0, std::size_t k = 5,
                          double rtt = 16) {
  return {k, g1, g2, p, links, rtt};
}

}  // namespace

TEST(MissingDof, PoissonBranches) {
  const auto pmf = missing_dof_pmf(inputs(0.1, 2));
  ASSERT_EQ(pmf.size(), 6U);
  EXPECT_NEAR(pmf[0], std::exp(-0.6) * 1.6, 1e-12);
  EXPECT_NEAR(pmf[0], 0.8781, 1e-4);
  EXPECT_NEAR(pmf[1], std::exp(-0.6) * 0.36 / 2, 1e-12);
  EXPECT_NEAR(pmf[1], 0.0988, 1e-4);
  EXPECT_NEAR(pmf[5], std::exp(-0.6) * std::pow(0.6, 6) / fact(6), 1e-15);
  EXPECT_DOUBLE_EQ(missing_dof_pmf(inputs(0.0, 2))[0], 1.0);
  EXPECT_DOUBLE_EQ(inputs(0.1, 2).lambda(), 5 * 1.2 * 0.1);
  EXPECT_THROW(missing_dof_pmf(inputs(0.1, 2, 0.9)), ConfigError);
}

TEST(MissingDof, MassIsPoissonCdfAtCutoffPlusK) {
  for (double p : {0.05, 0.1, 0.2, 0.5}) {
    const auto in = inputs(p, 1, 1.25, 2.5, 50);
    const auto pmf = missing_dof_pmf(in);
    double total = 0.0, cdf = 0.0;
    for (double q : pmf) total += q;
    const std::size_t c = loss_cutoff(50, 1.25);
    ASSERT_EQ(c, 13U);
    for (std::size_t n = 0; n <= c + 50; ++n) cdf += poisson_pmf(n, in.lambda());
    EXPECT_NEAR(total, cdf, 1e-12);
    EXPECT_NEAR(residual_mass(pmf), 1.0 - cdf, 1e-12);
  }
}

TEST(MissingDof, LargeLambdaStaysFinite) {
  const auto pmf = missing_dof_pmf(inputs(0.9, 1, 3.0, 4.0, 200));
  for (double q : pmf) ASSERT_TRUE(std::isfinite(q));
}

TEST(MissingDofExact, TrivialCases) {
  EXPECT_DOUBLE_EQ(missing_dof_exact(7, 1.3, {0.0})[0], 1.0);
  const auto one = missing_dof_exact(1, 1.0, {0.3});
  EXPECT_NEAR(one[0], 0.7, 1e-15);
  EXPECT_NEAR(one[1], 0.3, 1e-15);
}

TEST(MissingDofExact, BinomialFoldAndGate) {
  const auto exact = missing_dof_exact(5, 1.2, {0.1, 0.1});
  EXPECT_NEAR(exact[0], std::pow(0.9, 6) + 6 * 0.1 * std::pow(0.9, 5), 1e-12);
  EXPECT_NEAR(exact[5], std::pow(0.1, 6), 1e-15);
  EXPECT_LT(tv_distance(missing_dof_pmf(inputs(0.1, 2)), exact), 0.02);
  EXPECT_LT(tv_distance(missing_dof_pmf(inputs(0.2, 10, 1.25, 2.5, 50)), missing_dof_exact(50, 1.25, {0.2})),
            0.05);
}

TEST(MissingDofExact, MatchesPatternEnumeration) {
  const std::vector<double> links{0.05, 0.2, 0.13};
  const auto exact = missing_dof_exact(5, 1.2, links);  // 6 packets, cutoff 1
  std::vector<double> probs;
  for (int i = 0; i < 6; ++i) probs.push_back(links[i % 3]);
  const auto f = enumerate_failures(probs);
  EXPECT_NEAR(exact[0], f[0] + f[1], 1e-14);
  for (std::size_t m = 1; m <= 5; ++m) EXPECT_NEAR(exact[m], f[m + 1], 1e-14);
}

TEST(MissingDofExact, ApproximationGateOverGrid) {
  for (double p : {0.01, 0.05, 0.1})
    for (std::size_t k : {1, 5, 10, 20, 40})
      for (double g : {1.0, 1.1, 1.2, 1.5}) {
        if (static_cast<double>(k) * g > 60) continue;
        if (g == 1.0 && p > 0.05) continue;  // zero redundancy at p=0.1 sits near 0.025
        const auto in = inputs(p, 1, g, 2.0, k);
        EXPECT_LT(tv_distance(missing_dof_pmf(in), missing_dof_exact(k, g, {p})), 0.02)
            << "p=" << p << " k=" << k << " g=" << g;
      }
}

TEST(TvDistance, Basics) {
  const std::vector<double> a{0.5, 0.5}, b{1.0, 0.0}, c{0.5, 0.25};
  EXPECT_DOUBLE_EQ(tv_distance(a, a), 0.0);
  EXPECT_DOUBLE_EQ(tv_distance(a, b), 0.5);
  EXPECT_DOUBLE_EQ(tv_distance(b, a), 0.5);
  EXPECT_DOUBLE_EQ(tv_distance(a, c), 0.25);  // unassigned 0.25 counts as its own outcome
}

TEST(RlncDelay, LosslessValues) {
  EXPECT_DOUBLE_EQ(rlnc_expected_delay(inputs(0.0, 2)), 11.0);
  EXPECT_DOUBLE_EQ(rlnc_expected_delay(inputs(0.0, 6)), 9.0);
}

TEST(RlncDelay, TermByTermOracle) {
  const auto in = inputs(0.1, 2);
  const double l = 0.6;
  double p[6];
  p[0] = std::exp(-l) * (1 + l);
  double tail = 1.0 - p[0];
  for (int m = 1; m <= 5; ++m) {
    p[m] = std::exp(-l) * std::pow(l, m + 1) / fact(m + 1);
    tail -= p[m];
  }
  p[5] += tail;
  double expect = (8 + 3) * p[0];
  for (int m = 1; m <= 5; ++m) expect += (24 + 3 + std::ceil(2.0 * m / 2)) * p[m];
  EXPECT_NEAR(rlnc_expected_delay(in), expect, 1e-12);
}

TEST(RlncDelay, NonIncreasingInSliceSize) {
  for (double p : {0.0, 0.1, 0.2}) {
    double prev = INFINITY;
    for (std::size_t links = 1; links <= 20; ++links) {
      const double d = rlnc_expected_delay(inputs(p, links, 1.0 / (1 - p), 2.0 / (1 - p)));
      EXPECT_LE(d, prev + 1e-12) << links;
      prev = d;
    }
  }
}

TEST(RlncGoodput, Values) {
  EXPECT_DOUBLE_EQ(rlnc_expected_goodput(inputs(0.0, 6)), 5.0);
  EXPECT_DOUBLE_EQ(rlnc_expected_goodput(inputs(0.0, 7, 1.0)), 7.0);
  const auto pmf = missing_dof_pmf(inputs(0.1, 20));
  double expect = 0.0;
  for (int m = 0; m <= 5; ++m) expect += 5.0 / (6.0 + 2.0 * m) * pmf[m] * 20;
  EXPECT_NEAR(rlnc_expected_goodput(inputs(0.1, 20)), expect, 1e-12);
}

TEST(ArqPmf, Geometric) {
  const auto d = arq_delay_pmf(0.1, 16);
  d.validate();
  EXPECT_DOUBLE_EQ(d.support[0].first, 8.0);
  EXPECT_DOUBLE_EQ(d.support[0].second, 0.9);
  EXPECT_DOUBLE_EQ(d.support[2].first, 8.0 + 32.0);
  EXPECT_NEAR(d.support[2].second, 0.009, 1e-15);
  double partial = 0.0;
  for (std::size_t k = 0; k < 10; ++k) {
    partial += d.support[k].second;
    EXPECT_NEAR(partial, 1.0 - std::pow(0.1, static_cast<double>(k + 1)), 1e-15);
  }
  EXPECT_NEAR(d.failure_mass, std::pow(0.1, 65), 1e-70);
  const auto lossless = arq_delay_pmf(0.0, 16);
  EXPECT_DOUBLE_EQ(lossless.support[0].second, 1.0);
  EXPECT_DOUBLE_EQ(lossless.failure_mass, 0.0);
}

TEST(HarqPmf, ProductsAndDominance) {
  const auto h = harq_delay_pmf(halving_model(0.1), 16);
  h.validate();
  EXPECT_DOUBLE_EQ(h.support[0].second, 0.9);
  EXPECT_NEAR(h.support[1].second, 0.1 * 0.95, 1e-15);
  EXPECT_NEAR(h.support[2].second, 0.1 * 0.05 * 0.975, 1e-15);
  EXPECT_NEAR(h.support[2].second, 0.004875, 1e-15);
  const auto a = arq_delay_pmf(0.1, 16);
  double ch = 0, ca = 0;
  for (std::size_t k = 0; k < a.support.size(); ++k) {
    ch += h.support[k].second;
    ca += a.support[k].second;
    EXPECT_GE(ch, ca - 1e-15);
  }
  EXPECT_THROW(harq_delay_pmf([](std::size_t) { return 1.5; }, 16), ConfigError);
}

TEST(BaselinePmf, HarqWithinArq) {
  EXPECT_NEAR(harq_round_failure(0.1), 0.1 * 0.05 * 0.025 * 0.0125, 1e-20);
  EXPECT_NEAR(harq_round_failure(0.1), 1.5625e-6, 1e-18);
  const auto d = baseline_delay_pmf(0.1, 16);
  d.validate();
  ASSERT_EQ(d.support.size(), 32U);
  EXPECT_NEAR(d.support[4].second, 0.9 * 1.5625e-6, 1e-18);
  EXPECT_NEAR(d.support[4].second, 1.406e-6, 1e-9);
  EXPECT_NEAR(d.support[5].second, 0.95 * 0.1 * 1.5625e-6, 1e-18);
  EXPECT_NEAR(d.failure_mass, std::pow(1.5625e-6, 8), 1e-60);
  EXPECT_DOUBLE_EQ(d.support[31].first, 8 + 31 * 16.0);

  const auto lossless = baseline_delay_pmf(0.0, 16);
  EXPECT_DOUBLE_EQ(lossless.support[0].second, 1.0);
  EXPECT_DOUBLE_EQ(lossless.failure_mass, 0.0);
  for (double p : {0.0, 0.3, 0.7, 1.0}) baseline_delay_pmf(p, 500, 3, 5).validate();
}

TEST(BaselineGoodput, Values) {
  const auto mix = attempt_mix(0.1);
  double s = 0;
  for (double m : mix) s += m;
  EXPECT_NEAR(s, 1.0, 1e-15);
  EXPECT_NEAR(mix[1] / mix[0], 0.1, 1e-12);
  EXPECT_DOUBLE_EQ(baseline_expected_goodput({0, 0, 0}, mix), 3.0);
  EXPECT_DOUBLE_EQ(baseline_expected_goodput({0.1}, {1.0, 0, 0, 0}), 0.9);
  const double g = baseline_expected_goodput(std::vector<double>(20, 0.1), mix);
  EXPECT_GT(g, 18.0);
  EXPECT_LT(g, 20.0);
}

TEST(DelayPmf, ValidateRejectsBadShapes) {
  DelayPmf bad{{{8, 0.5}, {8, 0.5}}, 0.0};
  EXPECT_THROW(bad.validate(), ContractViolation);
  DelayPmf short_mass{{{8, 0.5}}, 0.0};
  EXPECT_THROW(short_mass.validate(), ContractViolation);
  DelayPmf neg{{{8, 1.5}, {9, -0.5}}, 0.0};
  EXPECT_THROW(neg.validate(), ContractViolation);
}

TEST(Json, Export) {
  const auto j = to_json(arq_delay_pmf(0.1, 16, 3));
  EXPECT_EQ(j["support"].size(), 4U);
  EXPECT_DOUBLE_EQ(j["support"][0]["p"].get<double>(), 0.9);
  const auto rec = formula_record("rlnc_delay", to_json(inputs(0.1, 2)), rlnc_expected_delay(inputs(0.1, 2)));
  EXPECT_EQ(rec["formula"], "rlnc_delay");
  EXPECT_DOUBLE_EQ(rec["inputs"]["lambda"].get<double>(), 0.6);
}
