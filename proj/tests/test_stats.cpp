#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "doctest.h"
#include "iflab/stats.hpp"
#include "oracles.hpp"

using namespace iflab;

namespace {

// convenient literal for synthetic increment streams
IncrementObservables obs(int f1, int f2, int f3, int fV, int fA, int m) {
  IncrementObservables o;
  o.f1 = f1;
  o.f2 = f2;
  o.f3 = f3;
  o.fV = fV;
  o.fA = fA;
  o.m = m;
  return o;
}

}  // namespace

TEST_CASE("normal cdf anchors") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(normal_cdf(1.959964) == doctest::Approx(0.975).epsilon(1e-5));
  CHECK(normal_cdf(-1.959964) == doctest::Approx(0.025).epsilon(1e-4));
  for (double z : {0.3, 1.1, 2.7})
    CHECK(normal_cdf(z) + normal_cdf(-z) == doctest::Approx(1.0));
}

TEST_CASE("effective sample size tracks autocorrelation") {
  std::mt19937_64 g(3);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<double> iid;
  for (int i = 0; i < 4000; ++i) iid.push_back(noise(g));
  double e_iid = effective_sample_size(iid);
  CHECK(e_iid > 2400.0);
  CHECK(e_iid <= 4000.0);

  // AR(1) with phi = 0.9 has ESS factor (1-phi)/(1+phi) ~ 1/19
  std::vector<double> ar;
  double x = 0.0;
  for (int i = 0; i < 20000; ++i) {
    x = 0.9 * x + noise(g);
    ar.push_back(x);
  }
  double e_ar = effective_sample_size(ar);
  CHECK(e_ar < 2400.0);
  CHECK(e_ar > 300.0);

  CHECK(effective_sample_size(std::vector<double>(100, 7.0)) == doctest::Approx(100.0));
  CHECK(effective_sample_size({1.0}) == doctest::Approx(1.0));
}

TEST_CASE("normality test separates shapes") {
  std::mt19937_64 g(5);
  std::normal_distribution<double> normal(2.0, 3.0);
  std::exponential_distribution<double> expo(1.0);

  std::vector<double> good, bad;
  for (int i = 0; i < 800; ++i) {
    good.push_back(normal(g));
    bad.push_back(expo(g));
  }

  Normality ok = normality_test(good);
  CHECK(ok.n == 800);
  CHECK(ok.p > 0.01);
  CHECK(ok.ks > 0.0);

  Normality no = normality_test(bad);
  CHECK(no.p < 0.01);
  CHECK(no.ad > ok.ad);
}

TEST_CASE("one-sided trend test") {
  std::vector<double> down, up, flat;
  for (int i = 0; i < 10; ++i) {
    down.push_back(10.0 - i);
    up.push_back(double(i));
    flat.push_back(1.0);
  }
  CHECK(trend_decreasing_p(down) < 0.01);
  CHECK(trend_decreasing_p(up) > 0.9);
  CHECK(trend_decreasing_p(flat) == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("height tail by hand") {
  std::vector<int> heights = {0, 1, 1, 2, 3};
  TailEstimate t = height_tail(heights, 3);
  CHECK(t.n == 5);
  REQUIRE(t.counts.size() == 3);
  CHECK(t.counts[0] == 4);
  CHECK(t.counts[1] == 2);
  CHECK(t.counts[2] == 1);
  CHECK(t.survival[0] == doctest::Approx(0.8));
  CHECK(t.survival[1] == doctest::Approx(0.4));
  CHECK(t.survival[2] == doctest::Approx(0.2));
  CHECK(t.rate[0] == doctest::Approx(-std::log(0.8)));
  CHECK(t.rate[1] == doctest::Approx(-std::log(0.4) / 2));
  CHECK(t.rate[2] == doctest::Approx(-std::log(0.2) / 3));
  for (int i = 0; i < 3; ++i) {
    CHECK(!t.censored[std::size_t(i)]);
    CHECK(t.rate_lo[std::size_t(i)] <= t.rate[std::size_t(i)]);
    CHECK(t.rate_hi[std::size_t(i)] >= t.rate[std::size_t(i)]);
  }

  // heights nobody reached are censored, not invented
  TailEstimate far = height_tail(heights, 5);
  CHECK(far.counts[4] == 0);
  CHECK(bool(far.censored[4]));
  CHECK(far.rate[4] == 0.0);

  // seeded bootstrap: identical inputs give identical intervals
  TailEstimate again = height_tail(heights, 3);
  CHECK(again.rate_lo == t.rate_lo);
  CHECK(again.rate_hi == t.rate_hi);
}

TEST_CASE("alpha fit recovers an exact exponential slope") {
  TailEstimate t;
  t.n = 1000;
  t.ess = 1000;
  for (int h = 1; h <= 4; ++h) {
    t.counts.push_back(1);  // unused by the fit
    t.survival.push_back(std::exp(-5.0 * h));
    t.rate.push_back(5.0);
    t.rate_lo.push_back(5.0 - 0.1 / h);
    t.rate_hi.push_back(5.0 + 0.1 / h);
    t.censored.push_back(0);
  }
  AlphaEstimate a = alpha_estimate(t);
  CHECK(a.used == 4);
  CHECK(a.alpha == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(a.se > 0.0);
  CHECK(a.ci_lo < 5.0);
  CHECK(a.ci_hi > 5.0);

  t.censored[0] = 1;
  t.censored[1] = 1;
  CHECK_THROWS_AS(alpha_estimate(t), std::invalid_argument);
}

TEST_CASE("maximum interface height") {
  CHECK(max_height(oracle::fixture_flat(8)) == 0);
  CHECK(max_height(oracle::fixture_single_bump(8)) == 1);
  CHECK(max_height(oracle::fixture_column(8, 5)) == 5);
  CHECK(max_height(oracle::fixture_mushroom(8)) == 2);
  CHECK(max_height(oracle::fixture_diagonal(8)) == 2);
}

TEST_CASE("law of large numbers ratios") {
  std::map<int, std::vector<int>> by_n;
  by_n[16] = {2, 3, 3, 4};
  by_n[32] = {3, 3, 3, 3, 3};

  auto rows = lln_ratio(by_n);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].n == 16);
  CHECK(rows[0].count == 4);
  CHECK(rows[0].median == doctest::Approx(3.0 / std::log(16.0)));
  CHECK(rows[0].q25 == doctest::Approx(2.75 / std::log(16.0)));
  CHECK(rows[0].q75 == doctest::Approx(3.25 / std::log(16.0)));
  CHECK(rows[1].n == 32);
  CHECK(rows[1].median == doctest::Approx(3.0 / std::log(32.0)));
  CHECK(rows[1].q25 == rows[1].q75);
}

TEST_CASE("increment moments on synthetic streams") {
  const int T = 8;
  StatParams par;
  par.K = 1.0;  // bulk window [3, 5]

  SUBCASE("constants are recovered exactly") {
    std::vector<std::vector<IncrementObservables>> samples(
        10, std::vector<IncrementObservables>(8, obs(1, -1, 2, 1, 4, 2)));
    IncrementStats s = increment_moments(samples, T, par);
    CHECK(s.bulk_lo == 3);
    CHECK(s.bulk_hi == 5);
    CHECK(s.pooled == 30);
    CHECK(s.mean[0] == doctest::Approx(1.0));
    CHECK(s.mean[1] == doctest::Approx(-1.0));
    CHECK(s.mean[2] == doctest::Approx(2.0));
    CHECK(s.mean[5] == doctest::Approx(2.0));
    for (int c = 0; c < 6; ++c) CHECK(s.var[std::size_t(c)] == doctest::Approx(0.0));
    CHECK(s.cov12 == doctest::Approx(0.0));
    CHECK(s.se1 == doctest::Approx(0.0));
    REQUIRE(s.index_mean.size() == 8);
    CHECK(s.index_mean[6][3] == doctest::Approx(1.0));
    REQUIRE(s.m_survival.size() == 2);
    CHECK(s.m_survival[0][1] == doctest::Approx(1.0));
    CHECK(s.m_survival[1][1] == doctest::Approx(1.0));
    CHECK(s.m_slope == doctest::Approx(0.0));
  }

  SUBCASE("antisymmetric streams cancel in the mean, not the spread") {
    std::vector<std::vector<IncrementObservables>> samples = {
        std::vector<IncrementObservables>(8, obs(2, 1, 1, 1, 4, 0)),
        std::vector<IncrementObservables>(8, obs(-2, -1, 1, 1, 4, 0)),
    };
    IncrementStats s = increment_moments(samples, T, par);
    CHECK(s.pooled == 6);
    CHECK(s.mean[0] == doctest::Approx(0.0));
    CHECK(s.mean[1] == doctest::Approx(0.0));
    // pooled covariance of (2,1)x3 and (-2,-1)x3 with the n-1 divisor
    CHECK(s.cov12 == doctest::Approx(12.0 / 5.0));
    // clustered se over two window means +-2: sd = 2 sqrt(2), /sqrt(2)
    CHECK(s.se1 == doctest::Approx(2.0));
    CHECK(s.se2 == doctest::Approx(1.0));
  }

  SUBCASE("an empty bulk window is an error") {
    std::vector<std::vector<IncrementObservables>> samples(
        4, std::vector<IncrementObservables>(8, obs(0, 0, 1, 1, 4, 0)));
    StatParams wide;
    wide.K = 10.0;
    CHECK_THROWS_AS(increment_moments(samples, T, wide), std::invalid_argument);
    CHECK_THROWS_AS(
        increment_moments(std::vector<std::vector<IncrementObservables>>{}, T, par),
        std::invalid_argument);
  }
}

TEST_CASE("coarse alphabet covers all twelve bins") {
  std::vector<bool> hit(std::size_t(kBinCount), false);
  for (int m = 0; m <= 3; ++m)
    for (int f3 = 1; f3 <= 3; ++f3) {
      int b = increment_bin(obs(0, 0, f3, 1, 4, m));
      REQUIRE(b >= 0);
      REQUIRE(b < kBinCount);
      hit[std::size_t(b)] = true;
    }
  for (bool h : hit) CHECK(h);

  // saturation: deep values share the edge bins
  CHECK(increment_bin(obs(0, 0, 9, 1, 4, 7)) == increment_bin(obs(0, 0, 3, 1, 4, 3)));
}

TEST_CASE("mixing profile separates independence from coupling") {
  std::mt19937_64 g(17);
  std::uniform_int_distribution<int> bin(0, 11);
  auto from_bin = [](int b) { return obs(0, 0, b % 3 + 1, 1, 4, b / 3); };

  std::vector<std::vector<IncrementObservables>> indep, coupled;
  for (int s = 0; s < 3000; ++s) {
    std::vector<IncrementObservables> a, b;
    int shared = bin(g);
    for (int p = 0; p < 12; ++p) {
      a.push_back(from_bin(bin(g)));
      b.push_back(from_bin(shared));
    }
    indep.push_back(a);
    coupled.push_back(b);
  }

  std::vector<int> gaps = {1, 2, 4, 8};
  MixingProfile mi = mixing_profile(indep, 2, gaps);
  REQUIRE(mi.rows.size() == 4);
  for (const MixingRow& row : mi.rows) {
    CHECK(row.j == 2);
    CHECK(row.count == 3000);
    CHECK(row.tv < 0.2);
  }
  double msum = 0;
  for (std::size_t c = 0; c < mi.marginal.size(); ++c) {
    msum += mi.marginal[c];
    CHECK(mi.marginal_lo[c] <= mi.marginal[c]);
    CHECK(mi.marginal_hi[c] >= mi.marginal[c]);
  }
  CHECK(msum == doctest::Approx(1.0));

  MixingProfile co = mixing_profile(coupled, 2, gaps);
  for (const MixingRow& row : co.rows) CHECK(row.tv > 0.5);

  // seeded bootstrap reproduces
  MixingProfile again = mixing_profile(indep, 2, gaps);
  CHECK(again.marginal_lo == mi.marginal_lo);
  CHECK(again.trend_p == mi.trend_p);
}

TEST_CASE("clt report on planted sums") {
  std::mt19937_64 g(23);
  std::uniform_int_distribution<int> len(20, 40);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> tri(1, 3);

  std::vector<std::vector<IncrementObservables>> samples;
  for (int s = 0; s < 600; ++s) {
    std::vector<IncrementObservables> seq;
    int L = len(g);
    for (int p = 0; p < L; ++p) {
      int f1 = coin(g) * 2 - 1;       // +-1, mean 0
      int f2 = (coin(g) * 2 - 1) * 3; // +-3, mean 0, nine times the variance
      seq.push_back(obs(f1, f2, tri(g), 1, 4, coin(g)));
    }
    samples.push_back(seq);
  }

  CLTReport r = clt_report(samples);
  CHECK(r.f1.n == 600);
  CHECK(r.f1.lambda == doctest::Approx(0.0).epsilon(0.1));
  CHECK(std::abs(r.f1.lambda) < 0.08);
  CHECK(r.f3.lambda == doctest::Approx(2.0).epsilon(0.05));
  CHECK(r.f1.sigma2 > 0.5);
  CHECK(r.f2.sigma2 > 4.5);
  CHECK(r.f3.sigma2 > 0.0);
  CHECK(r.fV.sigma2 == doctest::Approx(0.0));  // constant observable
  CHECK(r.f3.ad_p > 0.005);

  // independent coins: the sums decorrelate
  CHECK(std::abs(r.cov12) < 4.0 * r.cov12_se);
  CHECK(r.var_ratio > 0.05);
  CHECK(r.var_ratio < 0.25);
  CHECK(r.var_ratio_lo <= r.var_ratio);
  CHECK(r.var_ratio_hi >= r.var_ratio);

  // reruns are bit-identical; short inputs are refused
  CLTReport r2 = clt_report(samples);
  CHECK(r2.var_ratio_lo == r.var_ratio_lo);
  CHECK(r2.f1.ad_p == r.f1.ad_p);
  samples.resize(499);
  CHECK_THROWS_AS(clt_report(samples), std::invalid_argument);
}
