#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "iflab/ising.hpp"
#include "iflab/pillar.hpp"

namespace iflab {

// Estimator knobs. Everything that involves randomness (bootstrap resampling)
// is seeded here, so reruns reproduce bit for bit.
struct StatParams {
  int bootstrap = 200;
  std::uint64_t seed = 1;
  double K = 2.0;       // bulk-window multiplier, positions in [K logT, T-K logT]
  int min_samples = 500;
  int pool_min = 5;     // alphabet categories rarer than this get pooled
};

// ---- generic helpers -----------------------------------------------------------

double normal_cdf(double z);

// effective sample size of an autocorrelated series: n / (1 + 2 sum rho_k),
// lags summed by adjacent pairs until a pair turns negative
double effective_sample_size(const std::vector<double>& series);

// Anderson-Darling and Kolmogorov-Smirnov against a normal with estimated
// mean and variance; the p-value is for the AD statistic
struct Normality {
  double ad = 0, p = 0, ks = 0;
  int n = 0;
};
Normality normality_test(std::vector<double> xs);

// one-sided Mann-Kendall p-value for a decreasing trend
double trend_decreasing_p(const std::vector<double>& xs);

// ---- height tail ---------------------------------------------------------------

struct TailEstimate {
  int n = 0;
  double ess = 0;                       // effective sample size of the series
  std::vector<long long> counts;        // samples with hgt >= h, h = 1..h_max
  std::vector<double> survival;         // counts / n, non-increasing
  std::vector<double> rate;             // -(1/h) log survival; 0 when censored
  std::vector<double> rate_lo, rate_hi; // bootstrap CI, widened by n/ess
  std::vector<char> censored;           // no samples reached this height
};

TailEstimate height_tail(const std::vector<int>& heights, int h_max,
                         const StatParams& par = {});

struct AlphaEstimate {
  double alpha = 0, se = 0, ci_lo = 0, ci_hi = 0;
  int used = 0;  // heights entering the fit
};

// weighted least squares of -log survival against h; throws when fewer than
// three usable heights remain
AlphaEstimate alpha_estimate(const TailEstimate& tail);

// ---- maximum over the box ------------------------------------------------------

// largest height reached by any interface face
int max_height(const SpinConfig& cfg);

struct LLNRow {
  int n = 0;
  int count = 0;
  double median = 0, q25 = 0, q75 = 0;  // of M / log n
};

std::vector<LLNRow> lln_ratio(const std::map<int, std::vector<int>>& max_by_n);

// ---- increment moments ---------------------------------------------------------

// observable order used in the arrays below: f1 f2 f3 fV fA m
struct IncrementStats {
  int bulk_lo = 0, bulk_hi = 0;  // absolute positions of the window
  long long pooled = 0;          // observations in the window
  std::array<double, 6> mean{}, var{};
  double cov12 = 0;
  double se1 = 0, se2 = 0;  // clustered standard errors of the f1/f2 means
  std::vector<std::array<double, 6>> index_mean;  // positions 1..T
  std::vector<std::array<double, 2>> m_survival;  // (v, P(m >= v)), v >= 1
  double m_slope = 0;  // least-squares slope of log P(m >= v)
};

// samples hold per-position observables of full decompositions, position 1
// first; throws when the bulk window is empty or the samples are too few
IncrementStats increment_moments(
    const std::vector<std::vector<IncrementObservables>>& samples, int T,
    const StatParams& par = {});

// ---- empirical mixing ----------------------------------------------------------

// coarse alphabet for the dependence estimates: (m capped at 3) x (f3 capped
// at 3), twelve categories
int increment_bin(const IncrementObservables& o);
inline constexpr int kBinCount = 12;

struct MixingRow {
  int j = 0, k = 0;
  long long count = 0;
  double tv = 0;  // distance between the joint law and the product law
};

struct MixingProfile {
  std::vector<MixingRow> rows;  // anchor j fixed, increasing gap
  double trend_p = 1.0;         // Mann-Kendall, decreasing tv
  std::vector<double> marginal; // category frequencies at the anchor
  std::vector<double> marginal_lo, marginal_hi;  // bootstrap CI per category
};

MixingProfile mixing_profile(
    const std::vector<std::vector<IncrementObservables>>& samples, int j,
    const std::vector<int>& gaps, const StatParams& par = {});

// ---- sums over the spine -------------------------------------------------------

struct CLTBlock {
  double lambda = 0;  // per-increment mean
  double sigma2 = 0;  // variance of the standardized sums
  double ad = 0, ad_p = 0, ks = 0;
  int n = 0;
};

struct CLTReport {
  CLTBlock f1, f2, f3, fV, fA;
  double cov12 = 0, cov12_se = 0;  // covariance of the f1/f2 sums
  double var_ratio = 0;            // Var S(f1) / Var S(f2)
  double var_ratio_lo = 0, var_ratio_hi = 0;  // bootstrap CI
};

// samples hold per-increment observables of one spine each (variable length);
// each sample contributes one standardized sum per observable. Throws when
// fewer than par.min_samples arrive.
CLTReport clt_report(const std::vector<std::vector<IncrementObservables>>& samples,
                     const StatParams& par = {});

}  // namespace iflab
