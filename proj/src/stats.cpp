// Estimators over sampled interfaces: height-tail rates, the tail-decay
// slope, maximum-height ratios, increment moments, the coarse dependence
// profile, and standardized spine sums. Pure functions of (data, params);
// the only randomness is the seeded bootstrap.

#include "iflab/stats.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "iflab/interface.hpp"

namespace iflab {

namespace {

double mean_of(const std::vector<double>& xs) {
  double s = 0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / double(xs.size());
}

double var_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double s = 0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / double(xs.size() - 1);
}

// interpolated quantile of a sorted vector
double quantile_sorted(const std::vector<double>& xs, double q) {
  assert(!xs.empty());
  const double pos = q * double(xs.size() - 1);
  const std::size_t i = std::size_t(pos);
  if (i + 1 >= xs.size()) return xs.back();
  const double frac = pos - double(i);
  return xs[i] * (1.0 - frac) + xs[i + 1] * frac;
}

std::mt19937_64 boot_rng(const StatParams& par, std::uint64_t stream) {
  return std::mt19937_64(mix_seed(par.seed, stream, 0));
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double effective_sample_size(const std::vector<double>& series) {
  const std::size_t n = series.size();
  if (n < 3) return double(n);
  const double m = mean_of(series);
  double c0 = 0;
  for (double x : series) c0 += (x - m) * (x - m);
  c0 /= double(n);
  if (c0 <= 0) return double(n);  // constant series
  auto rho = [&](std::size_t k) {
    double c = 0;
    for (std::size_t t = 0; t + k < n; ++t) c += (series[t] - m) * (series[t + k] - m);
    return c / double(n) / c0;
  };
  // sum adjacent-lag pairs while they stay positive
  double acc = 0;
  const std::size_t max_lag = std::min<std::size_t>(n - 1, 1000);
  for (std::size_t k = 1; k + 1 <= max_lag; k += 2) {
    const double pair = rho(k) + rho(k + 1);
    if (pair <= 0) break;
    acc += pair;
  }
  const double ess = double(n) / (1.0 + 2.0 * acc);
  return std::clamp(ess, 1.0, double(n));
}

Normality normality_test(std::vector<double> xs) {
  Normality out;
  out.n = int(xs.size());
  if (xs.size() < 8) return out;  // too small for the approximations
  const double m = mean_of(xs);
  const double sd = std::sqrt(var_of(xs));
  if (sd <= 0) return out;
  for (double& x : xs) x = (x - m) / sd;
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();

  double a2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = std::clamp(normal_cdf(xs[i]), 1e-300, 1.0);
    const double hi = std::clamp(1.0 - normal_cdf(xs[n - 1 - i]), 1e-300, 1.0);
    a2 += (2.0 * double(i) + 1.0) * (std::log(lo) + std::log(hi));
  }
  a2 = -double(n) - a2 / double(n);
  out.ad = a2;
  // parameters were estimated from the data
  const double as = a2 * (1.0 + 0.75 / double(n) + 2.25 / double(n * n));
  double p;
  if (as >= 0.6)
    p = std::exp(1.2937 - 5.709 * as + 0.0186 * as * as);
  else if (as > 0.34)
    p = std::exp(0.9177 - 4.279 * as - 1.38 * as * as);
  else if (as > 0.2)
    p = 1.0 - std::exp(-8.318 + 42.796 * as - 59.938 * as * as);
  else
    p = 1.0 - std::exp(-13.436 + 101.14 * as - 223.73 * as * as);
  out.p = std::clamp(p, 0.0, 1.0);

  double d = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = normal_cdf(xs[i]);
    d = std::max(d, std::abs(f - double(i + 1) / double(n)));
    d = std::max(d, std::abs(f - double(i) / double(n)));
  }
  out.ks = d;
  return out;
}

double trend_decreasing_p(const std::vector<double>& xs) {
  const int n = int(xs.size());
  if (n < 3) return 1.0;
  long long s = 0;
  for (int i = 0; i < n; ++i)
    for (int k = i + 1; k < n; ++k) {
      if (xs[std::size_t(k)] < xs[std::size_t(i)]) --s;
      else if (xs[std::size_t(k)] > xs[std::size_t(i)]) ++s;
    }
  const double sigma = std::sqrt(double(n) * (n - 1) * (2 * n + 5) / 18.0);
  double z = 0;
  if (s > 0) z = (double(s) - 1.0) / sigma;
  if (s < 0) z = (double(s) + 1.0) / sigma;
  return normal_cdf(z);
}

// ---- height tail ---------------------------------------------------------------

TailEstimate height_tail(const std::vector<int>& heights, int h_max,
                         const StatParams& par) {
  if (heights.empty() || h_max < 1)
    throw std::invalid_argument("height_tail: empty input");
  TailEstimate out;
  out.n = int(heights.size());
  {
    std::vector<double> series(heights.begin(), heights.end());
    out.ess = effective_sample_size(series);
  }
  out.counts.assign(std::size_t(h_max), 0);
  for (int h : heights)
    for (int v = 1; v <= std::min(h, h_max); ++v) ++out.counts[std::size_t(v - 1)];
  out.survival.resize(std::size_t(h_max));
  out.rate.resize(std::size_t(h_max));
  out.censored.resize(std::size_t(h_max));
  for (int v = 1; v <= h_max; ++v) {
    const std::size_t i = std::size_t(v - 1);
    out.survival[i] = double(out.counts[i]) / double(out.n);
    out.censored[i] = out.counts[i] == 0;
    out.rate[i] = out.censored[i] ? 0.0 : -std::log(out.survival[i]) / double(v);
  }

  // percentile bootstrap on the rates, widened for autocorrelation
  const double widen = std::sqrt(double(out.n) / out.ess);
  std::vector<std::vector<double>> rates;
  rates.resize(std::size_t(h_max));
  std::mt19937_64 g = boot_rng(par, 1);
  std::uniform_int_distribution<std::size_t> pick(0, heights.size() - 1);
  for (int b = 0; b < par.bootstrap; ++b) {
    std::vector<long long> cnt(std::size_t(h_max), 0);
    for (std::size_t t = 0; t < heights.size(); ++t) {
      const int h = heights[pick(g)];
      for (int v = 1; v <= std::min(h, h_max); ++v) ++cnt[std::size_t(v - 1)];
    }
    for (int v = 1; v <= h_max; ++v)
      if (cnt[std::size_t(v - 1)] > 0)
        rates[std::size_t(v - 1)].push_back(
            -std::log(double(cnt[std::size_t(v - 1)]) / double(out.n)) / double(v));
  }
  out.rate_lo.assign(std::size_t(h_max), 0.0);
  out.rate_hi.assign(std::size_t(h_max), 0.0);
  for (int v = 1; v <= h_max; ++v) {
    const std::size_t i = std::size_t(v - 1);
    if (out.censored[i] || rates[i].empty()) continue;
    std::sort(rates[i].begin(), rates[i].end());
    const double lo = quantile_sorted(rates[i], 0.025);
    const double hi = quantile_sorted(rates[i], 0.975);
    out.rate_lo[i] = out.rate[i] + (lo - out.rate[i]) * widen;
    out.rate_hi[i] = out.rate[i] + (hi - out.rate[i]) * widen;
  }
  return out;
}

AlphaEstimate alpha_estimate(const TailEstimate& tail) {
  // fit -log survival = a + alpha h, weighting each height by its CI width
  std::vector<double> hs, ys, ws;
  for (std::size_t i = 0; i < tail.survival.size(); ++i) {
    if (tail.censored[i]) continue;
    const double h = double(i + 1);
    hs.push_back(h);
    ys.push_back(tail.rate[i] * h);
    const double half = (tail.rate_hi[i] - tail.rate_lo[i]) * h / 2.0;
    ws.push_back(half > 0 ? 1.0 / (half * half) : 1.0);
  }
  if (hs.size() < 3)
    throw std::invalid_argument("alpha_estimate: fewer than three usable heights");
  double sw = 0, swx = 0, swy = 0;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    sw += ws[i];
    swx += ws[i] * hs[i];
    swy += ws[i] * ys[i];
  }
  const double xbar = swx / sw, ybar = swy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    sxx += ws[i] * (hs[i] - xbar) * (hs[i] - xbar);
    sxy += ws[i] * (hs[i] - xbar) * (ys[i] - ybar);
  }
  AlphaEstimate out;
  out.used = int(hs.size());
  out.alpha = sxy / sxx;
  out.se = std::sqrt(1.0 / sxx);
  out.ci_lo = out.alpha - 1.96 * out.se;
  out.ci_hi = out.alpha + 1.96 * out.se;
  return out;
}

// ---- maximum over the box ------------------------------------------------------

int max_height(const SpinConfig& cfg) {
  return top_height2(extract_interface(cfg).faces) / 2;
}

std::vector<LLNRow> lln_ratio(const std::map<int, std::vector<int>>& max_by_n) {
  std::vector<LLNRow> out;
  for (const auto& [n, ms] : max_by_n) {
    if (ms.empty()) continue;
    LLNRow row;
    row.n = n;
    row.count = int(ms.size());
    std::vector<double> ratio;
    ratio.reserve(ms.size());
    const double logn = std::log(double(n));
    for (int m : ms) ratio.push_back(double(m) / logn);
    std::sort(ratio.begin(), ratio.end());
    row.median = quantile_sorted(ratio, 0.5);
    row.q25 = quantile_sorted(ratio, 0.25);
    row.q75 = quantile_sorted(ratio, 0.75);
    out.push_back(row);
  }
  return out;
}

// ---- increment moments ---------------------------------------------------------

namespace {

std::array<double, 6> obs_array(const IncrementObservables& o) {
  return {double(o.f1), double(o.f2), double(o.f3),
          double(o.fV), double(o.fA), double(o.m)};
}

}  // namespace

IncrementStats increment_moments(
    const std::vector<std::vector<IncrementObservables>>& samples, int T,
    const StatParams& par) {
  if (samples.empty()) throw std::invalid_argument("increment_moments: no samples");
  IncrementStats out;
  const double margin = par.K * std::log(double(T));
  out.bulk_lo = std::max(1, int(std::ceil(margin)));
  out.bulk_hi = std::min(T, int(std::floor(double(T) - margin)));
  if (out.bulk_lo > out.bulk_hi)
    throw std::invalid_argument("increment_moments: bulk window is empty");

  std::array<double, 6> sum{}, sum2{};
  double sum12 = 0;
  std::vector<double> smean1, smean2;  // per-sample window means
  std::vector<int> mpool;
  for (const auto& seq : samples) {
    double s1 = 0, s2 = 0;
    int cnt = 0;
    for (int p = out.bulk_lo; p <= out.bulk_hi && p <= int(seq.size()); ++p) {
      const std::array<double, 6> v = obs_array(seq[std::size_t(p - 1)]);
      for (int c = 0; c < 6; ++c) {
        sum[std::size_t(c)] += v[std::size_t(c)];
        sum2[std::size_t(c)] += v[std::size_t(c)] * v[std::size_t(c)];
      }
      sum12 += v[0] * v[1];
      mpool.push_back(seq[std::size_t(p - 1)].m);
      s1 += v[0];
      s2 += v[1];
      ++cnt;
      ++out.pooled;
    }
    if (cnt > 0) {
      smean1.push_back(s1 / cnt);
      smean2.push_back(s2 / cnt);
    }
  }
  if (out.pooled < 2)
    throw std::invalid_argument("increment_moments: too few bulk observations");
  const double N = double(out.pooled);
  for (int c = 0; c < 6; ++c) {
    out.mean[std::size_t(c)] = sum[std::size_t(c)] / N;
    out.var[std::size_t(c)] =
        (sum2[std::size_t(c)] - N * out.mean[std::size_t(c)] * out.mean[std::size_t(c)]) /
        (N - 1);
  }
  out.cov12 = (sum12 - N * out.mean[0] * out.mean[1]) / (N - 1);
  // means of disjoint samples are independent; positions inside one are not
  out.se1 = std::sqrt(var_of(smean1) / double(std::max<std::size_t>(1, smean1.size())));
  out.se2 = std::sqrt(var_of(smean2) / double(std::max<std::size_t>(1, smean2.size())));

  out.index_mean.assign(std::size_t(T), {});
  std::vector<long long> index_n(std::size_t(T), 0);
  for (const auto& seq : samples)
    for (int p = 1; p <= T && p <= int(seq.size()); ++p) {
      const std::array<double, 6> v = obs_array(seq[std::size_t(p - 1)]);
      for (int c = 0; c < 6; ++c) out.index_mean[std::size_t(p - 1)][std::size_t(c)] += v[std::size_t(c)];
      ++index_n[std::size_t(p - 1)];
    }
  for (int p = 0; p < T; ++p)
    if (index_n[std::size_t(p)] > 0)
      for (int c = 0; c < 6; ++c)
        out.index_mean[std::size_t(p)][std::size_t(c)] /= double(index_n[std::size_t(p)]);

  int vmax = 0;
  for (int m : mpool) vmax = std::max(vmax, m);
  std::vector<double> vs, logp;
  for (int v = 1; v <= vmax; ++v) {
    long long c = 0;
    for (int m : mpool)
      if (m >= v) ++c;
    const double p = double(c) / N;
    out.m_survival.push_back({double(v), p});
    if (c > 0) {
      vs.push_back(double(v));
      logp.push_back(std::log(p));
    }
  }
  if (vs.size() >= 2) {
    const double xb = mean_of(vs), yb = mean_of(logp);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < vs.size(); ++i) {
      sxx += (vs[i] - xb) * (vs[i] - xb);
      sxy += (vs[i] - xb) * (logp[i] - yb);
    }
    out.m_slope = sxy / sxx;
  }
  return out;
}

// ---- empirical mixing ----------------------------------------------------------

int increment_bin(const IncrementObservables& o) {
  const int mb = std::min(o.m, 3);          // 0,1,2,3+
  const int hb = std::min(std::max(o.f3, 1), 3) - 1;  // 1,2,3+
  return mb * 3 + hb;
}

MixingProfile mixing_profile(
    const std::vector<std::vector<IncrementObservables>>& samples, int j,
    const std::vector<int>& gaps, const StatParams& par) {
  if (samples.empty() || j < 1)
    throw std::invalid_argument("mixing_profile: bad input");
  MixingProfile out;

  for (int g : gaps) {
    const int k = j + g;
    MixingRow row;
    row.j = j;
    row.k = k;
    std::array<long long, kBinCount> cj{}, ck{};
    std::vector<std::pair<int, int>> pairs;
    for (const auto& seq : samples) {
      if (int(seq.size()) < k) continue;
      const int a = increment_bin(seq[std::size_t(j - 1)]);
      const int b = increment_bin(seq[std::size_t(k - 1)]);
      ++cj[std::size_t(a)];
      ++ck[std::size_t(b)];
      pairs.push_back({a, b});
    }
    row.count = (long long)pairs.size();
    if (row.count > 0) {
      // rare categories go into one pooled bucket so the joint table stays
      // estimable
      std::array<int, kBinCount> remap{};
      int cats = 0;
      bool pooled_any = false;
      for (int c = 0; c < kBinCount; ++c) {
        if (cj[std::size_t(c)] + ck[std::size_t(c)] >= par.pool_min)
          remap[std::size_t(c)] = cats++;
        else {
          remap[std::size_t(c)] = -1;
          pooled_any = true;
        }
      }
      const int other = cats;
      const int total = cats + (pooled_any ? 1 : 0);
      std::vector<double> pa(std::size_t(total), 0), pb(std::size_t(total), 0);
      std::vector<double> joint(std::size_t(total) * std::size_t(total), 0);
      const double w = 1.0 / double(row.count);
      for (const auto& [a, b] : pairs) {
        const int ra = remap[std::size_t(a)] >= 0 ? remap[std::size_t(a)] : other;
        const int rb = remap[std::size_t(b)] >= 0 ? remap[std::size_t(b)] : other;
        pa[std::size_t(ra)] += w;
        pb[std::size_t(rb)] += w;
        joint[std::size_t(ra) * std::size_t(total) + std::size_t(rb)] += w;
      }
      double tv = 0;
      for (int a = 0; a < total; ++a)
        for (int b = 0; b < total; ++b)
          tv += std::abs(joint[std::size_t(a) * std::size_t(total) + std::size_t(b)] -
                         pa[std::size_t(a)] * pb[std::size_t(b)]);
      row.tv = tv / 2.0;
    }
    out.rows.push_back(row);
  }

  std::vector<double> tvs;
  for (const MixingRow& row : out.rows)
    if (row.count > 0) tvs.push_back(row.tv);
  out.trend_p = trend_decreasing_p(tvs);

  // anchor marginal with a bootstrap band
  std::vector<int> anchor;
  for (const auto& seq : samples)
    if (int(seq.size()) >= j) anchor.push_back(increment_bin(seq[std::size_t(j - 1)]));
  out.marginal.assign(kBinCount, 0.0);
  out.marginal_lo.assign(kBinCount, 0.0);
  out.marginal_hi.assign(kBinCount, 0.0);
  if (!anchor.empty()) {
    for (int a : anchor) out.marginal[std::size_t(a)] += 1.0 / double(anchor.size());
    std::vector<std::vector<double>> freq(kBinCount);
    std::mt19937_64 g = boot_rng(par, 2);
    std::uniform_int_distribution<std::size_t> pick(0, anchor.size() - 1);
    for (int b = 0; b < par.bootstrap; ++b) {
      std::array<long long, kBinCount> cnt{};
      for (std::size_t t = 0; t < anchor.size(); ++t) ++cnt[std::size_t(anchor[pick(g)])];
      for (int c = 0; c < kBinCount; ++c)
        freq[std::size_t(c)].push_back(double(cnt[std::size_t(c)]) / double(anchor.size()));
    }
    for (int c = 0; c < kBinCount; ++c) {
      std::sort(freq[std::size_t(c)].begin(), freq[std::size_t(c)].end());
      out.marginal_lo[std::size_t(c)] = quantile_sorted(freq[std::size_t(c)], 0.025);
      out.marginal_hi[std::size_t(c)] = quantile_sorted(freq[std::size_t(c)], 0.975);
    }
  }
  return out;
}

// ---- standardized spine sums -----------------------------------------------------

CLTReport clt_report(const std::vector<std::vector<IncrementObservables>>& samples,
                     const StatParams& par) {
  if (int(samples.size()) < par.min_samples)
    throw std::invalid_argument("clt_report: fewer samples than required");
  CLTReport out;
  std::array<CLTBlock*, 5> blocks = {&out.f1, &out.f2, &out.f3, &out.fV, &out.fA};
  std::array<std::vector<double>, 5> sums;  // standardized, one per sample

  for (int c = 0; c < 5; ++c) {
    double total = 0;
    long long len = 0;
    for (const auto& seq : samples) {
      for (const IncrementObservables& o : seq)
        total += obs_array(o)[std::size_t(c)];
      len += (long long)seq.size();
    }
    const double lambda = len > 0 ? total / double(len) : 0.0;
    std::vector<double>& s = sums[std::size_t(c)];
    for (const auto& seq : samples) {
      if (seq.empty()) continue;
      double acc = 0;
      for (const IncrementObservables& o : seq)
        acc += obs_array(o)[std::size_t(c)];
      s.push_back((acc - double(seq.size()) * lambda) /
                  std::sqrt(double(seq.size())));
    }
    CLTBlock* b = blocks[std::size_t(c)];
    b->lambda = lambda;
    b->sigma2 = var_of(s);
    const Normality nt = normality_test(s);
    b->ad = nt.ad;
    b->ad_p = nt.p;
    b->ks = nt.ks;
    b->n = int(s.size());
  }

  const std::vector<double>& s1 = sums[0];
  const std::vector<double>& s2 = sums[1];
  const std::size_t n = std::min(s1.size(), s2.size());
  if (n >= 2) {
    const double m1 = mean_of(s1), m2 = mean_of(s2);
    double c = 0;
    for (std::size_t i = 0; i < n; ++i) c += (s1[i] - m1) * (s2[i] - m2);
    out.cov12 = c / double(n - 1);
    const double v1 = var_of(s1), v2 = var_of(s2);
    out.cov12_se = std::sqrt((v1 * v2 + out.cov12 * out.cov12) / double(n - 1));
    out.var_ratio = v2 > 0 ? v1 / v2 : 0.0;

    std::vector<double> ratios;
    std::mt19937_64 g = boot_rng(par, 3);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (int b = 0; b < par.bootstrap; ++b) {
      std::vector<double> r1, r2;
      r1.reserve(n);
      r2.reserve(n);
      for (std::size_t t = 0; t < n; ++t) {
        const std::size_t i = pick(g);
        r1.push_back(s1[i]);
        r2.push_back(s2[i]);
      }
      const double bv2 = var_of(r2);
      if (bv2 > 0) ratios.push_back(var_of(r1) / bv2);
    }
    if (!ratios.empty()) {
      std::sort(ratios.begin(), ratios.end());
      out.var_ratio_lo = quantile_sorted(ratios, 0.025);
      out.var_ratio_hi = quantile_sorted(ratios, 0.975);
    }
  }
  return out;
}

}  // namespace iflab
