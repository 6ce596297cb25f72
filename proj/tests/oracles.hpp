#pragma once

// Test-only oracles, independent of the library implementation paths they
// check.
//
//  - phi_oracle / upper_tail_oracle: standard normal CDF and upper tail from
//    the Maclaurin-type series Phi(x) = 1/2 + phi(x) sum x^{2n+1}/(2n+1)!!
//    and the Laplace continued fraction for the far tail; no erfc anywhere.
//  - chi2_sf: chi-square survival function via the regularized incomplete
//    gamma (series + Lentz continued fraction).
//  - chi_square_gof: one-sample goodness-of-fit of integer draws against an
//    exact pmf, pooling bins so every expected count is >= 5.
//  - zn_distribution: exhaustive distribution of Z_n for finite-support laws
//    by repeated convolution.

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include "gwmd/offspring.hpp"

namespace oracle {

inline constexpr long double kSqrt2PiL = 2.50662827463100050241576528481104525L;

inline long double normal_pdf(long double x) {
  return expl(-0.5L * x * x) / kSqrt2PiL;
}

/// Phi(x) - 1/2 by the all-positive-terms series; |x| <= ~6.
inline long double phi_series_half(long double x) {
  long double term = x;
  long double sum = x;
  for (int n = 1; n < 400; ++n) {
    term *= x * x / static_cast<long double>(2 * n + 1);
    sum += term;
    if (fabsl(term) < 1e-24L * fabsl(sum)) break;
  }
  return normal_pdf(x) * sum;
}

/// 1 - Phi(x) for large x by the Laplace continued fraction.
inline long double upper_tail_cf(long double x) {
  long double f = 0.0L;
  for (int k = 200; k >= 1; --k) {
    f = static_cast<long double>(k) / (x + f);
  }
  return normal_pdf(x) / (x + f);
}

inline long double upper_tail_oracle(long double x) {
  if (x >= 6.0L) return upper_tail_cf(x);
  return 0.5L - phi_series_half(x);
}

inline long double phi_oracle(long double x) {
  if (x < 0.0L) return upper_tail_oracle(-x);
  if (x >= 6.0L) return 1.0L - upper_tail_cf(x);
  return 0.5L + phi_series_half(x);
}

/// Phi^{-1}(p) by bisection on phi_oracle.
inline long double quantile_oracle(long double p) {
  long double lo = -40.0L, hi = 40.0L;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    (phi_oracle(mid) < p ? lo : hi) = mid;
  }
  return 0.5L * (lo + hi);
}

// ---------------------------------------------------------------------------
// Incomplete gamma / chi-square
// ---------------------------------------------------------------------------

inline double gamma_p_series(double a, double x) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_cf(double a, double x) {
  constexpr double kFpMin = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kFpMin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = b + an / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

/// Q(a, x), regularized upper incomplete gamma.
inline double gamma_q(double a, double x) {
  if (x <= 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

/// P(chi2_df >= x).
inline double chi2_sf(double x, int df) {
  return gamma_q(0.5 * static_cast<double>(df), 0.5 * x);
}

// ---------------------------------------------------------------------------
// Goodness of fit
// ---------------------------------------------------------------------------

struct GofResult {
  double chi2;
  int df;
  double p_value;
};

/// Chi-square GOF of draws against pmf(k). Values are pooled left to right
/// so every bin has expected count >= 5; remaining tail mass (if any) forms
/// the final bin. Works for both bounded and unbounded supports.
template <class PmfFn>
GofResult chi_square_gof(const std::vector<std::uint64_t>& draws, PmfFn pmf,
                         std::uint64_t kmin) {
  const double n = static_cast<double>(draws.size());
  std::map<std::uint64_t, std::uint64_t> obs_map;
  for (const std::uint64_t d : draws) ++obs_map[d];

  std::vector<double> exp_bins, obs_bins;
  double cur_e = 0.0, cur_o = 0.0, cum = 0.0;
  std::uint64_t k = kmin;
  while (n * (1.0 - cum) >= 5.0 && k < kmin + 1'000'000) {
    const double p = pmf(k);
    cum += p;
    cur_e += n * p;
    if (const auto it = obs_map.find(k); it != obs_map.end()) {
      cur_o += static_cast<double>(it->second);
    }
    if (cur_e >= 5.0) {
      exp_bins.push_back(cur_e);
      obs_bins.push_back(cur_o);
      cur_e = cur_o = 0.0;
    }
    ++k;
  }
  // Everything at or beyond k, plus any open partial bin.
  double tail_e = cur_e + n * (1.0 - cum);
  double tail_o = cur_o;
  for (auto it = obs_map.lower_bound(k); it != obs_map.end(); ++it) {
    tail_o += static_cast<double>(it->second);
  }
  if (tail_e > 1e-9) {
    if (tail_e < 5.0 && !exp_bins.empty()) {
      exp_bins.back() += tail_e;
      obs_bins.back() += tail_o;
    } else {
      exp_bins.push_back(tail_e);
      obs_bins.push_back(tail_o);
    }
  } else if (tail_o > 0.0) {
    // Draws outside the support: certain failure.
    return {std::numeric_limits<double>::infinity(), 1, 0.0};
  }

  double chi2 = 0.0;
  for (std::size_t b = 0; b < exp_bins.size(); ++b) {
    const double diff = obs_bins[b] - exp_bins[b];
    chi2 += diff * diff / exp_bins[b];
  }
  const int df = static_cast<int>(exp_bins.size()) - 1;
  return {chi2, df, df <= 0 ? 1.0 : chi2_sf(chi2, df)};
}

/// Two-sample chi-square on shared integer bins (pooled so both expected
/// counts are >= 5 under the combined estimate).
inline GofResult two_sample_chi_square(const std::vector<std::uint64_t>& a,
                                       const std::vector<std::uint64_t>& b) {
  std::map<std::uint64_t, std::pair<double, double>> counts;
  for (const auto v : a) counts[v].first += 1.0;
  for (const auto v : b) counts[v].second += 1.0;
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  // Pool adjacent values until the combined count supports >= 5 expected in
  // both samples.
  std::vector<std::pair<double, double>> bins;
  double ca = 0.0, cb = 0.0;
  const double need = 5.0 * (na + nb) / std::min(na, nb);
  for (const auto& [value, c] : counts) {
    (void)value;
    ca += c.first;
    cb += c.second;
    if (ca + cb >= need) {
      bins.emplace_back(ca, cb);
      ca = cb = 0.0;
    }
  }
  if (ca + cb > 0.0) {
    if (bins.empty()) {
      bins.emplace_back(ca, cb);
    } else {
      bins.back().first += ca;
      bins.back().second += cb;
    }
  }
  double chi2 = 0.0;
  for (const auto& [oa, ob] : bins) {
    const double tot = oa + ob;
    const double ea = tot * na / (na + nb);
    const double eb = tot * nb / (na + nb);
    chi2 += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
  }
  const int df = static_cast<int>(bins.size()) - 1;
  return {chi2, df, df <= 0 ? 1.0 : chi2_sf(chi2, df)};
}

// ---------------------------------------------------------------------------
// Exhaustive Z_n distribution (finite-support laws)
// ---------------------------------------------------------------------------

using Dist = std::map<std::uint64_t, double>;

inline Dist convolve(const Dist& a, const std::vector<std::pair<std::uint64_t, double>>& pmf) {
  Dist out;
  for (const auto& [va, pa] : a) {
    for (const auto& [vb, pb] : pmf) out[va + vb] += pa * pb;
  }
  return out;
}

/// Distribution of Z_n started from Z_0 = 1, by convolution powers.
inline Dist zn_distribution(const gwmd::OffspringLaw& law, int n) {
  std::vector<std::pair<std::uint64_t, double>> pmf;
  const std::uint64_t kmax = *law.max_support();
  for (std::uint64_t k = 1; k <= kmax; ++k) {
    if (law.pmf(k) > 0.0) pmf.emplace_back(k, law.pmf(k));
  }
  Dist dist{{1, 1.0}};
  for (int step = 0; step < n; ++step) {
    // power[z] = pmf convolved z times
    std::uint64_t max_z = dist.rbegin()->first;
    std::vector<Dist> power(static_cast<std::size_t>(max_z) + 1);
    power[1] = Dist(pmf.begin(), pmf.end());
    for (std::uint64_t z = 2; z <= max_z; ++z) {
      power[z] = convolve(power[z - 1], pmf);
    }
    Dist next;
    for (const auto& [z, w] : dist) {
      for (const auto& [s, q] : power[z]) next[s] += w * q;
    }
    dist = std::move(next);
  }
  return dist;
}

// ---------------------------------------------------------------------------
// Sample moments
// ---------------------------------------------------------------------------

inline double sample_mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (const double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double sample_variance(const std::vector<double>& xs) {
  const double m = sample_mean(xs);
  double s = 0.0;
  for (const double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

}  // namespace oracle
