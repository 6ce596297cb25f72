#pragma once

// Offspring distributions for a supercritical Galton-Watson process.
//
// Every law here has p_0 = 0 (support in {1,2,3,...}) and strictly positive
// variance, so the process never dies out, the offspring mean m exceeds 1,
// and per-step ratio statistics are always well defined.
//
// Series-valued quantities (moments, exponential moments, pgf values) follow
// one truncation rule: terms are summed until an analytic bound on the
// remaining tail drops below 1e-12 of the total, with a hard cap of 1e6
// terms. Hitting the cap raises NonConvergentError or flags divergence,
// depending on the operation's contract.
//
// Notation: variance() returns v^2 = Var(Z_1); v is its square root, the
// standard deviation the statistics normalize by.
//
// There is deliberately no separate sub-Gaussian checker: a sub-Gaussian
// offspring tail implies the Bernstein-type moment condition with a large
// enough constant, so check_bernstein with a candidate c covers that case.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "gwmd/errors.hpp"
#include "gwmd/rng.hpp"
#include "gwmd/summation.hpp"

namespace gwmd {

// ---------------------------------------------------------------------------
// Law variants
// ---------------------------------------------------------------------------

/// Two-point law on {1, 2}.
struct Binary {
  double p1;
  double p2;
};

/// p_k = (1-q) q^{k-1}, k >= 1.
struct GeometricShifted {
  double q;
};

/// X = 1 + Poisson(lambda).
struct PoissonShifted {
  double lambda;
};

/// p_{kmin+i} = probs[i]; finite support starting at kmin >= 1.
struct TablePmf {
  std::uint64_t kmin;
  std::vector<double> probs;
};

namespace detail {

/// Walker/Vose alias table over {0, ..., n-1}.
class AliasTable {
 public:
  AliasTable() = default;

  explicit AliasTable(const std::vector<double>& probs) {
    const std::size_t n = probs.size();
    accept_.assign(n, 1.0);
    alias_.resize(n);
    for (std::size_t i = 0; i < n; ++i) alias_[i] = static_cast<std::uint32_t>(i);

    std::vector<double> scaled(n);
    for (std::size_t i = 0; i < n; ++i) scaled[i] = probs[i] * static_cast<double>(n);
    std::vector<std::uint32_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
      const std::uint32_t s = small.back();
      const std::uint32_t l = large.back();
      small.pop_back();
      accept_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    // Leftovers are 1 up to rounding residue.
    for (const std::uint32_t l : large) accept_[l] = 1.0;
    for (const std::uint32_t s : small) accept_[s] = 1.0;
  }

  std::size_t draw(Rng& rng) const {
    const double u = rng.uniform01() * static_cast<double>(accept_.size());
    std::size_t i = static_cast<std::size_t>(u);
    if (i >= accept_.size()) i = accept_.size() - 1;
    return rng.uniform01() < accept_[i] ? i : alias_[i];
  }

 private:
  std::vector<double> accept_;
  std::vector<std::uint32_t> alias_;
};

/// Exact Poisson draw; distribution algorithm delegated to the standard
/// library (inversion for small mean, rejection for large).
inline std::uint64_t poisson_draw(double mean, Rng& rng) {
  std::poisson_distribution<std::uint64_t> dist(mean);
  return dist(rng);
}

/// Exact Binomial(n, p) draw via the standard library.
inline std::uint64_t binomial_draw(std::uint64_t n, double p, Rng& rng) {
  if (n == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  std::binomial_distribution<std::uint64_t> dist(n, p);
  return dist(rng);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// OffspringLaw
// ---------------------------------------------------------------------------

/// Immutable, validated offspring distribution. A constructed law can be
/// shared freely across threads; all mutation happens in caller-owned Rng
/// state.
class OffspringLaw {
 public:
  using Variant = std::variant<Binary, GeometricShifted, PoissonShifted, TablePmf>;

  explicit OffspringLaw(Binary b) : dist_(validate(std::move(b))) { finish(); }
  explicit OffspringLaw(GeometricShifted g) : dist_(validate(std::move(g))) { finish(); }
  explicit OffspringLaw(PoissonShifted p) : dist_(validate(std::move(p))) { finish(); }
  explicit OffspringLaw(TablePmf t) : dist_(validate(std::move(t))) { finish(); }

  static OffspringLaw binary(double p1, double p2) { return OffspringLaw(Binary{p1, p2}); }
  static OffspringLaw geometric_shifted(double q) { return OffspringLaw(GeometricShifted{q}); }
  static OffspringLaw poisson_shifted(double lambda) {
    return OffspringLaw(PoissonShifted{lambda});
  }
  static OffspringLaw table(std::uint64_t kmin, std::vector<double> probs) {
    return OffspringLaw(TablePmf{kmin, std::move(probs)});
  }

  const Variant& dist() const { return dist_; }

  /// Offspring mean m = sum k p_k (closed form per variant).
  double mean() const { return mean_; }

  /// v^2 = Var(Z_1), strictly positive by construction.
  double variance() const { return variance_; }

  /// p_k; k = 0 is allowed and returns 0.
  double pmf(std::uint64_t k) const {
    if (k == 0) return 0.0;
    return std::visit(
        [k](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Binary>) {
            if (k == 1) return d.p1;
            if (k == 2) return d.p2;
            return 0.0;
          } else if constexpr (std::is_same_v<T, GeometricShifted>) {
            return (1.0 - d.q) * std::pow(d.q, static_cast<double>(k - 1));
          } else if constexpr (std::is_same_v<T, PoissonShifted>) {
            // e^{-lambda} lambda^{k-1} / (k-1)!
            const double j = static_cast<double>(k - 1);
            return std::exp(-d.lambda + j * std::log(d.lambda) - std::lgamma(j + 1.0));
          } else {
            if (k < d.kmin || k >= d.kmin + d.probs.size()) return 0.0;
            return d.probs[static_cast<std::size_t>(k - d.kmin)];
          }
        },
        dist_);
  }

  /// pmf at 1; appears in the generating-function bounds.
  double p1() const { return p1_; }

  /// Largest support point, or nullopt for unbounded laws.
  std::optional<std::uint64_t> max_support() const { return max_support_; }
  bool bounded() const { return max_support_.has_value(); }

  /// One offspring draw, k >= 1. Deterministic given the Rng state.
  std::uint64_t sample(Rng& rng) const {
    return std::visit(
        [&rng, this](const auto& d) -> std::uint64_t {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Binary>) {
            return rng.uniform01() < d.p1 ? 1u : 2u;
          } else if constexpr (std::is_same_v<T, GeometricShifted>) {
            // Inversion: k = 1 + floor(ln U / ln q), U in (0, 1].
            const double u = rng.uniform01_open0();
            return 1 + static_cast<std::uint64_t>(std::floor(std::log(u) / log_q_));
          } else if constexpr (std::is_same_v<T, PoissonShifted>) {
            return 1 + detail::poisson_draw(d.lambda, rng);
          } else {
            return d.kmin + alias_.draw(rng);
          }
        },
        dist_);
  }

 private:
  static Binary validate(Binary b) {
    require(b.p1 >= 0.0 && b.p1 <= 1.0 && b.p2 >= 0.0 && b.p2 <= 1.0,
            "binary law: probabilities must lie in [0,1]");
    require(std::fabs(b.p1 + b.p2 - 1.0) <= 1e-12,
            "binary law: p1 + p2 must equal 1 within 1e-12");
    b.p2 = 1.0 - b.p1;
    require(b.p1 > 0.0 && b.p1 < 1.0, "binary law: degenerate (v^2 = 0)");
    return b;
  }

  static GeometricShifted validate(GeometricShifted g) {
    require(g.q > 0.0 && g.q < 1.0, "geometric law: q must lie in (0,1)");
    return g;
  }

  static PoissonShifted validate(PoissonShifted p) {
    require(std::isfinite(p.lambda) && p.lambda > 0.0,
            "poisson1 law: lambda must be positive");
    return p;
  }

  static TablePmf validate(TablePmf t) {
    require(t.kmin >= 1, "table law: kmin must be >= 1");
    require(!t.probs.empty(), "table law: empty probability list");
    double sum = 0.0;
    for (const double p : t.probs) {
      require(p >= 0.0 && p <= 1.0, "table law: probabilities must lie in [0,1]");
      sum += p;
    }
    require(std::fabs(sum - 1.0) <= 1e-12, "table law: probabilities must sum to 1 within 1e-12");
    for (double& p : t.probs) p /= sum;
    // Trim zero mass at the edges so max_support is tight.
    while (t.probs.size() > 1 && t.probs.back() == 0.0) t.probs.pop_back();
    std::size_t lead = 0;
    while (lead + 1 < t.probs.size() && t.probs[lead] == 0.0) ++lead;
    if (lead > 0) {
      t.probs.erase(t.probs.begin(), t.probs.begin() + static_cast<std::ptrdiff_t>(lead));
      t.kmin += lead;
    }
    require(t.probs.size() >= 2 && t.probs.front() > 0.0,
            "table law: degenerate (v^2 = 0)");
    return t;
  }

  static void require(bool ok, const char* msg) {
    if (!ok) throw DomainError(msg);
  }

  void finish() {
    std::visit(
        [this](const auto& d) {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Binary>) {
            mean_ = d.p1 + 2.0 * d.p2;
            variance_ = d.p1 * d.p2;  // shifted Bernoulli
            p1_ = d.p1;
            max_support_ = 2;
          } else if constexpr (std::is_same_v<T, GeometricShifted>) {
            mean_ = 1.0 / (1.0 - d.q);
            variance_ = d.q / ((1.0 - d.q) * (1.0 - d.q));
            p1_ = 1.0 - d.q;
            log_q_ = std::log(d.q);
          } else if constexpr (std::is_same_v<T, PoissonShifted>) {
            mean_ = 1.0 + d.lambda;
            variance_ = d.lambda;
            p1_ = std::exp(-d.lambda);
          } else {
            NeumaierSum m, m2;
            for (std::size_t i = 0; i < d.probs.size(); ++i) {
              m.add(static_cast<double>(d.kmin + i) * d.probs[i]);
            }
            mean_ = m.value();
            for (std::size_t i = 0; i < d.probs.size(); ++i) {
              const double dev = static_cast<double>(d.kmin + i) - mean_;
              m2.add(dev * dev * d.probs[i]);
            }
            variance_ = m2.value();
            p1_ = d.kmin == 1 ? d.probs[0] : 0.0;
            max_support_ = d.kmin + d.probs.size() - 1;
            alias_ = detail::AliasTable(d.probs);
          }
        },
        dist_);
    require(variance_ > 0.0, "offspring law: degenerate (v^2 = 0)");
  }

  Variant dist_;
  double mean_ = 0.0;
  double variance_ = 0.0;
  double p1_ = 0.0;
  double log_q_ = 0.0;  // geometric only
  std::optional<std::uint64_t> max_support_;
  detail::AliasTable alias_;  // table only
};

// ---------------------------------------------------------------------------
// Truncated series engine
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr double kSeriesRelTol = 1e-12;
inline constexpr std::uint64_t kSeriesTermCap = 1'000'000;

struct SeriesSum {
  double value = 0.0;
  bool converged = false;
  bool divergent = false;
  std::uint64_t last_k = 0;
};

/// Sums t(k) = p_k * w(k) over k = 1, 2, ... for an infinite-support law.
///
/// `pmf_ratio(k)` is p_{k+1}/p_k. `term(k, p_k, log p_k)` evaluates the
/// current term (>= 0). `step_ratio_bound(k)` must bound t(j+1)/t(j) for all
/// j >= k once k >= tail_from; the tail after term k is then at most
/// t(k) r / (1 - r), a geometric-series bound.
template <class PmfRatio, class TermFn, class StepRatioBound>
SeriesSum drive_series(double p_first, PmfRatio pmf_ratio, TermFn term,
                       StepRatioBound step_ratio_bound, std::uint64_t tail_from) {
  NeumaierSum acc;
  double pk = p_first;
  double lpk = std::log(p_first);
  double prev_t = -1.0;
  int growth_streak = 0;
  for (std::uint64_t k = 1; k <= kSeriesTermCap; ++k) {
    const double t = term(k, pk, lpk);
    acc.add(t);
    if (pk == 0.0) return {acc.value(), true, false, k};
    if (k >= tail_from) {
      const double r = pmf_ratio(k) * step_ratio_bound(k);
      if (r < 1.0) {
        const double tail = t * r / (1.0 - r);
        if (tail <= kSeriesRelTol * (acc.value() + tail)) {
          return {acc.value(), true, false, k};
        }
      }
      if (prev_t >= 0.0 && t >= prev_t && t > 0.0) {
        if (++growth_streak >= 64) return {acc.value(), false, true, k};
      } else {
        growth_streak = 0;
      }
      prev_t = t;
    }
    const double ratio = pmf_ratio(k);
    pk *= ratio;
    lpk += std::log(ratio);
  }
  return {acc.value(), false, false, kSeriesTermCap};
}

/// E[w(Z_1)]-style sum. `term(k, p_k, log p_k)` and `weight_ratio_bound(k)`
/// as in drive_series; finite-support laws are summed exactly.
template <class TermFn, class WeightRatioBound>
SeriesSum law_series(const OffspringLaw& law, TermFn term,
                     WeightRatioBound weight_ratio_bound, std::uint64_t tail_from) {
  return std::visit(
      [&](const auto& d) -> SeriesSum {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Binary>) {
          NeumaierSum acc;
          acc.add(term(1, d.p1, std::log(d.p1)));
          acc.add(term(2, d.p2, std::log(d.p2)));
          return {acc.value(), true, false, 2};
        } else if constexpr (std::is_same_v<T, TablePmf>) {
          NeumaierSum acc;
          std::uint64_t last = d.kmin;
          for (std::size_t i = 0; i < d.probs.size(); ++i) {
            const std::uint64_t k = d.kmin + i;
            if (d.probs[i] > 0.0) {
              acc.add(term(k, d.probs[i], std::log(d.probs[i])));
              last = k;
            }
          }
          return {acc.value(), true, false, last};
        } else if constexpr (std::is_same_v<T, GeometricShifted>) {
          return drive_series(
              1.0 - d.q, [&](std::uint64_t) { return d.q; }, term, weight_ratio_bound,
              tail_from);
        } else {
          return drive_series(
              std::exp(-d.lambda),
              [&](std::uint64_t k) { return d.lambda / static_cast<double>(k); }, term,
              weight_ratio_bound, tail_from);
        }
      },
      law.dist());
}

/// First index from which |k - m| is increasing and the weight-ratio bounds
/// below are valid sups.
inline std::uint64_t tail_from_for(const OffspringLaw& law) {
  return static_cast<std::uint64_t>(std::floor(law.mean())) + 2;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Moments
// ---------------------------------------------------------------------------

/// E|Z_1 - m|^l for integer l >= 2.
inline double abs_central_moment(const OffspringLaw& law, int l) {
  if (l < 2) throw DomainError("abs_central_moment: order must be >= 2");
  const double m = law.mean();
  const double order = static_cast<double>(l);
  const auto res = detail::law_series(
      law,
      [&](std::uint64_t k, double pk, double) {
        return pk * std::pow(std::fabs(static_cast<double>(k) - m), order);
      },
      [&](std::uint64_t k) {
        const double dk = static_cast<double>(k) - m;
        return std::pow((dk + 1.0) / dk, order);
      },
      detail::tail_from_for(law));
  if (!res.converged) {
    throw NonConvergentError("abs_central_moment: series cap reached before tail criterion");
  }
  return res.value;
}

/// E Z_1^{2+rho} for rho in (0, 1].
inline double moment_2_rho(const OffspringLaw& law, double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) throw DomainError("moment_2_rho: rho must lie in (0,1]");
  const double order = 2.0 + rho;
  const auto res = detail::law_series(
      law,
      [&](std::uint64_t k, double pk, double) {
        return pk * std::pow(static_cast<double>(k), order);
      },
      [&](std::uint64_t k) {
        const double kd = static_cast<double>(k);
        return std::pow((kd + 1.0) / kd, order);
      },
      2);
  if (!res.converged) {
    throw NonConvergentError("moment_2_rho: series cap reached before tail criterion");
  }
  return res.value;
}

// ---------------------------------------------------------------------------
// Condition checkers
// ---------------------------------------------------------------------------

enum class ConditionName { bernstein, cramer_mgf, linnik, moment_2_rho };

inline const char* to_string(ConditionName c) {
  switch (c) {
    case ConditionName::bernstein: return "bernstein";
    case ConditionName::cramer_mgf: return "cramer_mgf";
    case ConditionName::linnik: return "linnik";
    case ConditionName::moment_2_rho: return "moment_2_rho";
  }
  return "?";
}

struct BernsteinOrderRow {
  int order;
  double lhs;  // E|Z_1 - m|^l
  double rhs;  // (1/2) l! (l-1)^{-l/2} c^{l-2} v^2
};

/// Outcome of a moment / exponential-moment condition check.
struct ConditionReport {
  ConditionName condition;
  std::vector<std::pair<std::string, double>> parameters;
  bool passed = false;
  bool divergent = false;               // expectation-type conditions only
  std::optional<double> value;          // finite expectation when it exists
  std::vector<BernsteinOrderRow> per_order;  // bernstein only
  std::uint64_t scan_limit = 0;
  std::string note;
};

namespace detail {
// Relative slack for lhs <= rhs comparisons; the l = 2 row is an identity
// whose two sides are computed by different routes.
inline constexpr double kBernsteinCompareSlack = 1e-9;
}  // namespace detail

/// Bernstein-type moment condition:
/// E|Z_1 - m|^l <= (1/2) l! (l-1)^{-l/2} c^{l-2} v^2 for l = 2..scan_limit.
/// The condition itself quantifies over all l >= 2; the scan is finite, which
/// the report's note records.
inline ConditionReport check_bernstein(const OffspringLaw& law, double c, int scan_limit = 30) {
  if (!(c > 0.0)) throw DomainError("check_bernstein: c must be positive");
  if (scan_limit < 2) throw DomainError("check_bernstein: scan_limit must be >= 2");
  ConditionReport rep;
  rep.condition = ConditionName::bernstein;
  rep.parameters = {{"c", c}};
  rep.scan_limit = static_cast<std::uint64_t>(scan_limit);
  rep.note =
      "condition quantifies over all l >= 2; scan truncated at scan_limit; "
      "comparisons use 1e-9 relative slack";
  const double v2 = law.variance();
  rep.passed = true;
  for (int l = 2; l <= scan_limit; ++l) {
    const double lhs = abs_central_moment(law, l);
    const double rhs = 0.5 * std::tgamma(static_cast<double>(l) + 1.0) *
                       std::pow(static_cast<double>(l - 1), -0.5 * static_cast<double>(l)) *
                       std::pow(c, static_cast<double>(l - 2)) * v2;
    rep.per_order.push_back({l, lhs, rhs});
    if (lhs > rhs * (1.0 + detail::kBernsteinCompareSlack)) rep.passed = false;
  }
  return rep;
}

/// The closed-form constant for bounded offspring: if Z_1 <= m + c2 then the
/// Bernstein condition holds with c = (1/3) 2^{3/2} max(m, c2).
inline double bernstein_constant_bounded(const OffspringLaw& law) {
  if (!law.bounded()) {
    throw UnboundedSupportError(
        "bernstein_constant_bounded: law has unbounded support");
  }
  const double c2 = static_cast<double>(*law.max_support()) - law.mean();
  return (1.0 / 3.0) * std::pow(2.0, 1.5) * std::max(law.mean(), c2);
}

/// Cramer condition: E exp(kappa0 Z_1) < infinity?
/// Geometric divergence is decided analytically (q e^{kappa0} >= 1); other
/// laws fall back to the series with its growth test.
inline ConditionReport check_cramer_mgf(const OffspringLaw& law, double kappa0) {
  if (!(kappa0 > 0.0)) throw DomainError("check_cramer_mgf: kappa0 must be positive");
  ConditionReport rep;
  rep.condition = ConditionName::cramer_mgf;
  rep.parameters = {{"kappa0", kappa0}};
  rep.scan_limit = detail::kSeriesTermCap;
  if (const auto* g = std::get_if<GeometricShifted>(&law.dist())) {
    if (g->q * std::exp(kappa0) >= 1.0) {
      rep.divergent = true;
      rep.passed = false;
      rep.note = "divergence decided analytically: q e^{kappa0} >= 1";
      return rep;
    }
  }
  const auto res = detail::law_series(
      law,
      [&](std::uint64_t k, double, double lpk) {
        return std::exp(lpk + kappa0 * static_cast<double>(k));
      },
      [&](std::uint64_t) { return std::exp(kappa0); }, 2);
  rep.divergent = res.divergent || !res.converged;
  if (!rep.divergent) {
    rep.value = res.value;
    rep.passed = true;
  }
  return rep;
}

/// Linnik condition: E exp(iota0 Z_1^{4 tau/(2 tau + 1)}) < infinity for
/// tau in (0, 1/6]. The exponent is at most 1/2, so the series converges for
/// every law here; the report records the exponent.
inline ConditionReport check_linnik(const OffspringLaw& law, double iota0, double tau) {
  if (!(iota0 > 0.0)) throw DomainError("check_linnik: iota0 must be positive");
  if (!(tau > 0.0 && tau <= 1.0 / 6.0)) {
    throw DomainError("check_linnik: tau must lie in (0, 1/6]");
  }
  const double e = 4.0 * tau / (2.0 * tau + 1.0);
  ConditionReport rep;
  rep.condition = ConditionName::linnik;
  rep.parameters = {{"iota0", iota0}, {"tau", tau}, {"exponent", e}};
  rep.scan_limit = detail::kSeriesTermCap;
  const auto res = detail::law_series(
      law,
      [&](std::uint64_t k, double, double lpk) {
        return std::exp(lpk + iota0 * std::pow(static_cast<double>(k), e));
      },
      [&](std::uint64_t k) {
        const double kd = static_cast<double>(k);
        return std::exp(iota0 * (std::pow(kd + 1.0, e) - std::pow(kd, e)));
      },
      2);
  if (!res.converged && !res.divergent) {
    throw NonConvergentError("check_linnik: series cap reached before tail criterion");
  }
  rep.divergent = res.divergent;
  if (!rep.divergent) {
    rep.value = res.value;
    rep.passed = true;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Law specification grammar
// ---------------------------------------------------------------------------
//
//   binary:p1,p2        geom:q        poisson1:lambda       table:kmin:p,...
//
// Probabilities may miss 1 by at most 1e-9 and are renormalized, so hand-
// typed decimals like 0.3,0.3,0.4 are accepted.

namespace detail {

inline double parse_double(std::string_view s, const char* what) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DomainError(std::string("law spec: bad ") + what + " '" + std::string(s) + "'");
  }
  return value;
}

inline std::uint64_t parse_uint(std::string_view s, const char* what) {
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DomainError(std::string("law spec: bad ") + what + " '" + std::string(s) + "'");
  }
  return value;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string format_double(double x) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, ptr);
}

inline std::vector<double> normalized_probs(std::vector<double> probs, const char* what) {
  double sum = 0.0;
  for (const double p : probs) sum += p;
  if (std::fabs(sum - 1.0) > 1e-9) {
    throw DomainError(std::string("law spec: ") + what + " probabilities sum to " +
                      format_double(sum) + ", not 1 (tolerance 1e-9)");
  }
  for (double& p : probs) p /= sum;
  return probs;
}

}  // namespace detail

inline OffspringLaw parse_law(std::string_view spec) {
  const std::size_t colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw DomainError("law spec: expected '<name>:<params>'");
  }
  const std::string_view name = spec.substr(0, colon);
  const std::string_view rest = spec.substr(colon + 1);
  if (name == "binary") {
    const auto parts = detail::split(rest, ',');
    if (parts.size() != 2) throw DomainError("law spec: binary takes exactly p1,p2");
    std::vector<double> p{detail::parse_double(parts[0], "probability"),
                          detail::parse_double(parts[1], "probability")};
    p = detail::normalized_probs(std::move(p), "binary");
    return OffspringLaw::binary(p[0], p[1]);
  }
  if (name == "geom") {
    return OffspringLaw::geometric_shifted(detail::parse_double(rest, "ratio q"));
  }
  if (name == "poisson1") {
    return OffspringLaw::poisson_shifted(detail::parse_double(rest, "rate lambda"));
  }
  if (name == "table") {
    const std::size_t colon2 = rest.find(':');
    if (colon2 == std::string_view::npos) {
      throw DomainError("law spec: table takes 'table:kmin:p,p,...'");
    }
    const std::uint64_t kmin = detail::parse_uint(rest.substr(0, colon2), "kmin");
    std::vector<double> probs;
    for (const auto part : detail::split(rest.substr(colon2 + 1), ',')) {
      probs.push_back(detail::parse_double(part, "probability"));
    }
    probs = detail::normalized_probs(std::move(probs), "table");
    return OffspringLaw::table(kmin, std::move(probs));
  }
  throw DomainError("law spec: unknown law '" + std::string(name) +
                    "' (expected binary, geom, poisson1 or table)");
}

/// Canonical spec string; parse_law(format_law(law)) reproduces the law.
inline std::string format_law(const OffspringLaw& law) {
  return std::visit(
      [](const auto& d) -> std::string {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Binary>) {
          return "binary:" + detail::format_double(d.p1) + "," + detail::format_double(d.p2);
        } else if constexpr (std::is_same_v<T, GeometricShifted>) {
          return "geom:" + detail::format_double(d.q);
        } else if constexpr (std::is_same_v<T, PoissonShifted>) {
          return "poisson1:" + detail::format_double(d.lambda);
        } else {
          std::string out = "table:" + std::to_string(d.kmin) + ":";
          for (std::size_t i = 0; i < d.probs.size(); ++i) {
            if (i > 0) out += ",";
            out += detail::format_double(d.probs[i]);
          }
          return out;
        }
      },
      law.dist());
}

}  // namespace gwmd
