#pragma once

// Galton-Watson trajectory simulation and generating-function procedures.
//
// The process is Z_0 = z_init, Z_{k+1} = sum_{i=1}^{Z_k} X_{k,i} with the
// X_{k,i} i.i.d. from the offspring law. Since p_0 = 0 every generation is
// at least 1 and trajectories never terminate. All generation arithmetic is
// overflow-checked 64-bit; a window that would wrap raises OverflowError.
//
// Two transition kernels are provided:
//   generation_step       - literal per-individual summation,
//   generation_step_fast  - distributionally identical convolution shortcut
//                           (binomial / Poisson / multinomial), O(1) or
//                           O(support) per generation instead of O(Z_k).
// The Monte Carlo harness drives the fast kernel; goodness-of-fit tests pin
// the two kernels to the same law.

#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "gwmd/errors.hpp"
#include "gwmd/offspring.hpp"
#include "gwmd/rng.hpp"

namespace gwmd {

/// Observed window (Z_k), k = n0 .. n0+n, of one process.
struct Trajectory {
  std::size_t n0 = 0;
  std::vector<std::uint64_t> values;
  std::string law_tag;  // provenance only

  std::size_t transitions() const { return values.size() - 1; }

  void validate() const {
    if (values.size() < 2) throw DomainError("trajectory: need at least one transition");
    for (const std::uint64_t z : values) {
      if (z < 1) throw DomainError("trajectory: generation sizes must be >= 1");
    }
  }
};

namespace detail {

// The convolution kernels parameterize double-based samplers with Z itself;
// past ~2^40 the samplers' internal log-gamma arithmetic degrades, so the
// fast path treats larger generations as overflow. The per-individual
// kernel keeps the full 64-bit range.
inline constexpr std::uint64_t kMaxFastGeneration = std::uint64_t{1} << 40;

inline std::uint64_t add_checked(std::uint64_t a, std::uint64_t b) {
  if (b > std::numeric_limits<std::uint64_t>::max() - a) {
    throw OverflowError("generation size exceeds 64-bit range");
  }
  return a + b;
}

inline std::uint64_t mul_checked(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    throw OverflowError("generation size exceeds 64-bit range");
  }
  return a * b;
}

}  // namespace detail

/// One transition by summing Z_k independent offspring draws.
inline std::uint64_t generation_step(const OffspringLaw& law, std::uint64_t z, Rng& rng) {
  if (z == 0) throw ZeroPopulationError("generation_step: Z = 0");
  std::uint64_t next = 0;
  if (const auto* p = std::get_if<PoissonShifted>(&law.dist())) {
    std::poisson_distribution<std::uint64_t> dist(p->lambda);
    for (std::uint64_t i = 0; i < z; ++i) next = detail::add_checked(next, 1 + dist(rng));
  } else {
    for (std::uint64_t i = 0; i < z; ++i) next = detail::add_checked(next, law.sample(rng));
  }
  return next;
}

/// One transition through the exact convolution shortcut for the law.
/// GeometricShifted has no shortcut here and falls back to per-individual
/// draws.
inline std::uint64_t generation_step_fast(const OffspringLaw& law, std::uint64_t z, Rng& rng) {
  if (z == 0) throw ZeroPopulationError("generation_step_fast: Z = 0");
  if (z > detail::kMaxFastGeneration) {
    throw OverflowError("generation size exceeds the fast samplers' exact range (2^40)");
  }
  return std::visit(
      [&](const auto& d) -> std::uint64_t {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Binary>) {
          // Z + Binomial(Z, p2)
          return detail::add_checked(z, detail::binomial_draw(z, d.p2, rng));
        } else if constexpr (std::is_same_v<T, PoissonShifted>) {
          // Z + Poisson(lambda Z)
          return detail::add_checked(
              z, detail::poisson_draw(d.lambda * static_cast<double>(z), rng));
        } else if constexpr (std::is_same_v<T, TablePmf>) {
          // Multinomial occupation counts via sequential binomials.
          std::uint64_t next = 0;
          std::uint64_t remaining = z;
          double mass_left = 1.0;
          for (std::size_t i = 0; i + 1 < d.probs.size() && remaining > 0; ++i) {
            double cond = d.probs[i] / mass_left;
            if (cond > 1.0) cond = 1.0;
            const std::uint64_t c = detail::binomial_draw(remaining, cond, rng);
            next = detail::add_checked(next, detail::mul_checked(d.kmin + i, c));
            remaining -= c;
            mass_left -= d.probs[i];
          }
          next = detail::add_checked(
              next, detail::mul_checked(d.kmin + d.probs.size() - 1, remaining));
          return next;
        } else {
          std::uint64_t next = 0;
          for (std::uint64_t i = 0; i < z; ++i) {
            next = detail::add_checked(next, law.sample(rng));
          }
          return next;
        }
      },
      law.dist());
}

namespace detail {

template <class StepFn>
Trajectory simulate_with(const OffspringLaw& law, std::size_t n0, std::size_t n, Rng& rng,
                         std::uint64_t z_init, StepFn step) {
  if (n < 1) throw DomainError("simulate: window length n must be >= 1");
  if (z_init < 1) throw DomainError("simulate: z_init must be >= 1");
  std::uint64_t z = z_init;
  for (std::size_t k = 0; k < n0; ++k) z = step(law, z, rng);
  Trajectory traj;
  traj.n0 = n0;
  traj.law_tag = format_law(law);
  traj.values.reserve(n + 1);
  traj.values.push_back(z);
  for (std::size_t k = 0; k < n; ++k) {
    z = step(law, z, rng);
    traj.values.push_back(z);
  }
  return traj;
}

}  // namespace detail

/// Simulates the window (Z_k), n0 <= k <= n0+n, of one process started at
/// Z_0 = z_init. The first n0 generations are burned in, then n+1 values are
/// recorded. Per-individual summation semantics.
inline Trajectory simulate(const OffspringLaw& law, std::size_t n0, std::size_t n, Rng& rng,
                           std::uint64_t z_init = 1) {
  return detail::simulate_with(law, n0, n, rng, z_init, generation_step);
}

/// PoissonShifted-only shortcut: Z_{k+1} = Z_k + Poisson(lambda Z_k),
/// distributionally identical to simulate() with O(1) work per generation.
inline Trajectory simulate_fast(const OffspringLaw& law, std::size_t n0, std::size_t n,
                                Rng& rng, std::uint64_t z_init = 1) {
  if (!std::holds_alternative<PoissonShifted>(law.dist())) {
    throw DomainError("simulate_fast: law must be poisson1");
  }
  return detail::simulate_with(law, n0, n, rng, z_init, generation_step_fast);
}

// ---------------------------------------------------------------------------
// Generating-function procedures
// ---------------------------------------------------------------------------

/// f(s) = sum_k p_k s^k for s in [0,1], by the truncated-series rule;
/// f(1) = 1 exactly.
inline double pgf_value(const OffspringLaw& law, double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("pgf: s must lie in [0,1]");
  if (s == 1.0) return 1.0;
  if (s == 0.0) return 0.0;  // p_0 = 0
  const double log_s = std::log(s);
  const auto res = detail::law_series(
      law,
      [&](std::uint64_t k, double, double lpk) {
        return std::exp(lpk + static_cast<double>(k) * log_s);
      },
      [&](std::uint64_t) { return s; }, 2);
  if (!res.converged) {
    throw NonConvergentError("pgf: series cap reached before tail criterion");
  }
  return std::min(res.value, 1.0);
}

/// n-fold iterate f_n(s); f_0(s) = s, f_n = f(f_{n-1}(s)). This is the
/// generating function of Z_n.
inline double pgf_iterate(const OffspringLaw& law, double s, std::size_t n) {
  double value = s;
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("pgf: s must lie in [0,1]");
  for (std::size_t i = 0; i < n; ++i) value = pgf_value(law, value);
  return value;
}

/// Markov-type upper bound on P(Z_n <= n): with s0 = (1+p1)/2,
/// P(Z_n <= n) <= s0^{-n} f_n(s0), capped at 1. When p1 = 0 the process
/// satisfies Z_n >= 2^n, so the bound is the indicator of 2^n <= n.
inline double small_pop_bound(const OffspringLaw& law, std::size_t n) {
  if (n < 1) throw DomainError("small_pop_bound: n must be >= 1");
  const double p1 = law.p1();
  if (p1 == 0.0) {
    const bool doubling_exceeds = n >= 64 || (std::uint64_t{1} << n) > n;
    return doubling_exceeds ? 0.0 : 1.0;
  }
  const double s0 = 0.5 * (1.0 + p1);
  const double bound = pgf_iterate(law, s0, n) * std::pow(s0, -static_cast<double>(n));
  return std::min(bound, 1.0);
}

/// The sequence f_n(s)/p1^n for n = 1..n_max, a numerical witness of the
/// limit Q(s); no extrapolation is attempted since the convergence rate is
/// not quantified.
inline std::vector<double> q_limit_estimate(const OffspringLaw& law, double s,
                                            std::size_t n_max) {
  if (law.p1() <= 0.0) {
    throw RequiresP1PositiveError("q_limit_estimate: requires p1 > 0");
  }
  if (!(s >= 0.0 && s < 1.0)) throw DomainError("q_limit_estimate: s must lie in [0,1)");
  std::vector<double> out;
  out.reserve(n_max);
  double f = s;
  double p1n = 1.0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    f = pgf_value(law, f);
    p1n *= law.p1();
    out.push_back(f / p1n);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trajectory CSV
// ---------------------------------------------------------------------------
//
//   # law_tag: binary:0.5,0.5
//   generation,z
//   0,1
//   1,2

inline void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
  if (!traj.law_tag.empty()) os << "# law_tag: " << traj.law_tag << "\n";
  os << "generation,z\n";
  for (std::size_t i = 0; i < traj.values.size(); ++i) {
    os << traj.n0 + i << "," << traj.values[i] << "\n";
  }
}

inline Trajectory read_trajectory_csv(std::istream& is) {
  Trajectory traj;
  std::string line;
  bool header_seen = false;
  bool first_row = true;
  std::size_t expected_gen = 0;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      constexpr std::string_view tag = "# law_tag: ";
      if (line.rfind(tag, 0) == 0) traj.law_tag = line.substr(tag.size());
      continue;
    }
    if (!header_seen) {
      if (line != "generation,z") {
        throw DomainError("trajectory csv: expected header 'generation,z'");
      }
      header_seen = true;
      continue;
    }
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos) {
      throw DomainError("trajectory csv: malformed row '" + line + "'");
    }
    const std::uint64_t gen = detail::parse_uint(
        std::string_view(line).substr(0, comma), "generation");
    const std::uint64_t z = detail::parse_uint(
        std::string_view(line).substr(comma + 1), "generation size");
    if (first_row) {
      traj.n0 = gen;
      expected_gen = gen;
      first_row = false;
    }
    if (gen != expected_gen) {
      throw DomainError("trajectory csv: generations must be contiguous and ascending");
    }
    ++expected_gen;
    traj.values.push_back(z);
  }
  traj.validate();
  return traj;
}

}  // namespace gwmd
