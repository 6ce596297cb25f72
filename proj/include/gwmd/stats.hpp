#pragma once

// Estimators and standardized statistics for the offspring mean.
//
//   lotka_nagaev        Z_{n+1}/Z_n, the single-transition ratio estimator
//   weighted_estimator  m_hat = sum sqrt(Z_k) (Z_{k+1}/Z_k) / sum sqrt(Z_k)
//   h_statistic         H = (1/(v sqrt(n))) sum sqrt(Z_k) (Z_{k+1}/Z_k - m),
//                       the standardized martingale over a window; satisfies
//                       H = (m_hat - m) sum sqrt(Z_k) / (v sqrt(n))
//   r_statistic         R = (sqrt(Z_n)/v) (Z_{n+1}/Z_n - m)
//
// m and v are the true law parameters; no plug-in estimation happens here.
// Sums use compensated accumulation so values do not depend on how callers
// chunk the work. Generation sizes are converted to double, which is exact
// up to 2^53; larger values are rejected.

#include <cmath>
#include <cstdint>

#include "gwmd/branching.hpp"
#include "gwmd/errors.hpp"
#include "gwmd/summation.hpp"

namespace gwmd {

/// H over a window together with the window estimator pieces.
struct WindowStat {
  double h_value;
  double m_hat;
  double sqrt_sum;  // sum of sqrt(Z_k) over the window's n transitions
  std::size_t n;
  std::size_t n0;
};

namespace detail {

inline double to_exact_double(std::uint64_t z) {
  constexpr std::uint64_t kMaxExact = std::uint64_t{1} << 53;
  if (z > kMaxExact) {
    throw DomainError("statistics: generation size exceeds 2^53 (double-exact range)");
  }
  return static_cast<double>(z);
}

}  // namespace detail

/// Z_{n+1}/Z_n. Valid trajectories always have Z_n >= 1; a zero denominator
/// raises ZeroPopulationError.
inline double lotka_nagaev(std::uint64_t z_n, std::uint64_t z_next) {
  if (z_n == 0) throw ZeroPopulationError("lotka_nagaev: Z_n = 0");
  return detail::to_exact_double(z_next) / detail::to_exact_double(z_n);
}

/// R_n = (sqrt(Z_n)/v) (Z_{n+1}/Z_n - m).
inline double r_statistic(std::uint64_t z_n, std::uint64_t z_next, double m, double v) {
  if (z_n == 0) throw ZeroPopulationError("r_statistic: Z_n = 0");
  if (!(v > 0.0)) throw DomainError("r_statistic: v must be positive");
  const double zn = detail::to_exact_double(z_n);
  return std::sqrt(zn) / v * (detail::to_exact_double(z_next) / zn - m);
}

/// H, m_hat and sum sqrt(Z_k) from the window's transitions.
inline WindowStat h_statistic(const Trajectory& traj, double m, double v) {
  traj.validate();
  if (!(v > 0.0)) throw DomainError("h_statistic: v must be positive");
  const std::size_t n = traj.transitions();
  NeumaierSum centered;   // sum sqrt(Z_k) (Z_{k+1}/Z_k - m)
  NeumaierSum weighted;   // sum sqrt(Z_k) (Z_{k+1}/Z_k)
  NeumaierSum sqrt_sum;
  for (std::size_t k = 0; k < n; ++k) {
    const double zk = detail::to_exact_double(traj.values[k]);
    const double ratio = detail::to_exact_double(traj.values[k + 1]) / zk;
    const double root = std::sqrt(zk);
    centered.add(root * (ratio - m));
    weighted.add(root * ratio);
    sqrt_sum.add(root);
  }
  WindowStat out;
  out.n = n;
  out.n0 = traj.n0;
  out.sqrt_sum = sqrt_sum.value();
  out.h_value = centered.value() / (v * std::sqrt(static_cast<double>(n)));
  out.m_hat = weighted.value() / out.sqrt_sum;
  return out;
}

/// The random weighted ratio estimator m_hat; a convex combination of the
/// per-step ratios.
inline double weighted_estimator(const Trajectory& traj) {
  traj.validate();
  NeumaierSum weighted, sqrt_sum;
  for (std::size_t k = 0; k + 1 < traj.values.size(); ++k) {
    const double zk = detail::to_exact_double(traj.values[k]);
    const double root = std::sqrt(zk);
    weighted.add(root * (detail::to_exact_double(traj.values[k + 1]) / zk));
    sqrt_sum.add(root);
  }
  return weighted.value() / sqrt_sum.value();
}

}  // namespace gwmd
