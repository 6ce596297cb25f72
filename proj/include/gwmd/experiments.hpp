#pragma once

// Reproducible Monte Carlo harness for the tail-ratio, MDP, coverage and
// small-population experiments.
//
// Determinism contract: replicate i draws from Rng(replicate_seed(
// master_seed, stream, i)) where stream is the window length / target
// generation n, so a report depends only on the statistical configuration
// and master_seed. Workers accumulate integer tallies that are merged by
// addition, so results are bit-identical for every thread count and across
// repeated runs. Execution details (thread count, wall time) never enter a
// report body.
//
// Trajectories are driven by generation_step_fast, the exact convolution
// kernel; goodness-of-fit tests in the suite pin it against per-individual
// simulation.
//
// The MDP experiment instantiates the moderate deviation principle with the
// symmetric Borel set B = {|x| >= x0}: count = #{|stat| >= a_n x0} and
// (1/a_n^2) ln(count/N) is compared against -x0^2/2, the infimum of x^2/2
// over B.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "gwmd/branching.hpp"
#include "gwmd/errors.hpp"
#include "gwmd/gaussian.hpp"
#include "gwmd/inference.hpp"
#include "gwmd/offspring.hpp"
#include "gwmd/rng.hpp"
#include "gwmd/stats.hpp"
#include "gwmd/summation.hpp"

namespace gwmd {

enum class Statistic { window_h, single_step_r };

inline const char* to_string(Statistic s) {
  return s == Statistic::window_h ? "H" : "R";
}

struct ExperimentConfig {
  explicit ExperimentConfig(OffspringLaw l) : law(std::move(l)) {}

  OffspringLaw law;
  Statistic statistic = Statistic::window_h;
  std::size_t n0 = 0;
  std::size_t n = 15;
  std::uint64_t replicates = 10'000;
  std::vector<double> x_grid;
  double kappa = 0.05;        // coverage runs
  double a_exponent = 0.25;   // MDP runs: a_n = n^{a_exponent}
  std::uint64_t master_seed = 0;
  unsigned threads = 0;  // 0 = auto; execution detail, not part of reports

  void validate() const {
    if (replicates < 1) throw DomainError("experiment: replicates must be >= 1");
    if (n < 1) throw DomainError("experiment: n must be >= 1");
    if (!(kappa > 0.0 && kappa < 1.0)) throw DomainError("experiment: kappa must lie in (0,1)");
    if (!(a_exponent > 0.0 && a_exponent < 0.5)) {
      throw DomainError("experiment: a_exponent must lie in (0, 0.5)");
    }
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
      if (!(x_grid[i] >= 0.0)) throw DomainError("experiment: x grid points must be >= 0");
      if (i > 0 && x_grid[i] <= x_grid[i - 1]) {
        throw DomainError("experiment: x grid must be strictly ascending");
      }
    }
  }
};

// ---------------------------------------------------------------------------
// Replicate runner
// ---------------------------------------------------------------------------

namespace detail {

inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

/// Runs body(replicate_index, rng, tally) over i = 0..n-1 on `threads`
/// workers. Tally is copied from `zero` per worker and merged by
/// Tally::merge_from in worker order; integer tallies make the merge exact
/// and schedule-independent.
template <class Tally, class Body>
Tally run_replicates(std::uint64_t n_replicates, unsigned threads, std::uint64_t master_seed,
                     std::uint64_t stream, Tally zero, Body&& body) {
  const unsigned t_req = resolve_threads(threads);
  const unsigned t_count = static_cast<unsigned>(
      std::min<std::uint64_t>(t_req, n_replicates == 0 ? 1 : n_replicates));
  std::vector<Tally> tallies(t_count, zero);
  std::vector<std::exception_ptr> errors(t_count);
  std::vector<std::thread> pool;
  pool.reserve(t_count);
  const std::uint64_t chunk = (n_replicates + t_count - 1) / t_count;
  for (unsigned t = 0; t < t_count; ++t) {
    const std::uint64_t lo = static_cast<std::uint64_t>(t) * chunk;
    const std::uint64_t hi = std::min<std::uint64_t>(lo + chunk, n_replicates);
    pool.emplace_back([&, t, lo, hi] {
      try {
        for (std::uint64_t i = lo; i < hi; ++i) {
          Rng rng = replicate_rng(master_seed, stream, i);
          body(i, rng, tallies[t]);
        }
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  for (unsigned t = 1; t < t_count; ++t) tallies[0].merge_from(tallies[t]);
  return tallies[0];
}

/// One replicate of the chosen statistic: H over the window (n0, n) or R at
/// the single transition (Z_{n0+n}, Z_{n0+n+1}), from Z_0 = 1 with true
/// (m, v).
inline double statistic_replicate(const OffspringLaw& law, Statistic stat, std::size_t n0,
                                  std::size_t n, double m, double v, Rng& rng) {
  std::uint64_t z = 1;
  if (stat == Statistic::window_h) {
    for (std::size_t k = 0; k < n0; ++k) z = generation_step_fast(law, z, rng);
    NeumaierSum centered;
    for (std::size_t k = 0; k < n; ++k) {
      const std::uint64_t z_next = generation_step_fast(law, z, rng);
      const double zd = to_exact_double(z);
      centered.add(std::sqrt(zd) * (to_exact_double(z_next) / zd - m));
      z = z_next;
    }
    return centered.value() / (v * std::sqrt(static_cast<double>(n)));
  }
  for (std::size_t k = 0; k < n0 + n; ++k) z = generation_step_fast(law, z, rng);
  const std::uint64_t z_next = generation_step_fast(law, z, rng);
  return r_statistic(z, z_next, m, v);
}

struct CountTally {
  std::vector<std::uint64_t> upper, lower;
  void merge_from(const CountTally& other) {
    for (std::size_t i = 0; i < upper.size(); ++i) upper[i] += other.upper[i];
    for (std::size_t i = 0; i < lower.size(); ++i) lower[i] += other.lower[i];
  }
};

/// Tail counts of the statistic over the grid: upper[i] = #{stat >= x_i},
/// lower[i] = #{stat <= -x_i}.
inline CountTally tail_counts(const ExperimentConfig& cfg, std::size_t n,
                              const std::vector<double>& grid) {
  const double m = cfg.law.mean();
  const double v = std::sqrt(cfg.law.variance());
  CountTally zero;
  zero.upper.assign(grid.size(), 0);
  zero.lower.assign(grid.size(), 0);
  return run_replicates(
      cfg.replicates, cfg.threads, cfg.master_seed, n, zero,
      [&](std::uint64_t, Rng& rng, CountTally& tally) {
        const double stat =
            statistic_replicate(cfg.law, cfg.statistic, cfg.n0, n, m, v, rng);
        for (std::size_t i = 0; i < grid.size() && stat >= grid[i]; ++i) ++tally.upper[i];
        for (std::size_t i = 0; i < grid.size() && stat <= -grid[i]; ++i) ++tally.lower[i];
      });
}

inline constexpr double kWilsonZ = 1.9599639845400545;  // Phi^{-1}(0.975)

/// 95% Wilson score interval for a binomial proportion.
inline std::pair<double, double> wilson_band(std::uint64_t hits, std::uint64_t n) {
  const double z = kWilsonZ;
  const double nd = static_cast<double>(n);
  const double p = static_cast<double>(hits) / nd;
  const double denom = 1.0 + z * z / nd;
  const double center = (p + z * z / (2.0 * nd)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / nd + z * z / (4.0 * nd * nd)) / denom;
  return {center - half, center + half};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Tail-ratio experiment
// ---------------------------------------------------------------------------

struct TailRatioRow {
  double x;
  std::uint64_t count;
  double emp_tail;
  double phi_tail;
  double ratio;          // NaN sentinel when count = 0, never 0
  double log_abs_ratio;  // |ln ratio|; NaN when ratio undefined
  double mc_se;          // binomial se of emp_tail, divided by phi_tail
  bool reliable;         // count >= 10
};

struct TailRatioReport {
  std::string law;
  Statistic statistic;
  std::size_t n0 = 0;
  std::size_t n = 0;
  std::uint64_t replicates = 0;
  std::vector<double> x_grid;
  std::uint64_t master_seed = 0;
  std::vector<TailRatioRow> upper;  // #{stat >= x} vs 1 - Phi(x)
  std::vector<TailRatioRow> lower;  // #{stat <= -x} vs Phi(-x)

  bool any_unreliable() const {
    for (const auto& r : upper) {
      if (!r.reliable) return true;
    }
    for (const auto& r : lower) {
      if (!r.reliable) return true;
    }
    return false;
  }
};

namespace detail {

inline TailRatioRow make_tail_row(double x, std::uint64_t count, std::uint64_t n_replicates) {
  TailRatioRow row;
  row.x = x;
  row.count = count;
  const double nd = static_cast<double>(n_replicates);
  row.emp_tail = static_cast<double>(count) / nd;
  row.phi_tail = static_cast<double>(1.0L - phi_cdf(static_cast<long double>(x)));
  if (count > 0) {
    row.ratio = row.emp_tail / row.phi_tail;
    row.log_abs_ratio = std::fabs(std::log(row.ratio));
  } else {
    row.ratio = std::numeric_limits<double>::quiet_NaN();
    row.log_abs_ratio = std::numeric_limits<double>::quiet_NaN();
  }
  row.mc_se = std::sqrt(row.emp_tail * (1.0 - row.emp_tail) / nd) / row.phi_tail;
  row.reliable = count >= 10;
  return row;
}

}  // namespace detail

/// Tallies both tails of the chosen statistic at every grid point.
inline TailRatioReport tail_ratio_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.x_grid.empty()) throw DomainError("tail_ratio_experiment: empty x grid");
  const detail::CountTally tally = detail::tail_counts(cfg, cfg.n, cfg.x_grid);
  TailRatioReport rep;
  rep.law = format_law(cfg.law);
  rep.statistic = cfg.statistic;
  rep.n0 = cfg.n0;
  rep.n = cfg.n;
  rep.replicates = cfg.replicates;
  rep.x_grid = cfg.x_grid;
  rep.master_seed = cfg.master_seed;
  for (std::size_t i = 0; i < cfg.x_grid.size(); ++i) {
    rep.upper.push_back(detail::make_tail_row(cfg.x_grid[i], tally.upper[i], cfg.replicates));
    rep.lower.push_back(detail::make_tail_row(cfg.x_grid[i], tally.lower[i], cfg.replicates));
  }
  return rep;
}

/// Raw per-replicate statistic values in replicate order; mainly for tests
/// and meta-checks. Thread count does not affect the content.
inline std::vector<double> collect_statistics(const ExperimentConfig& cfg) {
  cfg.validate();
  const double m = cfg.law.mean();
  const double v = std::sqrt(cfg.law.variance());
  std::vector<double> values(cfg.replicates);
  struct NoTally {
    void merge_from(const NoTally&) {}
  };
  detail::run_replicates(cfg.replicates, cfg.threads, cfg.master_seed, cfg.n, NoTally{},
                         [&](std::uint64_t i, Rng& rng, NoTally&) {
                           values[i] = detail::statistic_replicate(
                               cfg.law, cfg.statistic, cfg.n0, cfg.n, m, v, rng);
                         });
  return values;
}

// ---------------------------------------------------------------------------
// MDP experiment
// ---------------------------------------------------------------------------

struct MdpRow {
  std::size_t n;
  double a_n;
  double threshold;  // a_n * x0
  std::uint64_t count;
  double emp_log_rate;  // (1/a_n^2) ln(count/N); NaN when count = 0
  double target;        // -x0^2/2
  double gap;           // |emp_log_rate - target|; NaN when count = 0
  bool estimable;       // count > 0
};

struct MdpReport {
  std::string law;
  Statistic statistic;
  std::size_t n0 = 0;
  double a_exponent = 0.0;
  double x0 = 0.0;
  std::uint64_t replicates = 0;
  std::uint64_t master_seed = 0;
  std::vector<std::size_t> n_sweep;
  std::vector<MdpRow> rows;

  bool any_unestimable() const {
    for (const auto& r : rows) {
      if (!r.estimable) return true;
    }
    return false;
  }
};

/// Empirical MDP rate over an n sweep for B = {|x| >= x0}:
/// (1/a_n^2) ln P(|stat| >= a_n x0) against -x0^2/2.
inline MdpReport mdp_experiment(const ExperimentConfig& cfg, double x0,
                                const std::vector<std::size_t>& n_sweep) {
  cfg.validate();
  if (!(x0 > 0.0)) throw DomainError("mdp_experiment: x0 must be positive");
  if (n_sweep.empty()) throw DomainError("mdp_experiment: empty n sweep");
  MdpReport rep;
  rep.law = format_law(cfg.law);
  rep.statistic = cfg.statistic;
  rep.n0 = cfg.n0;
  rep.a_exponent = cfg.a_exponent;
  rep.x0 = x0;
  rep.replicates = cfg.replicates;
  rep.master_seed = cfg.master_seed;
  rep.n_sweep = n_sweep;
  const double target = -0.5 * x0 * x0;
  for (const std::size_t n : n_sweep) {
    if (n < 1) throw DomainError("mdp_experiment: sweep entries must be >= 1");
    MdpRow row;
    row.n = n;
    row.a_n = std::pow(static_cast<double>(n), cfg.a_exponent);
    row.threshold = row.a_n * x0;
    const detail::CountTally tally = detail::tail_counts(cfg, n, {row.threshold});
    row.count = tally.upper[0] + tally.lower[0];
    row.target = target;
    row.estimable = row.count > 0;
    if (row.estimable) {
      row.emp_log_rate =
          std::log(static_cast<double>(row.count) / static_cast<double>(cfg.replicates)) /
          (row.a_n * row.a_n);
      row.gap = std::fabs(row.emp_log_rate - target);
    } else {
      row.emp_log_rate = std::numeric_limits<double>::quiet_NaN();
      row.gap = std::numeric_limits<double>::quiet_NaN();
    }
    rep.rows.push_back(row);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Coverage experiment
// ---------------------------------------------------------------------------

struct CoverageReport {
  std::string law;
  CiMethod method = CiMethod::window;
  std::optional<WidthMode> width_mode;  // single-step only
  std::size_t n0 = 0;
  std::size_t n = 0;
  double kappa = 0.0;
  std::uint64_t replicates = 0;
  std::uint64_t hits = 0;
  double coverage = 0.0;
  double nominal = 0.0;
  double band_lo = 0.0;  // 95% Wilson band for the empirical coverage
  double band_hi = 0.0;
  std::uint64_t master_seed = 0;
};

/// Builds the chosen interval per replicate and scores containment of the
/// true mean. Width modes share replicate seeds, so a derived/literal pair
/// on the same config sees identical trajectories.
inline CoverageReport coverage_experiment(const ExperimentConfig& cfg, CiMethod method,
                                          WidthMode width_mode = WidthMode::derived) {
  cfg.validate();
  const double m = cfg.law.mean();
  const double v = std::sqrt(cfg.law.variance());
  struct HitTally {
    std::uint64_t hits = 0;
    void merge_from(const HitTally& other) { hits += other.hits; }
  };
  const HitTally tally = detail::run_replicates(
      cfg.replicates, cfg.threads, cfg.master_seed, cfg.n, HitTally{},
      [&](std::uint64_t, Rng& rng, HitTally& t) {
        if (method == CiMethod::window) {
          Trajectory traj;
          traj.n0 = cfg.n0;
          traj.values.reserve(cfg.n + 1);
          std::uint64_t z = 1;
          for (std::size_t k = 0; k < cfg.n0; ++k) z = generation_step_fast(cfg.law, z, rng);
          traj.values.push_back(z);
          for (std::size_t k = 0; k < cfg.n; ++k) {
            z = generation_step_fast(cfg.law, z, rng);
            traj.values.push_back(z);
          }
          if (ci_window(traj, v, cfg.kappa).contains(m)) ++t.hits;
        } else {
          std::uint64_t z = 1;
          for (std::size_t k = 0; k < cfg.n0 + cfg.n; ++k) {
            z = generation_step_fast(cfg.law, z, rng);
          }
          const std::uint64_t z_next = generation_step_fast(cfg.law, z, rng);
          if (ci_single(z, z_next, v, cfg.kappa, width_mode).contains(m)) ++t.hits;
        }
      });
  CoverageReport rep;
  rep.law = format_law(cfg.law);
  rep.method = method;
  if (method == CiMethod::single_step) rep.width_mode = width_mode;
  rep.n0 = cfg.n0;
  rep.n = cfg.n;
  rep.kappa = cfg.kappa;
  rep.replicates = cfg.replicates;
  rep.hits = tally.hits;
  rep.coverage = static_cast<double>(tally.hits) / static_cast<double>(cfg.replicates);
  rep.nominal = 1.0 - cfg.kappa;
  const auto band = detail::wilson_band(tally.hits, cfg.replicates);
  rep.band_lo = band.first;
  rep.band_hi = band.second;
  rep.master_seed = cfg.master_seed;
  return rep;
}

// ---------------------------------------------------------------------------
// Small-population experiment
// ---------------------------------------------------------------------------

struct SmallPopRow {
  std::size_t n;
  std::uint64_t count;  // #{Z_n <= n}
  double freq;
  double bound;  // analytic small_pop_bound
  double se;     // sqrt(bound (1-bound) / N)
  bool ok;       // freq <= bound + 3 se
};

struct SmallPopReport {
  std::string law;
  std::uint64_t replicates = 0;
  std::uint64_t master_seed = 0;
  std::vector<SmallPopRow> rows;

  bool all_ok() const {
    for (const auto& r : rows) {
      if (!r.ok) return false;
    }
    return true;
  }
};

/// Empirical frequency of {Z_n <= n} against the analytic Markov bound,
/// per n in the sweep.
inline SmallPopReport small_pop_experiment(const OffspringLaw& law,
                                           const std::vector<std::size_t>& n_sweep,
                                           std::uint64_t replicates, std::uint64_t master_seed,
                                           unsigned threads = 0) {
  if (replicates < 1) throw DomainError("small_pop_experiment: replicates must be >= 1");
  if (n_sweep.empty()) throw DomainError("small_pop_experiment: empty n sweep");
  SmallPopReport rep;
  rep.law = format_law(law);
  rep.replicates = replicates;
  rep.master_seed = master_seed;
  struct HitTally {
    std::uint64_t hits = 0;
    void merge_from(const HitTally& other) { hits += other.hits; }
  };
  for (const std::size_t n : n_sweep) {
    if (n < 1) throw DomainError("small_pop_experiment: sweep entries must be >= 1");
    const HitTally tally = detail::run_replicates(
        replicates, threads, master_seed, n, HitTally{},
        [&](std::uint64_t, Rng& rng, HitTally& t) {
          std::uint64_t z = 1;
          for (std::size_t k = 0; k < n; ++k) z = generation_step_fast(law, z, rng);
          if (z <= n) ++t.hits;
        });
    SmallPopRow row;
    row.n = n;
    row.count = tally.hits;
    row.freq = static_cast<double>(tally.hits) / static_cast<double>(replicates);
    row.bound = small_pop_bound(law, n);
    row.se = std::sqrt(row.bound * (1.0 - row.bound) / static_cast<double>(replicates));
    row.ok = row.freq <= row.bound + 3.0 * row.se;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace gwmd
