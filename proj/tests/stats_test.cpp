#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "gwmd/branching.hpp"
#include "gwmd/errors.hpp"
#include "gwmd/experiments.hpp"
#include "gwmd/stats.hpp"
#include "oracles.hpp"

using namespace gwmd;

namespace {

Trajectory make_traj(std::vector<std::uint64_t> values, std::size_t n0 = 0) {
  Trajectory t;
  t.n0 = n0;
  t.values = std::move(values);
  return t;
}

}  // namespace

TEST_CASE("lotka-nagaev ratio") {
  CHECK(lotka_nagaev(4, 6) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(lotka_nagaev(1, 7) == doctest::Approx(7.0).epsilon(1e-15));
  CHECK(lotka_nagaev(438, 657) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK_THROWS_AS(lotka_nagaev(0, 3), ZeroPopulationError);
}

TEST_CASE("h statistic hand values") {
  // Constant-ratio window: every centered term vanishes.
  const WindowStat flat = h_statistic(make_traj({1, 2, 4}), 2.0, 0.5);
  CHECK(std::fabs(flat.h_value) < 1e-15);

  const WindowStat ws = h_statistic(make_traj({1, 2, 2}), 1.5, 0.5);
  // Terms: sqrt(1)(2-1.5) = 0.5 and sqrt(2)(1-1.5); H = sum/(0.5 sqrt(2)).
  const double expect = (0.5 - 0.5 * std::sqrt(2.0)) / (0.5 * std::sqrt(2.0));
  CHECK(ws.h_value == doctest::Approx(expect).epsilon(1e-12));
  CHECK(ws.h_value == doctest::Approx(-0.2928932188).epsilon(1e-9));
  CHECK(ws.sqrt_sum == doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-12));
  CHECK(ws.m_hat == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(ws.n == 2);
}

TEST_CASE("weighted estimator") {
  CHECK(weighted_estimator(make_traj({1, 2, 2})) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(weighted_estimator(make_traj({1, 2, 4, 8})) == doctest::Approx(2.0).epsilon(1e-14));

  // Convexity: min ratio <= m_hat <= max ratio.
  Rng rng(17);
  const OffspringLaw law = OffspringLaw::geometric_shifted(0.4);
  for (int i = 0; i < 100; ++i) {
    const Trajectory traj = simulate(law, 0, 6, rng);
    double lo = 1e300, hi = -1e300;
    for (std::size_t k = 0; k + 1 < traj.values.size(); ++k) {
      const double r = lotka_nagaev(traj.values[k], traj.values[k + 1]);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    const double m_hat = weighted_estimator(traj);
    CHECK(m_hat >= lo - 1e-12);
    CHECK(m_hat <= hi + 1e-12);
  }
}

TEST_CASE("r statistic") {
  CHECK(r_statistic(4, 8, 1.5, 0.5) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r_statistic(4, 6, 1.5, 0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(r_statistic(1, 2, 1.5, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(r_statistic(0, 1, 1.5, 0.5), ZeroPopulationError);
  CHECK_THROWS_AS(r_statistic(4, 8, 1.5, 0.0), DomainError);

  Rng rng(23);
  for (int i = 0; i < 200; ++i) {
    const std::uint64_t z = 1 + (rng() % 1000);
    const std::uint64_t znext = 1 + (rng() % 3000);
    const double r = r_statistic(z, znext, 1.5, 0.5);
    const double centered = static_cast<double>(znext) - 1.5 * static_cast<double>(z);
    if (centered > 0) CHECK(r > 0);
    if (centered < 0) CHECK(r < 0);
  }
}

TEST_CASE("h equals the rewritten estimator form") {
  // H = (m_hat - m) sum sqrt(Z_k) / (v sqrt(n)) on random windows.
  Rng rng(31);
  for (int i = 0; i < 1000; ++i) {
    const double p1 = 0.1 + 0.8 * rng.uniform01();
    const OffspringLaw law = OffspringLaw::binary(p1, 1.0 - p1);
    const std::size_t n = 2 + rng() % 19;
    const std::size_t n0 = rng() % 4;
    const Trajectory traj = simulate(law, n0, n, rng);
    const double m = law.mean();
    const double v = std::sqrt(law.variance());
    const WindowStat ws = h_statistic(traj, m, v);
    const double rewritten =
        (ws.m_hat - m) * ws.sqrt_sum / (v * std::sqrt(static_cast<double>(ws.n)));
    CHECK(std::fabs(ws.h_value - rewritten) <= 1e-12);
  }
}

TEST_CASE("h ignores the window label n0") {
  const WindowStat a = h_statistic(make_traj({3, 5, 8, 11}, 0), 1.5, 0.5);
  const WindowStat b = h_statistic(make_traj({3, 5, 8, 11}, 17), 1.5, 0.5);
  CHECK(a.h_value == b.h_value);
  CHECK(a.m_hat == b.m_hat);
}

TEST_CASE("statistics reject generation sizes beyond 2^53") {
  const std::uint64_t big = (std::uint64_t{1} << 53) + 2;
  CHECK_THROWS_AS(lotka_nagaev(big, 1), DomainError);
  CHECK_THROWS_AS(r_statistic(1, big, 1.5, 0.5), DomainError);
  CHECK_THROWS_AS(h_statistic(make_traj({1, big}), 1.5, 0.5), DomainError);
}

TEST_CASE("h is standardized: mean 0, variance 1 at moderate n") {
  ExperimentConfig cfg(OffspringLaw::binary(0.5, 0.5));
  cfg.statistic = Statistic::window_h;
  cfg.n = 15;
  cfg.replicates = 100'000;
  cfg.master_seed = 2024;
  cfg.threads = 1;
  const std::vector<double> hs = collect_statistics(cfg);
  const double mean = oracle::sample_mean(hs);
  const double var = oracle::sample_variance(hs);
  CHECK(std::fabs(mean) < 4.0 * std::sqrt(var / static_cast<double>(hs.size())));
  CHECK(var > 0.9);
  CHECK(var < 1.1);
}

TEST_CASE("compensated window sums match a long double reference") {
  Rng rng(57);
  const OffspringLaw law = OffspringLaw::binary(0.5, 0.5);
  const Trajectory traj = simulate(law, 0, 20, rng);
  const WindowStat ws = h_statistic(traj, 1.5, 0.5);
  long double centered = 0.0L, roots = 0.0L;
  for (std::size_t k = 0; k + 1 < traj.values.size(); ++k) {
    const long double zk = static_cast<long double>(traj.values[k]);
    const long double ratio = static_cast<long double>(traj.values[k + 1]) / zk;
    centered += sqrtl(zk) * (ratio - 1.5L);
    roots += sqrtl(zk);
  }
  const long double h_ref = centered / (0.5L * sqrtl(20.0L));
  CHECK(std::fabs(ws.h_value - static_cast<double>(h_ref)) < 1e-13);
  CHECK(std::fabs(ws.sqrt_sum - static_cast<double>(roots)) < 1e-13);
}
