#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "gwmd/branching.hpp"
#include "gwmd/errors.hpp"
#include "gwmd/gaussian.hpp"
#include "gwmd/inference.hpp"
#include "gwmd/stats.hpp"

using namespace gwmd;

namespace {

Trajectory make_traj(std::vector<std::uint64_t> values, std::size_t n0 = 0) {
  Trajectory t;
  t.n0 = n0;
  t.values = std::move(values);
  return t;
}

}  // namespace

TEST_CASE("window interval hand values") {
  const ConfidenceInterval ci = ci_window(make_traj({1, 2, 2}), 0.5, 0.05);
  const double center = std::sqrt(2.0);
  const double half = 0.5 * std::sqrt(2.0) * 1.9599639845 / (1.0 + std::sqrt(2.0));
  CHECK(half == doctest::Approx(0.574059).epsilon(1e-5));
  CHECK(ci.lo == doctest::Approx(center - half).epsilon(1e-9));
  CHECK(ci.hi == doctest::Approx(center + half).epsilon(1e-9));
  CHECK(ci.lo == doctest::Approx(0.840155).epsilon(1e-5));
  CHECK(ci.hi == doctest::Approx(1.988273).epsilon(1e-5));
  CHECK(ci.level == doctest::Approx(0.95));
  CHECK(ci.method == CiMethod::window);
  CHECK_FALSE(ci.width_mode.has_value());
  CHECK(ci.quantile_used == doctest::Approx(1.959964).epsilon(1e-6));
}

TEST_CASE("window interval width vanishes as kappa -> 1") {
  const ConfidenceInterval ci = ci_window(make_traj({1, 2, 2}), 0.5, 1.0 - 1e-9);
  CHECK(ci.hi - ci.lo < 1e-8);
  CHECK_THROWS_AS(ci_window(make_traj({1, 2, 2}), 0.5, 0.0), DomainError);
  CHECK_THROWS_AS(ci_window(make_traj({1, 2, 2}), 0.5, 1.0), DomainError);
  CHECK_THROWS_AS(ci_window(make_traj({1, 2, 2}), 0.0, 0.05), DomainError);
}

TEST_CASE("single-transition interval hand values") {
  const ConfidenceInterval der = ci_single(4, 8, 0.5, 0.05, WidthMode::derived);
  CHECK(der.lo == doctest::Approx(1.510010).epsilon(1e-5));
  CHECK(der.hi == doctest::Approx(2.489990).epsilon(1e-5));
  CHECK(der.width_mode == WidthMode::derived);

  const ConfidenceInterval lit = ci_single(4, 8, 0.5, 0.05, WidthMode::literal);
  CHECK(lit.lo == doctest::Approx(1.755005).epsilon(1e-5));
  CHECK(lit.hi == doctest::Approx(2.244995).epsilon(1e-5));

  // Z_n = 1: the two modes coincide.
  const ConfidenceInterval d1 = ci_single(1, 2, 0.5, 0.05, WidthMode::derived);
  const ConfidenceInterval l1 = ci_single(1, 2, 0.5, 0.05, WidthMode::literal);
  CHECK(d1.lo == l1.lo);
  CHECK(d1.hi == l1.hi);

  CHECK_THROWS_AS(ci_single(0, 2, 0.5, 0.05), ZeroPopulationError);
}

TEST_CASE("literal-mode half-width is derived / sqrt(Z_n) exactly") {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t z = 1 + rng() % 10'000;
    const std::uint64_t znext = 1 + rng() % 30'000;
    const ConfidenceInterval der = ci_single(z, znext, 0.7, 0.1, WidthMode::derived);
    const ConfidenceInterval lit = ci_single(z, znext, 0.7, 0.1, WidthMode::literal);
    const double half_der = 0.5 * (der.hi - der.lo);
    const double half_lit = 0.5 * (lit.hi - lit.lo);
    CHECK(half_lit == doctest::Approx(half_der / std::sqrt(static_cast<double>(z)))
                          .epsilon(1e-12));
    CHECK(half_lit <= half_der);
  }
}

TEST_CASE("interval membership is the pivot event") {
  Rng rng(41);
  const OffspringLaw law = OffspringLaw::binary(0.5, 0.5);
  const double m = law.mean();
  const double v = std::sqrt(law.variance());
  for (const double kappa : {0.05, 0.3}) {
    const double q = static_cast<double>(phi_quantile(1.0L - static_cast<long double>(kappa) / 2.0L));
    for (int i = 0; i < 250; ++i) {
      const std::size_t n = 2 + rng() % 14;
      const Trajectory traj = simulate(law, 0, n, rng);
      const WindowStat ws = h_statistic(traj, m, v);
      if (std::fabs(std::fabs(ws.h_value) - q) > 1e-9) {
        CHECK(ci_window(traj, v, kappa).contains(m) == (std::fabs(ws.h_value) <= q));
      }
      const std::size_t last = traj.values.size() - 1;
      const double r = r_statistic(traj.values[last - 1], traj.values[last], m, v);
      if (std::fabs(std::fabs(r) - q) > 1e-9) {
        CHECK(ci_single(traj.values[last - 1], traj.values[last], v, kappa).contains(m) ==
              (std::fabs(r) <= q));
      }
    }
  }
}

TEST_CASE("window width shrinks with larger observed populations") {
  const ConfidenceInterval small = ci_window(make_traj({1, 2, 2}), 0.5, 0.05);
  const ConfidenceInterval large = ci_window(make_traj({100, 150, 220}), 0.5, 0.05);
  CHECK(large.hi - large.lo < small.hi - small.lo);
}

TEST_CASE("kappa validity diagnostics") {
  const KappaDiagnostic a = validate_kappa(0.05, 1000, KappaRegime::window);
  CHECK(a.abs_log_kappa == doctest::Approx(2.9957).epsilon(1e-4));
  CHECK(a.scale == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(a.ratio == doctest::Approx(0.29957).epsilon(1e-4));
  CHECK_FALSE(a.warn);

  // kappa = e^{-n}: ratio = n^{2/3} >= 1.
  const KappaDiagnostic b = validate_kappa(std::exp(-8.0), 8, KappaRegime::window);
  CHECK(b.ratio == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(b.warn);

  const KappaDiagnostic c = validate_kappa(0.05, 1, KappaRegime::window);
  CHECK(c.ratio == doctest::Approx(2.9957).epsilon(1e-4));
  CHECK(c.warn);

  const KappaDiagnostic d = validate_kappa(0.05, 1000, KappaRegime::single, 1.0 / 6.0);
  CHECK(d.scale == doctest::Approx(10.0).epsilon(1e-9));
  CHECK_FALSE(d.warn);

  CHECK_THROWS_AS(validate_kappa(0.05, 10, KappaRegime::single, 0.0), DomainError);
  CHECK_THROWS_AS(validate_kappa(0.0, 10, KappaRegime::window), DomainError);
}
