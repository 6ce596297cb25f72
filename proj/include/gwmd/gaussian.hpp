#pragma once

// Standard normal kernel: CDF, quantile, the tail quantile expansion, and a
// two-sided tail sandwich.
//
// Everything here computes in long double. The reason is resolution, not
// accuracy: near p = 1 the spacing of double values is 2^-53 in absolute
// terms, which at x ~ 6 corresponds to a quantile uncertainty of
// 2^-54 / phi(6) ~ 9e-9. Quantile/CDF round-trips at 1e-9 tolerance are
// therefore impossible in double but comfortable in 64-bit-mantissa long
// double (~5e-12 worst case over |x| <= 6).

#include <cmath>

#include "gwmd/errors.hpp"

namespace gwmd {

inline constexpr long double kSqrt2 = 1.41421356237309504880168872420969808L;
inline constexpr long double kSqrt2Pi = 2.50662827463100050241576528481104525L;
inline constexpr long double kSqrtPi = 1.77245385090551602729816748334114518L;
inline constexpr long double kLn2Pi = 1.83787706640934548356065947281123527L;

/// Standard normal density.
inline long double phi_pdf(long double x) {
  return expl(-0.5L * x * x) / kSqrt2Pi;
}

/// Standard normal distribution function, full relative accuracy in both
/// tails via erfc.
inline long double phi_cdf(long double x) {
  return 0.5L * erfcl(-x / kSqrt2);
}

/// Upper-tail quantile expansion: for small p,
///   Phi^{-1}(1 - p) ~ sqrt(ln(1/p^2) - ln ln(1/p^2) - ln(2 pi)).
/// The dropped remainder is o(p), so the relative error vanishes as p -> 0;
/// this is an approximation, not an inverse.
inline long double quantile_expansion(long double p) {
  if (!(p > 0.0L && p <= 0.1L)) {
    throw DomainError("quantile_expansion: p must lie in (0, 0.1]");
  }
  const long double ln_inv_p2 = -2.0L * logl(p);
  const long double radicand = ln_inv_p2 - logl(ln_inv_p2) - kLn2Pi;
  if (!(radicand > 0.0L)) {
    throw DomainError("quantile_expansion: radicand not positive");
  }
  return sqrtl(radicand);
}

/// Phi^{-1}(p) for p in (0,1): seeded by the tail expansion (or a central
/// series), then Newton-refined against phi_cdf. |Phi(result) - p| <= 1e-12.
inline long double phi_quantile(long double p) {
  if (!(p > 0.0L && p < 1.0L)) throw DomainError("phi_quantile: p must lie in (0,1)");
  if (p == 0.5L) return 0.0L;
  // Work in the lower tail: solve Phi(x) = pl for pl <= 1/2, flip at the end.
  const bool upper = p > 0.5L;
  const long double pl = upper ? 1.0L - p : p;

  long double x;
  if (pl <= 0.1L) {
    x = -quantile_expansion(pl);
  } else {
    // Central series Phi^{-1}(1/2 + u) = sqrt(2 pi) u + ... ; a rough seed
    // is enough for Newton here.
    const long double u = pl - 0.5L;
    x = kSqrt2Pi * u * (1.0L + (3.14159265358979323846L / 6.0L) * kSqrt2Pi * u * u);
  }

  // Two log-domain Newton steps stabilize the tail, then plain Newton
  // finishes to machine tolerance.
  for (int i = 0; i < 2; ++i) {
    const long double cdf = phi_cdf(x);
    x -= (logl(cdf) - logl(pl)) * cdf / phi_pdf(x);
  }
  for (int i = 0; i < 8; ++i) {
    const long double step = (phi_cdf(x) - pl) / phi_pdf(x);
    x -= step;
    if (fabsl(step) <= 1e-18L * (1.0L + fabsl(x))) break;
  }
  return upper ? -x : x;
}

/// Two-sided bound on the upper tail:
///   e^{-x^2/2} / (sqrt(2 pi)(1+x)) <= 1 - Phi(x) <= e^{-x^2/2} / (sqrt(pi)(1+x)).
struct TailSandwich {
  long double x;
  long double lower;
  long double upper;
};

inline TailSandwich tail_sandwich(long double x) {
  if (!(x >= 0.0L)) throw DomainError("tail_sandwich: x must be >= 0");
  const long double common = expl(-0.5L * x * x) / (1.0L + x);
  return {x, common / kSqrt2Pi, common / kSqrtPi};
}

}  // namespace gwmd
