#pragma once

// Complex error function.
//
// erf(z) for z in the closed first quadrant is evaluated either by its Taylor
// series (|z| < 1) or as 1 - exp(-z^2) w(iz), where the Faddeeva function w is
// computed with the pole-corrected trapezoid rule of Matta & Reichel (step
// h = 1/2, aliasing error ~ exp(-pi^2/h^2) ~ 1e-17).  The remaining quadrants
// follow from erf(-z) = -erf(z) and erf(conj z) = conj erf(z), applied exactly.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "decohist/errors.hpp"

namespace decohist::specfun {

using cplx = std::complex<double>;

inline constexpr double cerf_domain_radius = 50.0;
/// Largest y^2 - x^2 for which |erf(x + iy)| stays representable.
inline constexpr double cerf_overflow_exponent = 700.0;

namespace detail {

inline constexpr double trapezoid_step = 0.5;
inline constexpr int trapezoid_terms = 14;

struct TrapezoidWeights {
  std::array<double, trapezoid_terms + 1> whole{};  // exp(-(n h)^2), n = 0..N
  std::array<double, trapezoid_terms + 1> half{};   // exp(-((n + 1/2) h)^2)
  TrapezoidWeights() {
    for (int n = 0; n <= trapezoid_terms; ++n) {
      const double t = n * trapezoid_step;
      const double th = (n + 0.5) * trapezoid_step;
      whole[n] = std::exp(-t * t);
      half[n] = std::exp(-th * th);
    }
  }
};

inline const TrapezoidWeights& trapezoid_weights() {
  static const TrapezoidWeights w;
  return w;
}

}  // namespace detail

/// Faddeeva function w(z) = exp(-z^2) erfc(-iz) for Im z >= 0.
inline cplx faddeeva_upper(cplx z) {
  using std::numbers::pi;
  constexpr double h = detail::trapezoid_step;
  const auto& tw = detail::trapezoid_weights();
  const cplx z2 = z * z;

  const auto node_sum = [&](bool half_nodes) {
    // pairs of nodes +-t combine into 2z / (z^2 - t^2)
    cplx acc = half_nodes ? cplx{0.0} : cplx{1.0} / z;
    for (int n = half_nodes ? 0 : 1; n <= detail::trapezoid_terms; ++n) {
      const double t = (half_nodes ? n + 0.5 : double(n)) * h;
      const double w = half_nodes ? tw.half[n] : tw.whole[n];
      acc += w * 2.0 * z / (z2 - t * t);
    }
    return cplx{0.0, h / pi} * acc;
  };

  if (z.imag() >= pi / h) return node_sum(false);

  const cplx e = std::exp(cplx{0.0, -2.0 * pi / h} * z);
  const cplx d_whole = 1.0 - e;
  const cplx d_half = 1.0 + e;
  const cplx pole = 2.0 * std::exp(-z2);
  // use the node set farther from z so the pole correction does not cancel
  if (std::abs(d_whole) >= std::abs(d_half)) return node_sum(false) + pole / d_whole;
  return node_sum(true) + pole / d_half;
}

namespace detail {

inline cplx erf_first_quadrant(cplx z) {
  if (std::abs(z) < 1.0) {
    const cplx z2 = z * z;
    cplx term = z;
    cplx sum = z;
    for (int n = 1; n < 40; ++n) {
      term *= -z2 / double(n);
      const cplx c = term / double(2 * n + 1);
      sum += c;
      if (std::abs(c) < 1e-17 * std::abs(sum)) break;
    }
    return sum * (2.0 / std::sqrt(std::numbers::pi));
  }
  return 1.0 - std::exp(-z * z) * faddeeva_upper(cplx{-z.imag(), z.real()});
}

inline cplx reflect(cplx z, cplx first_quadrant_value) {
  const bool neg_re = std::signbit(z.real());
  const bool neg_im = std::signbit(z.imag());
  cplx v = (neg_re != neg_im) ? std::conj(first_quadrant_value) : first_quadrant_value;
  return neg_re ? -v : v;
}

}  // namespace detail

/// Complex error function on |z| <= 50.
///
/// Throws DomainError outside that disc, and where |erf z| would overflow
/// (Im(z)^2 - Re(z)^2 > 700).
inline cplx cerf(cplx z) {
  const double x = z.real(), y = z.imag();
  if (!std::isfinite(x) || !std::isfinite(y) || std::abs(z) > cerf_domain_radius)
    throw DomainError("cerf: |z| exceeds the accuracy domain radius 50");
  if (y * y - x * x > cerf_overflow_exponent)
    throw DomainError("cerf: result overflows (Im(z)^2 - Re(z)^2 > 700)");
  const cplx q{std::abs(x), std::abs(y)};
  return detail::reflect(z, detail::erf_first_quadrant(q));
}

/// Radius from which the asymptotic erfc series is used for window arguments.
inline constexpr double asymptotic_radius = 8.0;

/// erf(z) for |z| >= 8 in the sectors |arg(+-z)| <= pi/4, from the
/// asymptotic expansion of erfc.  These are the only large arguments the
/// smoothed interval windows produce (z = real / (sqrt(i) l)).  In this
/// sector the remainder is bounded by the first omitted term, and at |z| = 8
/// the terms fall below 1e-17 before they start to grow.
inline cplx erf_far(cplx z) {
  const bool neg = z.real() < 0.0;
  const cplx q = neg ? -z : z;
  if (std::abs(q) < asymptotic_radius || std::abs(q.imag()) > q.real() * (1.0 + 1e-12))
    throw DomainError("erf_far: argument outside the asymptotic sector");
  const cplx inv2 = 1.0 / (2.0 * q * q);
  cplx series = 1.0;
  cplx term = 1.0;
  for (int k = 1; k <= 40; ++k) {
    term *= -double(2 * k - 1) * inv2;
    series += term;
    if (std::abs(term) < 1e-17) break;
  }
  const cplx erfc = std::exp(-q * q) / (q * std::sqrt(std::numbers::pi)) * series;
  return neg ? erfc - 1.0 : 1.0 - erfc;
}

}  // namespace decohist::specfun
