#pragma once

// Harmonic oscillator coupled to the pointer. Closed forms for g(T), the
// effective mass, Z and l, the classical path, and an action obtained by
// Romberg integration of the Lagrangian along that path.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "decohist/core.hpp"

namespace decohist::oscillator {

struct OscDerived {
  double gT = 0.0;      // renormalized coupling (2g/wT) tan(wT/2)
  double M_eff = 0.0;
  double ell = 0.0;
  cplx A{};             // sqrt(m w / (2 pi i hbar sin wT))
  double excess = 0.0;  // (g(T)/g - 1) / (wT)^2, finite as wT -> 0
};

struct OscClassicalSolution {
  std::vector<double> t;
  std::vector<double> x;
  std::vector<double> x_dot;
  std::vector<double> X;
  std::vector<double> X_dot;
  double S_cl = 0.0;
  double xbar_cl = 0.0;
};

/// ((2/u) tan(u/2) - 1) / u^2, by its Taylor series near 0 where the direct
/// formula cancels.
inline double tan_excess(double u) {
  if (std::abs(u) < 0.05) {
    const double y2 = 0.25 * u * u;
    return 0.25 * (1.0 / 3.0 +
                   y2 * (2.0 / 15.0 +
                         y2 * (17.0 / 315.0 + y2 * (62.0 / 2835.0 + y2 * (1382.0 / 155925.0)))));
  }
  return ((2.0 / u) * std::tan(0.5 * u) - 1.0) / (u * u);
}

inline void require_oscillator(const SystemParams& p) {
  if (p.kind != SystemKind::oscillator)
    throw KindError("oscillator: parameters describe a free particle");
  p.validate();
  if (p.omega * p.T >= std::numbers::pi)
    throw CausticError("oscillator: omega T must lie in (0, pi)");
}

inline OscDerived derived_constants(const SystemParams& p) {
  require_oscillator(p);
  const double u = p.omega * p.T;
  OscDerived d;
  d.excess = tan_excess(u);
  d.gT = p.g * (1.0 + u * u * d.excess);
  d.M_eff = p.M / (1.0 + p.g * p.g * p.M * d.excess / p.m);
  const double ell2 = 2.0 * p.hbar * p.T / p.m * d.excess * d.M_eff / p.M;
  if (!(ell2 > 0.0)) throw CausticError("oscillator: l^2 must be positive");
  d.ell = std::sqrt(ell2);
  const double mag = std::sqrt(p.m * p.omega / (2.0 * std::numbers::pi * p.hbar * std::sin(u)));
  d.A = mag * std::conj(sqrt_i);
  return d;
}

/// X - X' - g(T) (x + x')/2.
inline double pointer_excess(const OscDerived& d, const Endpoints& ep) {
  return ep.X_out - ep.X_in - d.gT * 0.5 * (ep.x_out + ep.x_in);
}

inline double length_Z(const SystemParams& p, const Endpoints& ep) {
  const OscDerived d = derived_constants(p);
  const double u = p.omega * p.T;
  const double rho = 1.0 + u * u * d.excess;  // tan(u/2) / (u/2)
  const double kappa = p.g * d.M_eff * d.excess / p.m;
  return rho * 0.5 * (ep.x_out + ep.x_in) + kappa * pointer_excess(d, ep);
}

namespace detail {

struct PathCoefficients {
  double omega, T, sin_u, tan_half, x_in, chord, Q, g, pointer_rate;

  PathCoefficients(const SystemParams& p, const OscDerived& d, const Endpoints& ep) {
    const double u = p.omega * p.T;
    omega = p.omega;
    T = p.T;
    sin_u = std::sin(u);
    tan_half = std::tan(0.5 * u);
    x_in = ep.x_in;
    chord = ep.x_out - ep.x_in * std::cos(u);
    const double w = pointer_excess(d, ep);
    Q = p.g * d.M_eff * w / (p.m * u * u);
    g = p.g;
    pointer_rate = d.M_eff * w / (p.M * p.T);
  }

  double x(double t) const {
    const double wt = omega * t;
    const double s = std::sin(0.5 * wt);
    return x_in * std::cos(wt) + chord * std::sin(wt) / sin_u +
           Q * (tan_half * std::sin(wt) - 2.0 * s * s);
  }
  double x_dot(double t) const {
    const double wt = omega * t;
    return omega * (-x_in * std::sin(wt) + chord * std::cos(wt) / sin_u +
                    Q * (tan_half * std::cos(wt) - std::sin(wt)));
  }
  /// Integral of x from 0 to t.
  double x_area(double t) const {
    const double wt = omega * t;
    const double s = std::sin(0.5 * wt);
    const double one_minus_cos = 2.0 * s * s;
    return (x_in * std::sin(wt) + chord * one_minus_cos / sin_u +
            Q * (tan_half * one_minus_cos - (wt - std::sin(wt)))) /
           omega;
  }
  double X_dot(double t) const { return g / T * x(t) + pointer_rate; }
};

}  // namespace detail

/// Lagrangian m/2 xdot^2 - m w^2 x^2 / 2 + M/2 (Xdot - g x / T)^2.
inline double lagrangian(const SystemParams& p, double x, double x_dot, double X_dot) {
  const double r = X_dot - p.g * x / p.T;
  return 0.5 * p.m * (x_dot * x_dot - p.omega * p.omega * x * x) + 0.5 * p.M * r * r;
}

/// Action along the classical path by Romberg extrapolation of the trapezoid
/// rule; stops when successive estimates agree to 1e-9 of the action scale.
inline double classical_action(const SystemParams& p, const Endpoints& ep) {
  const OscDerived d = derived_constants(p);
  const detail::PathCoefficients path(p, d, ep);
  const auto L = [&](double t) { return lagrangian(p, path.x(t), path.x_dot(t), path.X_dot(t)); };
  const auto absL = [&](double t) { return std::abs(L(t)); };

  constexpr int max_levels = 18;
  std::vector<double> prev, cur;
  double h = p.T;
  double trap = 0.5 * h * (L(0.0) + L(p.T));
  double scale = 0.5 * h * (absL(0.0) + absL(p.T));
  prev.push_back(trap);
  for (int level = 1; level <= max_levels; ++level) {
    const int added = 1 << (level - 1);
    double sum = 0.0, abs_sum = 0.0;
    for (int j = 0; j < added; ++j) {
      const double t = (2 * j + 1) * 0.5 * h;
      const double v = L(t);
      sum += v;
      abs_sum += std::abs(v);
    }
    trap = 0.5 * trap + 0.5 * h * sum;
    scale = 0.5 * scale + 0.5 * h * abs_sum;
    h *= 0.5;
    cur.assign(1, trap);
    double factor = 1.0;
    for (int k = 1; k <= level; ++k) {
      factor *= 4.0;
      cur.push_back(cur[k - 1] + (cur[k - 1] - prev[k - 1]) / (factor - 1.0));
    }
    const double change = std::abs(cur[level] - prev[level - 1]);
    if (level >= 3 && change <= 1e-9 * std::max(std::abs(cur[level]), scale)) return cur[level];
    prev.swap(cur);
  }
  return prev.back();
}

/// Time average of the classical path in closed form.
inline double xbar_classical(const SystemParams& p, const Endpoints& ep) {
  const OscDerived d = derived_constants(p);
  const double u = p.omega * p.T;
  const double c = (1.0 - std::cos(u)) / (u * std::sin(u));
  return c * (ep.x_out + ep.x_in) +
         p.g * d.M_eff / (p.m * u * u) * pointer_excess(d, ep) * (u * u * d.excess);
}

inline OscClassicalSolution classical_solution(const SystemParams& p, const Endpoints& ep,
                                               int n_samples) {
  if (n_samples < 2) throw ParameterError("classical_solution: n_samples must be >= 2");
  const OscDerived d = derived_constants(p);
  const detail::PathCoefficients path(p, d, ep);
  OscClassicalSolution sol;
  sol.t.resize(n_samples);
  sol.x.resize(n_samples);
  sol.x_dot.resize(n_samples);
  sol.X.resize(n_samples);
  sol.X_dot.resize(n_samples);
  for (int j = 0; j < n_samples; ++j) {
    const double t = (j == n_samples - 1) ? p.T : p.T * j / (n_samples - 1);
    sol.t[j] = t;
    sol.x[j] = path.x(t);
    sol.x_dot[j] = path.x_dot(t);
    sol.X[j] = ep.X_in + p.g / p.T * path.x_area(t) + path.pointer_rate * t;
    sol.X_dot[j] = path.X_dot(t);
  }
  sol.x.front() = ep.x_in;
  sol.x.back() = ep.x_out;
  sol.X.back() = ep.X_out;
  sol.S_cl = classical_action(p, ep);
  sol.xbar_cl = xbar_classical(p, ep);
  return sol;
}

/// sqrt[(m w / 2 pi i hbar sin wT) (M_eff / 2 pi i hbar T)].
inline cplx amplitude(const SystemParams& p) {
  const OscDerived d = derived_constants(p);
  return d.A * std::sqrt(d.M_eff / (2.0 * std::numbers::pi * p.hbar * p.T)) * std::conj(sqrt_i);
}

inline cplx propagator(const SystemParams& p, const Endpoints& ep) {
  return amplitude(p) * std::exp(cplx{0.0, classical_action(p, ep) / p.hbar});
}

/// Classical action of the reduced oscillator with constant force (hbar k - g P)/T.
inline double reduced_action_SPk(const SystemParams& p, double k, double P, const Endpoints& ep) {
  require_oscillator(p);
  const double w = p.omega, T = p.T, u = w * T, m = p.m;
  const double J = p.hbar * k - p.g * P;
  const double x = ep.x_out, xp = ep.x_in;
  const double sn = std::sin(u), cs = std::cos(u);
  const double half = std::sin(0.5 * u);
  const double one_minus_cos = 2.0 * half * half;
  // (1 - cos u)/w^2 - T sin(u)/(2w), written without the small-u cancellation
  const double quad = 0.5 * T * T * sn * u * tan_excess(u);
  return m * w / (2.0 * sn) *
         ((x * x + xp * xp) * cs - 2.0 * x * xp +
          2.0 / (m * w * T) * J * one_minus_cos / w * (x + xp) -
          2.0 / (m * m * w * w * T * T) * J * J * quad);
}

/// The factorized closed form K = amplitude exp(i S / hbar) with S written as
/// a particle part plus (M_eff / 2T)(X - X' - g(T) s)^2, obtained by doing the
/// reduced P integral analytically.
inline QuadraticKernel kernel(const SystemParams& p) {
  const OscDerived d = derived_constants(p);
  const double u = p.omega * p.T;
  const double sn = std::sin(u);
  QuadraticKernel k;
  k.hbar = p.hbar;
  k.T = p.T;
  k.amplitude = amplitude(p);
  k.a_out = p.m * p.omega * std::cos(u) / (2.0 * sn);
  k.a_in = k.a_out;
  k.a_cross = -p.m * p.omega / sn;
  k.pointer_mass = d.M_eff;
  k.pointer_shift = d.gT;
  const double rho = 1.0 + u * u * d.excess;
  const double kappa = p.g * d.M_eff * d.excess / p.m;
  k.z_mean = rho - kappa * d.gT;
  k.z_pointer = kappa;
  k.ell = d.ell;
  return k;
}

inline cplx class_op_element(const SystemParams& p, const CoarseGraining& cg, int alpha,
                             const Endpoints& ep) {
  const OscDerived d = derived_constants(p);
  return propagator(p, ep) * window_E(length_Z(p, ep), d.ell, cg, alpha);
}

}  // namespace decohist::oscillator
