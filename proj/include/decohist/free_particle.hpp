#pragma once

// Free particle coupled to the pointer through (g/T) x P: effective pointer
// mass, decoherence length, classical paths and the exact class operators.

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "decohist/core.hpp"

namespace decohist::free_particle {

struct FreeDerived {
  double M_eff = 0.0;  // coupling-renormalized pointer mass
  double ell = 0.0;    // width of the smoothed window
};

struct ClassicalSolution {
  std::vector<double> t;
  std::vector<double> x;      // particle path
  std::vector<double> x_dot;
  std::vector<double> X;      // pointer path
  std::vector<double> X_dot;
  double X0T = 0.0;           // M_eff/M [X - X' - g (x + x')/2]
  double S_cl = 0.0;
  double xbar_cl = 0.0;
};

inline void require_free(const SystemParams& p) {
  if (p.kind != SystemKind::free) throw KindError("free_particle: parameters describe an oscillator");
  p.validate();
}

inline FreeDerived derived_constants(const SystemParams& p) {
  require_free(p);
  FreeDerived d;
  d.M_eff = p.M / (1.0 + p.g * p.g * p.M / (12.0 * p.m));
  d.ell = std::sqrt(p.hbar * p.T / (6.0 * p.m) * d.M_eff / p.M);
  return d;
}

/// X - X' - g (x + x')/2, the pointer displacement left after the mean shift.
inline double pointer_excess(const SystemParams& p, const Endpoints& ep) {
  return ep.X_out - ep.X_in - p.g * 0.5 * (ep.x_out + ep.x_in);
}

inline double length_Z(const SystemParams& p, const Endpoints& ep) {
  const FreeDerived d = derived_constants(p);
  const double s = 0.5 * (ep.x_out + ep.x_in);
  return p.g * d.M_eff / (12.0 * p.m) * pointer_excess(p, ep) + s;
}

inline double classical_action(const SystemParams& p, const Endpoints& ep) {
  const FreeDerived d = derived_constants(p);
  const double dx = ep.x_out - ep.x_in;
  const double w = pointer_excess(p, ep);
  return (0.5 * p.m * dx * dx + 0.5 * d.M_eff * w * w) / p.T;
}

/// Amplitude sqrt(m M_eff) / (2 pi i hbar T); 1/i taken as exp(-i pi/2).
inline cplx amplitude(const SystemParams& p) {
  const FreeDerived d = derived_constants(p);
  return std::sqrt(p.m * d.M_eff) / (2.0 * std::numbers::pi * p.hbar * p.T) * cplx{0.0, -1.0};
}

inline cplx propagator(const SystemParams& p, const Endpoints& ep) {
  return amplitude(p) * std::exp(cplx{0.0, classical_action(p, ep) / p.hbar});
}

/// Samples the closed-form classical path on n_samples uniform times in [0, T].
inline ClassicalSolution classical_solution(const SystemParams& p, const Endpoints& ep,
                                            int n_samples) {
  if (n_samples < 2) throw ParameterError("classical_solution: n_samples must be >= 2");
  const FreeDerived d = derived_constants(p);
  ClassicalSolution sol;
  sol.X0T = pointer_excess(p, ep) * d.M_eff / p.M;
  const double T = p.T;
  const double b = p.g * p.M / (2.0 * p.m) * sol.X0T;  // curvature term
  const double v = ep.x_out - ep.x_in + b;

  sol.t.resize(n_samples);
  sol.x.resize(n_samples);
  sol.x_dot.resize(n_samples);
  sol.X.resize(n_samples);
  sol.X_dot.resize(n_samples);
  for (int j = 0; j < n_samples; ++j) {
    const double t = (j == n_samples - 1) ? T : T * j / (n_samples - 1);
    const double tau = t / T;
    sol.t[j] = t;
    sol.x[j] = ep.x_in + v * tau - b * tau * tau;
    sol.x_dot[j] = (v - 2.0 * b * tau) / T;
    // integral of x_cl from 0 to t, for the pointer path
    const double area = T * (ep.x_in * tau + 0.5 * v * tau * tau - b * tau * tau * tau / 3.0);
    sol.X[j] = ep.X_in + p.g / T * area + sol.X0T * tau;
    sol.X_dot[j] = p.g / T * sol.x[j] + sol.X0T / T;
  }
  sol.x.back() = ep.x_out;
  sol.X.back() = ep.X_out;
  sol.S_cl = classical_action(p, ep);
  sol.xbar_cl = 0.5 * (ep.x_out + ep.x_in) +
                p.g / (12.0 * p.m) * d.M_eff * pointer_excess(p, ep);
  return sol;
}

/// Lagrangian m/2 xdot^2 + M/2 (Xdot - g x / T)^2.
inline double lagrangian(const SystemParams& p, double x, double x_dot, double X_dot) {
  const double r = X_dot - p.g * x / p.T;
  return 0.5 * p.m * x_dot * x_dot + 0.5 * p.M * r * r;
}

/// Classical action of the reduced particle problem with constant force
/// (hbar k - g P)/T, i.e. the exponent of the reduced propagator.
inline double reduced_action_SPk(const SystemParams& p, double k, double P, const Endpoints& ep) {
  require_free(p);
  const double J = p.hbar * k - p.g * P;
  const double dx = ep.x_out - ep.x_in;
  return p.m * dx * dx / (2.0 * p.T) + 0.5 * J * (ep.x_out + ep.x_in) -
         J * J * p.T / (24.0 * p.m);
}

inline QuadraticKernel kernel(const SystemParams& p) {
  const FreeDerived d = derived_constants(p);
  QuadraticKernel k;
  k.hbar = p.hbar;
  k.T = p.T;
  k.amplitude = amplitude(p);
  k.a_out = p.m / (2.0 * p.T);
  k.a_cross = -p.m / p.T;
  k.a_in = p.m / (2.0 * p.T);
  k.pointer_mass = d.M_eff;
  k.pointer_shift = p.g;
  const double c = p.g * d.M_eff / (12.0 * p.m);
  k.z_mean = 1.0 - c * p.g;
  k.z_pointer = c;
  k.ell = d.ell;
  return k;
}

inline cplx class_op_element(const SystemParams& p, const CoarseGraining& cg, int alpha,
                             const Endpoints& ep) {
  const FreeDerived d = derived_constants(p);
  return propagator(p, ep) * window_E(length_Z(p, ep), d.ell, cg, alpha);
}

}  // namespace decohist::free_particle
