#pragma once

// Dispatch over the two system kinds, and the regime report that needs the
// active system's decoherence length.

#include <cmath>

#include "decohist/core.hpp"
#include "decohist/free_particle.hpp"
#include "decohist/oscillator.hpp"

namespace decohist {

struct SystemConstants {
  double M_eff = 0.0;
  double ell = 0.0;
  double gT = 0.0;  // equals g for the free particle
};

inline SystemConstants system_constants(const SystemParams& p) {
  if (p.kind == SystemKind::free) {
    const auto d = free_particle::derived_constants(p);
    return {d.M_eff, d.ell, p.g};
  }
  const auto d = oscillator::derived_constants(p);
  return {d.M_eff, d.ell, d.gT};
}

inline QuadraticKernel system_kernel(const SystemParams& p) {
  return p.kind == SystemKind::free ? free_particle::kernel(p) : oscillator::kernel(p);
}

inline double system_length_Z(const SystemParams& p, const Endpoints& ep) {
  return p.kind == SystemKind::free ? free_particle::length_Z(p, ep)
                                    : oscillator::length_Z(p, ep);
}

inline cplx system_propagator(const SystemParams& p, const Endpoints& ep) {
  return p.kind == SystemKind::free ? free_particle::propagator(p, ep)
                                    : oscillator::propagator(p, ep);
}

inline cplx system_class_op_element(const SystemParams& p, const CoarseGraining& cg, int alpha,
                                    const Endpoints& ep) {
  return p.kind == SystemKind::free ? free_particle::class_op_element(p, cg, alpha, ep)
                                    : oscillator::class_op_element(p, cg, alpha, ep);
}

inline double system_reduced_action(const SystemParams& p, double k, double P,
                                    const Endpoints& ep) {
  return p.kind == SystemKind::free ? free_particle::reduced_action_SPk(p, k, P, ep)
                                    : oscillator::reduced_action_SPk(p, k, P, ep);
}

inline constexpr double regime_threshold = 10.0;

struct RegimeReport {
  double t_spread = 0.0;   // d^2 m / (2 hbar)
  double ell = 0.0;
  double delta_over_ell = 0.0;
  double d_over_ell = 0.0;
  bool classical = false;
};

/// Classical when delta/l and d/l both reach the threshold and delta > d.
inline RegimeReport regime_report(const SystemParams& p, const GaussianState& particle,
                                  const CoarseGraining& cg) {
  RegimeReport r;
  r.t_spread = particle.width * particle.width * p.m / (2.0 * p.hbar);
  r.ell = system_constants(p).ell;
  r.delta_over_ell = cg.delta / r.ell;
  r.d_over_ell = particle.width / r.ell;
  r.classical = r.delta_over_ell >= regime_threshold && r.d_over_ell >= regime_threshold &&
                cg.delta > particle.width;
  return r;
}

}  // namespace decohist
