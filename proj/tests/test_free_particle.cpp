#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>

#include "decohist/free_particle.hpp"
#include "decohist/oracle.hpp"
#include "oracles.hpp"

using namespace decohist;
namespace fp = decohist::free_particle;

namespace {

SystemParams free_params(double m, double M, double g, double T, double hbar) {
  SystemParams p;
  p.kind = SystemKind::free;
  p.m = m;
  p.M = M;
  p.g = g;
  p.T = T;
  p.hbar = hbar;
  return p;
}

Endpoints random_endpoints(std::mt19937_64& g, double r = 2.0) {
  return {oracles::uniform(g, -r, r), oracles::uniform(g, -r, r), oracles::uniform(g, -r, r),
          oracles::uniform(g, -r, r)};
}

SystemParams random_params(std::mt19937_64& g) {
  return free_params(oracles::uniform(g, 0.5, 2.0), oracles::uniform(g, 0.5, 8.0),
                     oracles::uniform(g, -1.5, 1.5), oracles::uniform(g, 0.5, 2.0),
                     oracles::uniform(g, 0.2, 1.5));
}

cplx free_kernel(double mass, double dx, double T, double hbar) {
  return std::sqrt(mass / (2.0 * std::numbers::pi * imag_unit * hbar * T)) *
         std::exp(imag_unit * mass * dx * dx / (2.0 * hbar * T));
}

CoarseGraining unit_cg(double delta) {
  CoarseGraining cg;
  cg.delta = delta;
  cg.alpha_min = -1000;
  cg.alpha_max = 1000;
  return cg;
}

}  // namespace

TEST_CASE("free derived constants", "[free]") {
  CHECK(fp::derived_constants(free_params(1, 3, 0, 1, 1)).M_eff == 3.0);
  CHECK(std::abs(fp::derived_constants(free_params(1, 12, 1, 1, 1)).M_eff - 6.0) < 1e-15);
  CHECK(std::abs(fp::derived_constants(free_params(1, 1, 0, 6, 1)).ell - 1.0) < 1e-15);
  SystemParams osc = free_params(1, 1, 0, 1, 1);
  osc.kind = SystemKind::oscillator;
  osc.omega = 1.0;
  CHECK_THROWS_AS(fp::derived_constants(osc), KindError);
  auto& g = oracles::rng();
  for (int i = 0; i < 100; ++i) {
    const auto d = fp::derived_constants(random_params(g));
    CHECK(d.ell > 0.0);
  }
}

TEST_CASE("free Z examples and identity with the classical average", "[free]") {
  const SystemParams p = free_params(1.3, 4.0, 0.7, 1.1, 0.8);
  CHECK(fp::length_Z(p, {0, 0, 0, 0}) == 0.0);
  CHECK(fp::length_Z(free_params(1, 1, 0, 1, 1), {0.0, 2.0, 0.3, -0.4}) == 1.0);

  auto& g = oracles::rng();
  double worst_cl = 0.0, worst_num = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const SystemParams q = random_params(g);
    const Endpoints ep = random_endpoints(g);
    const double Z = fp::length_Z(q, ep);
    const auto sol = fp::classical_solution(q, ep, i < 50 ? 400001 : 3);
    worst_cl = std::max(worst_cl, std::abs(Z - sol.xbar_cl));
    if (i < 50) {
      double avg = 0.0;
      for (std::size_t k = 0; k + 1 < sol.t.size(); ++k)
        avg += 0.5 * (sol.t[k + 1] - sol.t[k]) * (sol.x[k] + sol.x[k + 1]);
      worst_num = std::max(worst_num, std::abs(avg / q.T - Z));
    }
  }
  CHECK(worst_cl < 1e-12);
  CHECK(worst_num < 1e-10);
}

TEST_CASE("free propagator", "[free]") {
  SECTION("zero coupling factorizes") {
    const SystemParams p = free_params(1.7, 2.3, 0.0, 0.9, 0.6);
    const Endpoints ep{0.3, -1.2, 0.8, 2.1};
    const cplx expect = free_kernel(p.m, ep.x_out - ep.x_in, p.T, p.hbar) *
                        free_kernel(p.M, ep.X_out - ep.X_in, p.T, p.hbar);
    CHECK(std::abs(fp::propagator(p, ep) - expect) < 1e-13 * std::abs(expect));
  }
  SECTION("vanishing action") {
    const SystemParams p = free_params(1.0, 5.0, 0.8, 1.0, 1.0);
    const double x = 0.7;
    const Endpoints ep{x, x, 0.0, p.g * x};
    CHECK(fp::classical_action(p, ep) == 0.0);
    CHECK(std::abs(std::arg(fp::propagator(p, ep)) + std::numbers::pi / 2.0) < 1e-15);
  }
  SECTION("agrees with the product form kernel") {
    auto& g = oracles::rng();
    for (int i = 0; i < 100; ++i) {
      const SystemParams p = random_params(g);
      const Endpoints ep = random_endpoints(g);
      const cplx a = fp::propagator(p, ep), b = fp::kernel(p).propagator(ep);
      CHECK(std::abs(a - b) < 1e-12 * std::abs(a));
      CHECK(std::abs(fp::length_Z(p, ep) - fp::kernel(p).Z(ep)) < 1e-12);
    }
  }
  SECTION("agrees with the sliced path integral") {
    // exact kernels per slice: only the trapezoid average carries an error,
    // which falls off as 1/n^2
    const SystemParams p = free_params(1.0, 5.0, 1.0, 1.0, 1.0);
    const Endpoints smooth{0.2, -0.1, 0.0, 0.15};
    const cplx K0 = fp::propagator(p, smooth);
    CHECK(std::abs(oracle::lattice_propagator(p, smooth, 32) - K0) < 1e-2 * std::abs(K0));
    SystemParams decoupled = p;
    decoupled.g = 0.0;
    CHECK(std::abs(oracle::lattice_propagator(decoupled, smooth, 2) - fp::propagator(decoupled, smooth)) <
          1e-13 * std::abs(K0));
    auto& g = oracles::rng();
    for (int i = 0; i < 20; ++i) {
      const SystemParams q = random_params(g);
      const Endpoints ep = random_endpoints(g);
      const cplx K = fp::propagator(q, ep);
      const double e32 = std::abs(oracle::lattice_propagator(q, ep, 32) - K);
      const double e64 = std::abs(oracle::lattice_propagator(q, ep, 64) - K);
      if (e64 < 1e-11 * std::abs(K)) continue;  // coupling too weak to resolve a rate
      CHECK(e32 / e64 > 3.5);
      CHECK(e32 / e64 < 4.5);
    }
  }
}

TEST_CASE("free classical solution", "[free]") {
  SECTION("straight line at zero coupling") {
    const SystemParams p = free_params(1.0, 2.0, 0.0, 2.0, 1.0);
    const Endpoints ep{-1.0, 3.0, 0.5, 0.25};
    const auto sol = fp::classical_solution(p, ep, 11);
    for (std::size_t i = 0; i < sol.t.size(); ++i)
      CHECK(std::abs(sol.x[i] - (ep.x_in + (ep.x_out - ep.x_in) * sol.t[i] / p.T)) < 1e-14);
    CHECK(sol.xbar_cl == 1.0);
    CHECK(oracle::eom_residual(sol, p) < 1e-12);
  }
  SECTION("endpoints, equations of motion and action") {
    auto& g = oracles::rng();
    for (int i = 0; i < 100; ++i) {
      const SystemParams p = random_params(g);
      const Endpoints ep = random_endpoints(g);
      const auto sol = fp::classical_solution(p, ep, 100001);
      CHECK(sol.x.front() == ep.x_in);
      CHECK(sol.x.back() == ep.x_out);
      CHECK(std::abs(sol.X.back() - ep.X_out) < 1e-12);
      CHECK(sol.X.front() == ep.X_in);
      CHECK(oracle::eom_residual(fp::classical_solution(p, ep, 10001), p) < 1e-5);
      const auto diag = oracle::path_diagnostics(sol, p);
      CHECK(std::abs(diag.action - sol.S_cl) < 1e-8 * std::abs(sol.S_cl));
      CHECK(std::abs(diag.xbar - sol.xbar_cl) < 1e-8);
    }
  }
  SECTION("rejects too few samples") {
    CHECK_THROWS_AS(fp::classical_solution(free_params(1, 1, 0, 1, 1), {}, 1), ParameterError);
  }
}

TEST_CASE("free reduced action", "[free]") {
  auto& g = oracles::rng();
  for (int i = 0; i < 50; ++i) {
    const SystemParams p = random_params(g);
    const Endpoints ep = random_endpoints(g);
    const double k = oracles::uniform(g, -3.0, 3.0), P = oracles::uniform(g, -3.0, 3.0);
    const double S = fp::reduced_action_SPk(p, k, P, ep);
    const double F = (p.hbar * k - p.g * P) / p.T;
    const double ref = oracles::shooting_action(p.m, 0.0, F, ep.x_in, ep.x_out, p.T);
    CHECK(std::abs(S - ref) < 1e-9 * std::max(1.0, std::abs(ref)));
    CHECK(std::abs(fp::reduced_action_SPk(p, p.g * P / p.hbar, P, ep) -
                   fp::reduced_action_SPk(p, 0.0, 0.0, ep)) < 1e-13);
  }
}

TEST_CASE("free class operator elements", "[free]") {
  auto& g = oracles::rng();
  SECTION("sum over branches is the propagator") {
    for (int i = 0; i < 50; ++i) {
      const SystemParams p = random_params(g);
      const Endpoints ep = random_endpoints(g);
      const CoarseGraining cg = unit_cg(oracles::uniform(g, 0.3, 2.0));
      const double Z = fp::length_Z(p, ep), ell = fp::derived_constants(p).ell;
      const int a0 = cg.branch_of(Z - 40.0), a1 = cg.branch_of(Z + 40.0);
      cplx sum = 0.0;
      for (int a = a0; a <= a1; ++a) sum += fp::class_op_element(p, cg, a, ep);
      const cplx K = fp::propagator(p, ep);
      const cplx tails = oracles::window_tail_sum(Z - cg.lower(a0), ell) +
                         oracles::window_tail_sum(cg.upper(a1) - Z, ell);
      CHECK(std::abs(sum + K * tails - K) < 1e-10 * std::abs(K));
    }
  }
  SECTION("sharp window limit") {
    const SystemParams p = free_params(1.0, 5.0, 1.0, 1.0, 1e-6);
    const CoarseGraining cg = unit_cg(1.0);
    const Endpoints ep{0.1, 0.05, 0.0, 0.02};
    const int a = cg.branch_of(fp::length_Z(p, ep));
    const cplx K = fp::propagator(p, ep);
    CHECK(std::abs(fp::class_op_element(p, cg, a, ep) - K) < 1e-3 * std::abs(K));
    CHECK(std::abs(fp::class_op_element(p, cg, a + 1, ep)) < 1e-3 * std::abs(K));
    CHECK(std::abs(fp::class_op_element(p, cg, a - 1, ep)) < 1e-3 * std::abs(K));
  }
  SECTION("matches the k-quadrature oracle") {
    for (int i = 0; i < 25; ++i) {
      const SystemParams p = random_params(g);
      const Endpoints ep = random_endpoints(g);
      const CoarseGraining cg = unit_cg(oracles::uniform(g, 0.3, 2.0));
      const int a = cg.branch_of(fp::length_Z(p, ep)) + static_cast<int>(i % 3) - 1;
      const cplx c = fp::class_op_element(p, cg, a, ep);
      const auto rep = oracle::classop_k_quadrature(p, cg, a, ep);
      CHECK(std::abs(c - rep.value) <= 1e-6 * std::abs(c));
    }
  }
  SECTION("time reversal with reversed coupling preserves the modulus") {
    for (int i = 0; i < 100; ++i) {
      SystemParams p = random_params(g);
      const Endpoints ep = random_endpoints(g);
      const CoarseGraining cg = unit_cg(1.0);
      const int a = cg.branch_of(fp::length_Z(p, ep));
      const cplx c = fp::class_op_element(p, cg, a, ep);
      SystemParams q = p;
      q.g = -p.g;
      const Endpoints rev{ep.x_out, ep.x_in, ep.X_out, ep.X_in};
      CHECK(std::abs(std::abs(fp::class_op_element(q, cg, a, rev)) - std::abs(c)) <
            1e-12 * std::max(1.0, std::abs(c)));
      CHECK(std::abs(fp::length_Z(q, rev) - fp::length_Z(p, ep)) < 1e-12);
    }
  }
  SECTION("classical limit approaches indicator times propagator") {
    // |E - 1| is a Fresnel ripple bounded by l / (2 sqrt(pi) v) per edge
    SystemParams p = free_params(1.0, 5.0, 1.0, 1.0, 1.0);
    const CoarseGraining cg = unit_cg(1.0);
    const Endpoints ep{0.2, -0.1, 0.0, 0.15};
    const double Z = fp::length_Z(p, ep);
    const int a = cg.branch_of(Z);
    const double v1 = Z - cg.lower(a), v2 = cg.upper(a) - Z;
    double dev = 1.0;
    for (double h : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}) {
      p.hbar = h;
      const double ell = fp::derived_constants(p).ell;
      const cplx K = fp::propagator(p, ep);
      dev = std::abs(fp::class_op_element(p, cg, a, ep) - K) / std::abs(K);
      CHECK(dev < 1.05 * ell / (2.0 * std::sqrt(std::numbers::pi)) * (1.0 / v1 + 1.0 / v2));
    }
    CHECK(dev < 1e-2);
  }
}
