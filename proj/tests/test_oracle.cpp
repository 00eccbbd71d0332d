#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>

#include "decohist/oracle.hpp"
#include "oracles.hpp"

using namespace decohist;

namespace {

SystemParams free_params(double g, double hbar = 1.0) {
  SystemParams p;
  p.m = 1.0;
  p.M = 5.0;
  p.g = g;
  p.T = 1.0;
  p.hbar = hbar;
  return p;
}

CoarseGraining cg_of(double delta, int lo = -50, int hi = 50) {
  CoarseGraining cg;
  cg.delta = delta;
  cg.alpha_min = lo;
  cg.alpha_max = hi;
  return cg;
}

/// Samples that only carry t, x, x_dot and X_dot.
struct Samples {
  std::vector<double> t, x, x_dot, X_dot;
};

}  // namespace

TEST_CASE("adaptive Gauss-Kronrod integrates smooth and peaked functions", "[oracle]") {
  const auto r1 = oracle::integrate_adaptive([](double x) { return cplx{std::exp(x), 0.0}; }, 0.0, 1.0);
  CHECK(std::abs(r1.value - (std::numbers::e - 1.0)) < 1e-14);
  CHECK(r1.error < 1e-11);
  const auto r2 = oracle::integrate_adaptive(
      [](double x) { return cplx{std::exp(-1e4 * x * x), 0.0}; }, -1.0, 3.0);
  CHECK(std::abs(r2.value.real() - std::sqrt(std::numbers::pi / 1e4)) < 1e-13);
  CHECK(r2.nodes > 120);
  const auto r3 = oracle::integrate_adaptive(
      [](double x) { return std::exp(cplx{0.0, 50.0 * x}); }, 0.0, 2.0);
  const cplx exact = (std::exp(cplx{0.0, 100.0}) - 1.0) / cplx{0.0, 50.0};
  CHECK(std::abs(r3.value - exact) < 1e-12);
}

TEST_CASE("adaptive quadrature reports a partial estimate when over budget", "[oracle]") {
  oracle::AdaptiveOptions opt;
  opt.max_nodes = 400;
  try {
    oracle::integrate_adaptive([](double x) { return std::exp(cplx{0.0, 1e4 * x * x}); }, -5.0, 5.0, opt);
    FAIL("expected BudgetError");
  } catch (const BudgetError& e) {
    CHECK(std::isfinite(e.partial_estimate().real()));
  }
}

TEST_CASE("sinc is smooth through zero", "[oracle]") {
  for (double x : {1e-9, 1e-5, 9.99e-5, 1.01e-4, 1e-2}) {
    const double ref = double(std::sin((long double)x) / (long double)x);
    CHECK(std::abs(oracle::sinc(x) - ref) < 1e-15);
  }
  CHECK(oracle::sinc(0.0) == 1.0);
}

TEST_CASE("k-quadrature far from the window and for a covering window", "[oracle]") {
  SECTION("an interval far from Z carries only the Fresnel tails") {
    // l / delta = 0.1 and the interval centre 12 delta from Z
    SystemParams p = free_params(1.0);
    const double ell0 = free_particle::derived_constants(p).ell;
    p.hbar = std::pow(0.1 / ell0, 2);
    const double ell = free_particle::derived_constants(p).ell;
    const CoarseGraining cg = cg_of(1.0);
    const Endpoints ep{0.1, -0.2, 0.0, 0.1};
    const double Z = free_particle::length_Z(p, ep);
    const int a = cg.branch_of(Z) + 12;
    // the absolute tolerance sits above the roundoff of 2500 oscillations
    oracle::AdaptiveOptions opt;
    opt.abs_tol = 1e-11;
    opt.rel_tol = 1e-9;
    const auto rep = oracle::classop_k_quadrature(p, cg, a, ep, opt);
    const cplx K = free_particle::propagator(p, ep);
    const cplx tails = oracles::window_by_fresnel(Z, ell, cg.lower(a), cg.upper(a));
    CHECK(std::abs(rep.value - K * tails) < 1e-6 * std::abs(K * tails));
    // each edge leaves l / (2 sqrt(pi) v) with its own phase, far above 1e-8 here
    const double v1 = std::abs(cg.lower(a) - Z), v2 = std::abs(cg.upper(a) - Z);
    const double bound = ell / (2.0 * std::sqrt(std::numbers::pi)) * (1.0 / v1 + 1.0 / v2);
    CHECK(std::abs(rep.value) / std::abs(K) < 1.01 * bound);
    CHECK(std::abs(rep.value) / std::abs(K) > 1e-8);
  }
  SECTION("a wide interval tends to the propagator") {
    const SystemParams p = free_params(0.7);
    const Endpoints ep{0.3, -0.4, 0.2, 0.5};
    const cplx K = free_particle::propagator(p, ep);
    const double ell = free_particle::derived_constants(p).ell;
    const double Z = free_particle::length_Z(p, ep);
    for (double delta : {10.0, 40.0}) {
      CoarseGraining cg = cg_of(delta, 0, 0);
      cg.xbar0 = Z;
      const auto rep = oracle::classop_k_quadrature(p, cg, 0, ep);
      const cplx tails = oracles::window_by_fresnel(Z, ell, cg.lower(0), cg.upper(0));
      CHECK(std::abs(rep.value - K * tails) < 1e-6 * std::abs(K));
      CHECK(std::abs(rep.value - K) < 1.05 * 2.0 * ell / (std::sqrt(std::numbers::pi) * delta) * std::abs(K));
    }
  }
}

TEST_CASE("lattice oracle: exhaustive two-slice enumeration", "[oracle]") {
  auto& g = oracles::rng();
  for (int i = 0; i < 20; ++i) {
    const SystemParams p = free_params(oracles::uniform(g, -1.5, 1.5), oracles::uniform(g, 0.3, 1.5));
    const Endpoints ep{oracles::uniform(g, -1, 1), oracles::uniform(g, -1, 1), oracles::uniform(g, -1, 1),
                       oracles::uniform(g, -1, 1)};
    const CoarseGraining cg = cg_of(oracles::uniform(g, 0.5, 2.0));
    const int a = cg.branch_of(0.5 * (ep.x_in + ep.x_out)) + (i % 3) - 1;
    const auto tm = oracle::lattice_constrained_propagator(p, cg, a, ep, 2);
    const auto en = oracle::lattice_enumerated_two_slice(p, cg, a, ep);
    CHECK(std::abs(tm.value - en.value) <= 1e-12 * std::max(1.0, std::abs(en.value)));
  }
}

TEST_CASE("lattice oracle: the constrained pieces add up to the sliced propagator", "[oracle]") {
  // The integrand in xbar is exp(quadratic), a chirp with no decay, so the
  // part outside the branch range is added from two rays into the complex
  // plane along which it is a decaying Gaussian.
  using cld = std::complex<long double>;
  const SystemParams p = free_params(1.0);
  const Endpoints ep{0.2, -0.1, 0.0, 0.15};
  const CoarseGraining cg = cg_of(0.5, -12, 12);
  for (int n : {4, 16}) {
    const auto G = oracle::lattice_gaussian(p, ep, n);
    const auto f = [&](cld xbar) {
      const cld C0 = G.C0, C1 = G.C1, C2 = G.C2;
      const cld b = C1 - cld(0, 1) * (cld(p.T) * xbar);
      const cld rho = std::sqrt(std::numbers::pi_v<long double> / -C2) / (2 * std::numbers::pi_v<long double>) *
                      std::exp(C0 - b * b / (4.0L * C2));
      const cld v = cld(ep.X_out - ep.X_in) - cld(p.g) * xbar;
      const long double c = p.M / (2.0L * p.hbar * p.T);
      const cld P = std::sqrt(c / std::numbers::pi_v<long double>) * cld(std::sqrt(0.5L), -std::sqrt(0.5L)) *
                    std::exp(cld(0, 1) * c * v * v);
      return cld(p.T) * rho * P;
    };
    // decay direction: the quadratic coefficient must turn negative real
    const long double h = 1e-3L;
    const cld A = (std::log(f(h) / f(0.0L)) + std::log(f(-h) / f(0.0L))) / (2 * h * h);
    const long double theta = 0.5L * (std::numbers::pi_v<long double> - std::arg(A));
    const cld dir = std::polar(1.0L, theta);
    const long double R = 12.0L / std::sqrt(std::abs(A));
    const auto ray = [&](long double start, cld d) {
      return oracles::integrate([&](long double r) { return f(start + r * d) * d; }, 0.0L, R, 64);
    };
    const cld tails = ray(cg.upper(cg.alpha_max), dir) - ray(cg.lower(cg.alpha_min), -dir);
    cplx sum = 0.0;
    for (int a = cg.alpha_min; a <= cg.alpha_max; ++a)
      sum += oracle::lattice_constrained_propagator(p, cg, a, ep, n).value;
    const cplx full = oracle::lattice_propagator(p, ep, n);
    const cplx t(double(tails.real()), double(tails.imag()));
    CHECK(std::abs(sum + t - full) < 1e-8 * std::abs(full));
  }
}

TEST_CASE("lattice oracle: continuum limit of a class operator", "[oracle]") {
  // l / delta = 0.2
  const SystemParams p = free_params(1.0);
  const double ell = free_particle::derived_constants(p).ell;
  const CoarseGraining cg = cg_of(5.0 * ell, -3, 3);
  const Endpoints ep{0.2, -0.1, 0.0, 0.15};
  const cplx exact = free_particle::class_op_element(p, cg, 0, ep);
  double prev = 1e300;
  for (int n : {8, 16, 32, 64}) {
    const auto rep = oracle::lattice_constrained_propagator(p, cg, 0, ep, n);
    const double err = std::abs(rep.value - exact) / std::abs(exact);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 0.05);
}

TEST_CASE("lattice oracle input checks", "[oracle]") {
  SystemParams p = free_params(1.0);
  const CoarseGraining cg = cg_of(1.0);
  CHECK_THROWS_AS(oracle::lattice_constrained_propagator(p, cg, 0, {}, 1), ParameterError);
  CHECK_THROWS_AS(oracle::lattice_constrained_propagator(p, cg, 0, {}, 65), ParameterError);
  CHECK_THROWS_AS(oracle::lattice_constrained_propagator(p, cg, 99, {}, 4), RangeError);
  p.kind = SystemKind::oscillator;
  p.omega = 1.0;
  CHECK_THROWS_AS(oracle::lattice_constrained_propagator(p, cg, 0, {}, 4), KindError);
}

TEST_CASE("progress callback reaches completion", "[oracle]") {
  const SystemParams p = free_params(1.0);
  oracle::LatticeOptions opt;
  double last = 0.0;
  int calls = 0;
  opt.progress = [&](double f) {
    CHECK(f >= last);
    last = f;
    ++calls;
  };
  oracle::lattice_constrained_propagator(p, cg_of(1.0), 0, {0.1, 0.2, 0.0, 0.1}, 8, opt);
  CHECK(last == 1.0);
  CHECK(calls >= 2);
}

TEST_CASE("equation-of-motion residual", "[oracle]") {
  SECTION("uncoupled straight line is exact") {
    const SystemParams p = free_params(0.0);
    Samples s;
    const int n = 1001;
    for (int i = 0; i < n; ++i) {
      const double t = double(i) / (n - 1);
      s.t.push_back(t);
      s.x.push_back(-0.5 + 1.5 * t);
      s.x_dot.push_back(1.5);
      s.X_dot.push_back(0.25);
    }
    CHECK(oracle::eom_residual(s, p) < 1e-9);
  }
  SECTION("a perturbed path is detected") {
    const SystemParams p = free_params(1.0);
    const auto sol = free_particle::classical_solution(p, {0.3, -0.7, 0.1, 0.4}, 10001);
    const double clean = oracle::eom_residual(sol, p);
    auto bad = sol;
    for (std::size_t i = 0; i < bad.t.size(); ++i) bad.x[i] += 1e-3 * std::sin(std::numbers::pi * bad.t[i] / p.T);
    CHECK(clean < 1e-5);
    CHECK(oracle::eom_residual(bad, p) > 10.0 * clean);
  }
  SECTION("too few samples") {
    Samples s;
    s.t = {0, 1, 2, 3};
    s.x = s.x_dot = s.X_dot = {0, 0, 0, 0};
    CHECK_THROWS_AS(oracle::eom_residual(s, free_params(1.0)), ParameterError);
  }
}

TEST_CASE("path diagnostics", "[oracle]") {
  const SystemParams p0 = free_params(0.0);
  Samples c;
  for (int i = 0; i <= 10; ++i) {
    c.t.push_back(0.1 * i);
    c.x.push_back(0.75);
    c.x_dot.push_back(0.0);
    c.X_dot.push_back(0.0);
  }
  CHECK(std::abs(oracle::path_diagnostics(c, p0).xbar - 0.75) < 1e-15);

  Samples line;
  const double xi = -0.4, xo = 1.1;
  for (int i = 0; i <= 100; ++i) {
    const double t = 0.01 * i;
    line.t.push_back(t);
    line.x.push_back(xi + (xo - xi) * t);
    line.x_dot.push_back(xo - xi);
    line.X_dot.push_back(0.0);
  }
  CHECK(std::abs(oracle::path_diagnostics(line, p0).action - 0.5 * p0.m * (xo - xi) * (xo - xi)) < 1e-14);

  SystemParams po = free_params(0.9);
  po.kind = SystemKind::oscillator;
  po.omega = 1.7;
  const auto sol = oscillator::classical_solution(po, {0.2, -0.6, 0.3, -0.1}, 100001);
  CHECK(std::abs(oracle::path_diagnostics(sol, po).xbar - sol.xbar_cl) < 1e-8);

  Samples one;
  one.t = {0.0};
  one.x = one.x_dot = one.X_dot = {0.0};
  CHECK_THROWS_AS(oracle::path_diagnostics(one, p0), ParameterError);
}
