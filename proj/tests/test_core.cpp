#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "decohist/core.hpp"
#include "decohist/system.hpp"
#include "oracles.hpp"

using namespace decohist;

namespace {

CoarseGraining wide(double delta, double xbar0 = 0.0) {
  CoarseGraining cg;
  cg.delta = delta;
  cg.xbar0 = xbar0;
  cg.alpha_min = -100000;
  cg.alpha_max = 100000;
  return cg;
}

}  // namespace

TEST_CASE("indicator uses right-closed intervals", "[core]") {
  const CoarseGraining cg = wide(0.5, 0.25);
  const int a = 3;
  const double c = cg.center(a);
  CHECK(indicator(cg, a, c) == 1);
  CHECK(indicator(cg, a, cg.upper(a)) == 1);
  CHECK(indicator(cg, a, cg.lower(a)) == 0);
  CHECK(indicator(cg, a, c + cg.delta) == 0);
  CHECK(indicator(cg, a + 1, c + cg.delta) == 1);
}

TEST_CASE("indicator selects exactly one interval", "[core]") {
  const CoarseGraining cg = wide(0.37, -1.1);
  auto& g = oracles::rng();
  for (int i = 0; i < 2000; ++i) {
    const double x = oracles::uniform(g, -50.0, 50.0);
    const int b = cg.branch_of(x);
    int hits = 0;
    for (int a = b - 3; a <= b + 3; ++a) hits += indicator(cg, a, x);
    CHECK(hits == 1);
    CHECK(indicator(cg, b, x) == 1);
  }
  // edges land in the lower interval
  for (int a = -5; a <= 5; ++a) CHECK(cg.branch_of(cg.upper(a)) == a);
}

TEST_CASE("indicator rejects undeclared branches", "[core]") {
  CoarseGraining cg;
  cg.alpha_min = -2;
  cg.alpha_max = 2;
  CHECK_THROWS_AS(indicator(cg, 3, 0.0), RangeError);
  CHECK_THROWS_AS(window_E(0.0, 0.1, cg, -3), RangeError);
}

TEST_CASE("window matches the Fresnel-integral oracle", "[core]") {
  auto& g = oracles::rng();
  const CoarseGraining cg = wide(1.0);
  for (int i = 0; i < 200; ++i) {
    const double ell = oracles::uniform(g, 0.05, 3.0);
    const double Z = oracles::uniform(g, -4.0, 4.0);
    const int a = static_cast<int>(std::floor(oracles::uniform(g, -3.0, 4.0)));
    const cplx ref = oracles::window_by_fresnel(Z, ell, cg.lower(a), cg.upper(a));
    const cplx w = window_E(Z, ell, cg, a);
    CHECK(std::abs(w - ref) < 1e-12 * std::max(1.0, std::abs(ref)));
  }
}

TEST_CASE("window limits and symmetry", "[core]") {
  const CoarseGraining cg = wide(1.0, 0.3);
  // centered: E = erf(delta / (2 sqrt(i) l))
  for (double ell : {0.01, 0.2, 1.0, 7.0}) {
    const cplx direct = specfun::cerf(cg.delta / (2.0 * sqrt_i * ell));
    CHECK(std::abs(window_E(cg.center(2), ell, cg, 2) - direct) < 1e-13);
  }
  CHECK(std::abs(window_E(cg.center(0), 1e-4, cg, 0) - 1.0) < 1e-3);
  // far tail, l/delta = 0.01
  const double z_far = cg.center(0) + 5.0 * cg.delta;
  const cplx far = window_E(z_far, 0.01, cg, 0);
  const cplx ref = oracles::window_by_fresnel(z_far, 0.01, cg.lower(0), cg.upper(0));
  // the tails fall off like the Fresnel integral, l / (v sqrt(pi)) per edge,
  // not like a Gaussian: at 5 delta the window is still about 1e-3
  CHECK(std::abs(far - ref) < 1e-12);
  const double edge_bound = 0.01 / std::sqrt(std::numbers::pi) * (1.0 / 4.5 + 1.0 / 5.5) / 2.0;
  CHECK(std::abs(far) < 1.05 * edge_bound);
  CHECK(std::abs(far) > 0.5 * edge_bound / 10.0);
  CHECK_THROWS_AS(window_E(0.0, 0.0, cg, 0), ParameterError);
  CHECK_THROWS_AS(window_E(0.0, -1.0, cg, 0), ParameterError);
}

TEST_CASE("window is bounded uniformly in Z", "[core]") {
  const CoarseGraining cg = wide(1.0);
  double peak = 0.0;
  for (double ell : {0.05, 0.5, 2.0})
    for (int j = -4000; j <= 4000; ++j) peak = std::max(peak, std::abs(window_E(j * 0.003, ell, cg, 0)));
  CHECK(peak < 1.5);
}

TEST_CASE("windows form a partition of unity", "[core]") {
  // The truncated sum telescopes to 1 minus the two outer erf tails; those
  // decay only like l / (distance sqrt(pi)), so the remainder beyond the
  // truncation is added from the independent Fresnel oracle.
  auto& g = oracles::rng();
  double worst = 0.0, worst_truncated = 0.0, worst_explained = 0.0;
  for (int i = 0; i < 1000; ++i) {
    CoarseGraining cg = wide(oracles::uniform(g, 0.05, 5.0), oracles::uniform(g, -1.0, 1.0));
    const double ell = cg.delta * std::exp(oracles::uniform(g, std::log(1e-3), std::log(3.0)));
    const double Z = oracles::uniform(g, -20.0, 20.0);
    const double reach = 10.0 * cg.delta * std::max(1.0, ell / cg.delta);
    const int a0 = cg.branch_of(Z - reach), a1 = cg.branch_of(Z + reach);
    cplx sum = 0.0;
    for (int a = a0; a <= a1; ++a) sum += window_E(Z, ell, cg, a);
    const cplx tails = oracles::window_tail_sum(Z - cg.lower(a0), ell) +
                       oracles::window_tail_sum(cg.upper(a1) - Z, ell);
    worst = std::max(worst, std::abs(sum + tails - 1.0));
    worst_truncated = std::max(worst_truncated, std::abs(sum - 1.0));
    worst_explained = std::max(worst_explained, std::abs(std::abs(sum - 1.0) - std::abs(tails)));
  }
  CHECK(worst < 1e-10);
  CHECK(worst_explained < 1e-10);
  WARN("largest truncated-sum deviation (pure erf tail): " << worst_truncated);
}

TEST_CASE("window tends to the indicator as l shrinks", "[core]") {
  const CoarseGraining cg = wide(1.0);
  double prev = 1e300;
  for (double ell : {0.1, 0.03, 0.01, 0.003}) {
    double worst = 0.0;
    for (int j = -300; j <= 300; ++j) {
      const double Z = 0.01 * j + 0.0005;
      if (std::abs(std::abs(Z) - 0.5) < 0.2) continue;
      worst = std::max(worst, std::abs(window_E(Z, ell, cg, 0) - double(indicator(cg, 0, Z))));
    }
    CHECK(worst < prev);
    prev = worst;
  }
  CHECK(prev < 1e-2);
}

TEST_CASE("system and state validation", "[core]") {
  SystemParams p;
  CHECK_NOTHROW(p.validate());
  p.m = 0.0;
  CHECK_THROWS_AS(p.validate(), ParameterError);
  p = SystemParams{};
  p.omega = 1.0;
  CHECK_THROWS_AS(p.validate(), ParameterError);
  p.kind = SystemKind::oscillator;
  CHECK_NOTHROW(p.validate());
  p.omega = 0.0;
  CHECK_THROWS_AS(p.validate(), ParameterError);
  p.omega = std::numbers::pi;
  CHECK_THROWS_AS(p.validate(), CausticError);
  GaussianState s;
  s.width = -1.0;
  CHECK_THROWS_AS(s.validate(), ParameterError);
}

TEST_CASE("Gaussian state is normalized", "[core]") {
  const GaussianState s{0.3, 0.7, 1.5};
  const auto dens = [&](oracles::ld x) {
    return static_cast<oracles::ld>(std::norm(s.amplitude(static_cast<double>(x), 1.0)));
  };
  CHECK(std::abs(static_cast<double>(oracles::integrate(dens, -8.0L, 8.0L, 64)) - 1.0) < 1e-13);
}

TEST_CASE("regime report", "[core]") {
  SystemParams p;
  p.m = 1.0;
  p.hbar = 1.0;
  p.T = 6.0;
  const double ell = free_particle::derived_constants(p).ell;
  REQUIRE(std::abs(ell - 1.0) < 1e-15);
  GaussianState s;
  s.width = 2.0;
  CoarseGraining cg;
  cg.delta = 3.0;
  RegimeReport r = regime_report(p, s, cg);
  CHECK(std::abs(r.t_spread - 2.0) < 1e-15);
  CHECK(std::abs(r.delta_over_ell - 3.0) < 1e-14);
  CHECK_FALSE(r.classical);

  s.width = 12.0;
  cg.delta = 100.0;
  r = regime_report(p, s, cg);
  CHECK(std::abs(r.d_over_ell - 12.0) < 1e-12);
  CHECK(r.classical);

  s.width = 50.0;
  cg.delta = 20.0;
  CHECK_FALSE(regime_report(p, s, cg).classical);
}
