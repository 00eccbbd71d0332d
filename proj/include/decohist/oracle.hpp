#pragma once

// Independent evaluation routes for the closed forms:
//  - the class operator as its k integral, with the P integral done
//    analytically from the reduced action,
//  - a time-sliced lattice path integral for the free particle, with the
//    path-average constraint imposed through a Fourier accumulator,
//  - finite-difference and trapezoid checks on sampled classical paths.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <queue>
#include <vector>

#include "decohist/core.hpp"
#include "decohist/system.hpp"

namespace decohist::oracle {

struct QuadratureReport {
  cplx value{};
  double error = 0.0;
  long nodes = 0;
};

using ProgressCallback = std::function<void(double fraction)>;

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod (7, 15)

namespace detail {

inline constexpr std::array<double, 8> kronrod_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kronrod_w = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gauss_w = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b;
  cplx value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const cplx fc = f(c);
  cplx kron = fc * kronrod_w[7];
  cplx gauss = fc * gauss_w[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kronrod_x[i];
    const cplx s = f(c - dx) + f(c + dx);
    kron += kronrod_w[i] * s;
    if (i % 2 == 1) gauss += gauss_w[i / 2] * s;
  }
  return {a, b, kron * h, std::abs((kron - gauss) * h)};
}

}  // namespace detail

struct AdaptiveOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-11;
  long max_nodes = 4'000'000;
  int initial_segments = 8;
};

/// Globally adaptive bisection on [a, b]; the reported error is the summed
/// Kronrod-minus-Gauss estimate. Throws BudgetError with the partial sum.
template <class F>
QuadratureReport integrate_adaptive(F&& f, double a, double b, const AdaptiveOptions& opt = {}) {
  std::priority_queue<detail::Segment> heap;
  QuadratureReport rep;
  const int n0 = std::max(1, opt.initial_segments);
  for (int i = 0; i < n0; ++i) {
    const double lo = a + (b - a) * i / n0;
    const double hi = (i == n0 - 1) ? b : a + (b - a) * (i + 1) / n0;
    heap.push(detail::gk15(f, lo, hi));
    rep.nodes += 15;
  }
  const auto totals = [&heap](cplx& v, double& e) {
    // the heap is not iterable; copy out in a fixed order for a stable sum
    auto copy = heap;
    std::vector<detail::Segment> segs;
    while (!copy.empty()) {
      segs.push_back(copy.top());
      copy.pop();
    }
    std::sort(segs.begin(), segs.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
    v = 0.0;
    e = 0.0;
    for (const auto& s : segs) {
      v += s.value;
      e += s.error;
    }
  };
  cplx value;
  double error;
  totals(value, error);
  int since_total = 0;
  while (error > std::max(opt.abs_tol, opt.rel_tol * std::abs(value))) {
    if (rep.nodes + 30 > opt.max_nodes) {
      totals(value, error);
      throw BudgetError("integrate_adaptive: node budget exhausted (error estimate " +
                            std::to_string(error) + ")",
                        value);
    }
    const detail::Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const detail::Segment l = detail::gk15(f, worst.a, mid);
    const detail::Segment r = detail::gk15(f, mid, worst.b);
    rep.nodes += 30;
    heap.push(l);
    heap.push(r);
    value += l.value + r.value - worst.value;
    error += l.error + r.error - worst.error;
    if (++since_total == 64) {
      // refresh the running sums so cancellation drift never decides convergence
      totals(value, error);
      since_total = 0;
    }
  }
  totals(value, error);
  rep.value = value;
  rep.error = error;
  return rep;
}

// ---------------------------------------------------------------------------
// k-integral route

inline cplx sinc(cplx z) {
  if (std::abs(z) < 1e-4) {
    const cplx z2 = z * z;
    return 1.0 - z2 / 6.0 + z2 * z2 / 120.0;
  }
  return std::sin(z) / z;
}

/// Quadratic form of the reduced action in J = hbar k - g P, and what the
/// analytic P integral makes of it.
struct KIntegralForm {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;  // S(J) = s0 + s1 J + s2 J^2
  double a = 0.0;                        // T/(2M) - s2 g^2
  double b0 = 0.0;                       // X - X' - s1 g
  double Zk = 0.0;                       // coefficient of k in the phase
  double beta = 0.0;                     // minus the coefficient of k^2
  cplx propagator{};                     // the k-independent prefactor
};

inline KIntegralForm k_integral_form(const SystemParams& p, const Endpoints& ep) {
  p.validate();
  const auto S = [&](double J) { return system_reduced_action(p, J / p.hbar, 0.0, ep); };
  const double J1 = p.m * (1.0 + std::abs(ep.x_in) + std::abs(ep.x_out)) / p.T;
  const double Sp = S(J1), S0 = S(0.0), Sm = S(-J1);
  KIntegralForm f;
  f.s0 = S0;
  f.s1 = (Sp - Sm) / (2.0 * J1);
  f.s2 = (Sp + Sm - 2.0 * S0) / (2.0 * J1 * J1);
  f.a = p.T / (2.0 * p.M) - f.s2 * p.g * p.g;
  if (!(f.a > 0.0)) throw OracleDisagreement("k_integral_form: P integral does not converge");
  const double u = ep.X_out - ep.X_in;
  f.b0 = u - f.s1 * p.g;
  f.Zk = f.s1 - f.b0 * f.s2 * p.g / f.a;
  f.beta = -p.hbar * f.s2 * p.T / (2.0 * p.M * f.a);
  if (!(f.beta > 0.0)) throw OracleDisagreement("k_integral_form: k integral does not converge");

  using std::numbers::pi;
  // reduced particle amplitude times the P Gaussian over 2 pi hbar
  cplx reduced;
  if (p.kind == SystemKind::free) {
    reduced = std::sqrt(p.m / (2.0 * pi * p.hbar * p.T)) * std::conj(sqrt_i);
  } else {
    reduced = std::sqrt(p.m * p.omega / (2.0 * pi * p.hbar * std::sin(p.omega * p.T))) *
              std::conj(sqrt_i);
  }
  const cplx p_gauss = std::sqrt(pi * p.hbar / f.a) * std::conj(sqrt_i) / (2.0 * pi * p.hbar);
  f.propagator = reduced * p_gauss *
                 std::exp(cplx{0.0, (f.s0 + f.b0 * f.b0 / (4.0 * f.a)) / p.hbar});
  return f;
}

/// (1/pi) int dk sin(k delta/2)/k exp(i k c - i beta k^2), on the real segment
/// [-K, K] plus the two steepest-descent rays that leave it.
inline QuadratureReport window_k_integral(double c, double beta, double delta,
                                          const AdaptiveOptions& opt = {}) {
  using std::numbers::pi;
  const double reach = std::abs(c) + 0.5 * delta;
  const double K = reach / (2.0 * beta) + 3.0 / std::sqrt(beta);
  const auto f = [&](cplx k) {
    return (0.5 * delta / pi) * sinc(0.5 * delta * k) *
           std::exp(imag_unit * (k * c - beta * k * k));
  };
  // ray length: exponent falls below -46 well before R
  const double R = 7.0 / std::sqrt(beta) + 1.0;

  AdaptiveOptions seg = opt;
  seg.initial_segments = std::max(opt.initial_segments,
                                  static_cast<int>(std::min(4096.0, beta * K * K / 4.0 + 8.0)));
  QuadratureReport mid = integrate_adaptive([&](double k) { return f(k); }, -K, K, seg);

  const cplx down = std::polar(1.0, -pi / 4.0);
  const cplx up_left = std::polar(1.0, 3.0 * pi / 4.0);
  AdaptiveOptions ray = opt;
  ray.max_nodes = std::max<long>(opt.max_nodes - mid.nodes, 1000);
  QuadratureReport right =
      integrate_adaptive([&](double r) { return f(K + r * down) * down; }, 0.0, R, ray);
  ray.max_nodes = std::max<long>(ray.max_nodes - right.nodes, 1000);
  QuadratureReport left =
      integrate_adaptive([&](double r) { return -f(-K + r * up_left) * up_left; }, 0.0, R, ray);

  QuadratureReport rep;
  rep.value = mid.value + right.value + left.value;
  rep.error = mid.error + right.error + left.error;
  rep.nodes = mid.nodes + right.nodes + left.nodes;
  return rep;
}

/// Class-operator element as the k integral of the reduced propagator.
inline QuadratureReport classop_k_quadrature(const SystemParams& p, const CoarseGraining& cg,
                                             int alpha, const Endpoints& ep,
                                             const AdaptiveOptions& opt = {}) {
  cg.validate();
  cg.check(alpha);
  const KIntegralForm f = k_integral_form(p, ep);
  QuadratureReport w;
  try {
    w = window_k_integral(f.Zk - cg.center(alpha), f.beta, cg.delta, opt);
  } catch (const BudgetError& e) {
    throw BudgetError(std::string("classop_k_quadrature: ") + e.what(),
                      f.propagator * e.partial_estimate());
  }
  QuadratureReport rep;
  rep.value = f.propagator * w.value;
  rep.error = std::abs(f.propagator) * w.error;
  rep.nodes = w.nodes;
  return rep;
}

// ---------------------------------------------------------------------------
// Lattice path integral (free particle)

/// exp(C0 + C1 kappa + C2 kappa^2): the sliced particle amplitude with the
/// factor exp(i kappa sigma) inserted, sigma = dt sum_j w_j x_j.
struct LatticeGaussian {
  cplx C0{}, C1{}, C2{};
  int n_slices = 0;
  double dt = 0.0;
};

inline double trapezoid_weight(int j, int n) { return (j == 0 || j == n) ? 0.5 : 1.0; }

inline LatticeGaussian lattice_gaussian(const SystemParams& p, const Endpoints& ep, int n_slices) {
  if (p.kind != SystemKind::free) throw KindError("lattice oracle: free particle only");
  p.validate();
  if (n_slices < 2 || n_slices > 64) throw ParameterError("lattice oracle: n_slices must be in [2, 64]");
  using std::numbers::pi;
  const int n = n_slices;
  const double dt = p.T / n;
  const cplx mu{0.0, p.m / (2.0 * p.hbar * dt)};
  const cplx log_norm = std::log(std::sqrt(p.m / (2.0 * pi * p.hbar * dt)) * std::conj(sqrt_i));

  // F(y) = exp(A y^2 + (B + Bk kappa) y + C + Ck kappa + Ckk kappa^2), y = x_1
  cplx A = mu, B = -2.0 * mu * ep.x_in, Bk = 0.0;
  cplx C = log_norm + mu * ep.x_in * ep.x_in;
  cplx Ck = imag_unit * dt * trapezoid_weight(0, n) * ep.x_in, Ckk = 0.0;
  for (int j = 1; j < n; ++j) {
    Bk += imag_unit * dt * trapezoid_weight(j, n);
    const cplx alpha = A + mu;
    // integrate y against the next short-time kernel exp(mu (z - y)^2)
    C += log_norm + 0.5 * std::log(pi / (-alpha)) - B * B / (4.0 * alpha);
    Ck += -B * Bk / (2.0 * alpha);
    Ckk += -Bk * Bk / (4.0 * alpha);
    const cplx A_new = mu - mu * mu / alpha;
    B = mu * B / alpha;
    Bk = mu * Bk / alpha;
    A = A_new;
  }
  Bk += imag_unit * dt * trapezoid_weight(n, n);
  LatticeGaussian g;
  g.C0 = A * ep.x_out * ep.x_out + B * ep.x_out + C;
  g.C1 = Bk * ep.x_out + Ck;
  g.C2 = Ckk;
  g.n_slices = n;
  g.dt = dt;
  return g;
}

/// Density of the sliced amplitude in sigma: (1/2 pi) int dkappa exp(-i kappa sigma) G(kappa).
inline cplx lattice_density(const LatticeGaussian& g, double sigma) {
  using std::numbers::pi;
  const cplx b = g.C1 - imag_unit * sigma;
  return std::sqrt(pi / (-g.C2)) / (2.0 * pi) * std::exp(g.C0 - b * b / (4.0 * g.C2));
}

inline cplx pointer_factor(const SystemParams& p, double dX, double xbar) {
  using std::numbers::pi;
  const double v = dX - p.g * xbar;
  return std::sqrt(p.M / (2.0 * pi * p.hbar * p.T)) * std::conj(sqrt_i) *
         std::exp(cplx{0.0, p.M * v * v / (2.0 * p.hbar * p.T)});
}

struct LatticeOptions {
  int bins_per_delta = 50;
  ProgressCallback progress;
};

namespace detail {

inline const std::array<std::pair<double, double>, 8>& gauss_legendre_8() {
  static const std::array<std::pair<double, double>, 8> r = {{
      {-0.960289856497536231683560868569473, 0.101228536290376259152531354309962},
      {-0.796666477413626739591553936475831, 0.222381034453374470544355994426241},
      {-0.525532409916328985817739049189254, 0.313706645877887287337962201986601},
      {-0.183434642495649804939476142360184, 0.362683783378361982965150449277196},
      {0.183434642495649804939476142360184, 0.362683783378361982965150449277196},
      {0.525532409916328985817739049189254, 0.313706645877887287337962201986601},
      {0.796666477413626739591553936475831, 0.222381034453374470544355994426241},
      {0.960289856497536231683560868569473, 0.101228536290376259152531354309962},
  }};
  return r;
}

/// int over xbar in (lo, up] of T rho(T xbar) P(dX - g xbar), in bins.
template <class Density>
cplx constrained_sum(const SystemParams& p, const Endpoints& ep, Density&& rho, double lo,
                     double up, int bins, const ProgressCallback& progress) {
  const auto& gl = gauss_legendre_8();
  const double dX = ep.X_out - ep.X_in;
  const double h = (up - lo) / bins;
  cplx acc = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double c = lo + (b + 0.5) * h;
    cplx part = 0.0;
    for (const auto& [x, w] : gl) {
      const double xbar = c + 0.5 * h * x;
      part += w * rho(p.T * xbar) * pointer_factor(p, dX, xbar);
    }
    acc += part * (0.5 * h * p.T);
    if (progress && (b + 1) % 64 == 0) progress(double(b + 1) / bins);
  }
  if (progress) progress(1.0);
  return acc;
}

}  // namespace detail

/// Sliced path integral restricted to paths whose trapezoid average lies in
/// interval alpha, with the pointer integrated out analytically.
inline QuadratureReport lattice_constrained_propagator(const SystemParams& p,
                                                       const CoarseGraining& cg, int alpha,
                                                       const Endpoints& ep, int n_slices,
                                                       const LatticeOptions& opt = {}) {
  cg.validate();
  cg.check(alpha);
  if (opt.bins_per_delta < 1) throw ParameterError("lattice oracle: bins_per_delta must be >= 1");
  const LatticeGaussian g = lattice_gaussian(p, ep, n_slices);
  const auto rho = [&](double sigma) { return lattice_density(g, sigma); };
  const cplx coarse = detail::constrained_sum(p, ep, rho, cg.lower(alpha), cg.upper(alpha),
                                              opt.bins_per_delta, {});
  const cplx fine = detail::constrained_sum(p, ep, rho, cg.lower(alpha), cg.upper(alpha),
                                            2 * opt.bins_per_delta, opt.progress);
  QuadratureReport rep;
  rep.value = fine;
  rep.error = std::abs(fine - coarse);
  rep.nodes = 24L * opt.bins_per_delta;
  return rep;
}

/// Two-slice lattice amplitude built path by path: sigma fixes the single
/// interior point, so each sigma is exactly one path.
inline QuadratureReport lattice_enumerated_two_slice(const SystemParams& p,
                                                     const CoarseGraining& cg, int alpha,
                                                     const Endpoints& ep,
                                                     const LatticeOptions& opt = {}) {
  if (p.kind != SystemKind::free) throw KindError("lattice oracle: free particle only");
  p.validate();
  cg.check(alpha);
  using std::numbers::pi;
  const double dt = 0.5 * p.T;
  const cplx norm = std::sqrt(p.m / (2.0 * pi * p.hbar * dt)) * std::conj(sqrt_i);
  const auto kern = [&](double b, double a) {
    return norm * std::exp(cplx{0.0, p.m * (b - a) * (b - a) / (2.0 * p.hbar * dt)});
  };
  const auto rho = [&](double sigma) {
    const double x1 = sigma / dt - 0.5 * (ep.x_in + ep.x_out);
    return kern(ep.x_out, x1) * kern(x1, ep.x_in) / dt;
  };
  QuadratureReport rep;
  rep.value = detail::constrained_sum(p, ep, rho, cg.lower(alpha), cg.upper(alpha),
                                      2 * opt.bins_per_delta, opt.progress);
  rep.nodes = 16L * opt.bins_per_delta;
  return rep;
}

/// Unconstrained sliced propagator: the sigma integral done in closed form.
inline cplx lattice_propagator(const SystemParams& p, const Endpoints& ep, int n_slices) {
  using std::numbers::pi;
  const LatticeGaussian g = lattice_gaussian(p, ep, n_slices);
  // rho(sigma) P(dX - g sigma / T): exponent q2 sigma^2 + q1 sigma + q0
  const double dX = ep.X_out - ep.X_in;
  const double c = p.M / (2.0 * p.hbar * p.T);
  const double gT = p.g / p.T;
  const cplx q2 = 1.0 / (4.0 * g.C2) + imag_unit * c * gT * gT;
  const cplx q1 = imag_unit * g.C1 / (2.0 * g.C2) - 2.0 * imag_unit * c * dX * gT;
  const cplx q0 = g.C0 - g.C1 * g.C1 / (4.0 * g.C2) + imag_unit * c * dX * dX;
  const cplx pref = std::sqrt(pi / (-g.C2)) / (2.0 * pi) * std::sqrt(p.M / (2.0 * pi * p.hbar * p.T)) *
                    std::conj(sqrt_i);
  return pref * std::sqrt(pi / (-q2)) * std::exp(q0 - q1 * q1 / (4.0 * q2));
}

// ---------------------------------------------------------------------------
// Sampled-path checks

/// Largest central-difference residual of the particle and pointer equations
/// of motion, divided by the largest force term along the path.
template <class Solution>
double eom_residual(const Solution& s, const SystemParams& p) {
  const std::size_t n = s.t.size();
  if (n < 5 || s.x.size() != n || s.X_dot.size() != n)
    throw ParameterError("eom_residual: need at least 5 samples of t, x and X_dot");
  const double h = s.t[1] - s.t[0];
  double res = 0.0, xmax = 0.0, vmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    xmax = std::max(xmax, std::abs(s.x[i]));
    vmax = std::max(vmax, std::abs(s.X_dot[i]));
  }
  const double gM = p.g * p.M / p.T;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double xdd = (s.x[i + 1] - 2.0 * s.x[i] + s.x[i - 1]) / (h * h);
    const double particle = p.m * xdd + gM * s.X_dot[i] - gM * p.g / p.T * s.x[i] +
                            p.m * p.omega * p.omega * s.x[i];
    const double pointer =
        p.M * ((s.X_dot[i + 1] - s.X_dot[i - 1]) - p.g / p.T * (s.x[i + 1] - s.x[i - 1])) /
        (2.0 * h);
    res = std::max({res, std::abs(particle), std::abs(pointer)});
  }
  const double scale = std::max({p.m * xmax / (p.T * p.T), p.m * p.omega * p.omega * xmax,
                                 std::abs(gM) * vmax, std::abs(gM * p.g) * xmax / p.T,
                                 std::numeric_limits<double>::min()});
  return res / scale;
}

struct PathDiagnostics {
  double xbar = 0.0;
  double action = 0.0;
};

/// Trapezoid time average of x and trapezoid action integral of
/// m/2 xdot^2 - m w^2 x^2/2 + M/2 (Xdot - g x/T)^2 along the samples.
template <class Solution>
PathDiagnostics path_diagnostics(const Solution& s, const SystemParams& p) {
  const std::size_t n = s.t.size();
  if (n < 2) throw ParameterError("path_diagnostics: need at least 2 samples");
  PathDiagnostics d;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = s.t[i + 1] - s.t[i];
    const auto L = [&](std::size_t k) {
      const double r = s.X_dot[k] - p.g * s.x[k] / p.T;
      return 0.5 * p.m * (s.x_dot[k] * s.x_dot[k] - p.omega * p.omega * s.x[k] * s.x[k]) +
             0.5 * p.M * r * r;
    };
    d.xbar += 0.5 * h * (s.x[i] + s.x[i + 1]);
    d.action += 0.5 * h * (L(i) + L(i + 1));
  }
  d.xbar /= (s.t.back() - s.t.front());
  return d;
}

}  // namespace decohist::oracle
