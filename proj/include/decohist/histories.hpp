#pragma once

// Branch wavefunctions Psi_a = C_a Psi_0 on an (x, X) grid, the decoherence
// functional D(a, a') = <Psi_a | Psi_a'>, and its normalized off-diagonal
// metric.
//
// The class-operator kernel has the product form K * E(Z) with
//   K = amp exp(i [a_out x^2 + a_cross x x' + a_in x'^2 + (M_eff/2T)(u - c s)^2] / hbar),
//   Z = z_mean s + z_pointer u,  s = (x + x')/2,  u = X - X'.
// The initial-state integrals are trapezoid sums over x' and X'. The input
// nodes are placed at 1/r of the output spacing so that s and u only take
// lattice values; the pointer sum and the erf edges are then evaluated once
// per lattice value. A window is the difference of two edge erfs, so every
// branch shares the per-edge sums.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "decohist/core.hpp"
#include "decohist/moments.hpp"
#include "decohist/system.hpp"

namespace decohist {

struct GridSpec {
  int nx = 96;
  int nX = 96;
  double x_center = 0.0;
  double X_center = 0.0;
  double Lx = 0.0;  // half-widths
  double LX = 0.0;

  void validate() const {
    if (nx < 16 || nX < 16) throw ParameterError("GridSpec: nx and nX must be >= 16");
    if (!(Lx > 0.0 && LX > 0.0 && std::isfinite(Lx) && std::isfinite(LX)))
      throw ParameterError("GridSpec: half-widths must be finite and > 0");
    if (!std::isfinite(x_center) || !std::isfinite(X_center))
      throw ParameterError("GridSpec: centers must be finite");
  }
  double hx() const { return 2.0 * Lx / (nx - 1); }
  double hX() const { return 2.0 * LX / (nX - 1); }
  double x(int i) const { return x_center - Lx + i * hx(); }
  double X(int k) const { return X_center - LX + k * hX(); }
  bool operator==(const GridSpec& o) const {
    return nx == o.nx && nX == o.nX && x_center == o.x_center && X_center == o.X_center &&
           Lx == o.Lx && LX == o.LX;
  }
};

/// Initial pointer: a Gaussian wavepacket, or sharp at X0.
struct PointerState {
  bool sharp = false;
  GaussianState packet{0.0, 1.0, 0.0};
  double X0 = 0.0;

  static PointerState gaussian(double center, double width) {
    PointerState s;
    s.packet = {center, width, 0.0};
    return s;
  }
  static PointerState sharp_at(double X0) {
    PointerState s;
    s.sharp = true;
    s.X0 = X0;
    return s;
  }
  double center() const { return sharp ? X0 : packet.center; }
  void validate() const {
    if (sharp) {
      if (!std::isfinite(X0)) throw ParameterError("PointerState: X0 must be finite");
    } else {
      packet.validate();
    }
  }
};

struct BranchGrid {
  int alpha = 0;
  bool unwindowed = false;  // the full evolved state rather than a branch
  GridSpec grid;
  std::vector<cplx> psi;  // psi[i * nX + k] at (x_i, X_k)

  cplx at(int i, int k) const { return psi[static_cast<std::size_t>(i) * grid.nX + k]; }
  double norm2() const {
    double s = 0.0;
    for (const cplx& v : psi) s += std::norm(v);
    return s * grid.hx() * grid.hX();
  }
};

struct HistoriesOptions {
  int threads = 1;
  double node_budget = 2e9;        // cap on inner-loop complex multiply-adds
  double memory_budget = 1.5e9;    // bytes for the per-lattice-point sums
  double input_sigmas = 6.0;       // truncation of the initial Gaussians, in amplitude sd
  double leakage_tolerance = 1e-3; // grid mass deficit that raises GridTooSmallError
  double ringing_floor = 1e-10;    // window ringing amplitude below which it is not resolved
  bool check_leakage = true;
};

struct HistoriesDiagnostics {
  int x_refine = 1, X_refine = 1;  // output spacing / input spacing
  int n_x_in = 0, n_X_in = 0;
  long s_lattice = 0, u_lattice = 0;
  double work = 0.0;               // inner-loop multiply-adds
  long erf_calls = 0;
  double evolved_norm = 0.0;       // grid norm of the unwindowed state
};

struct BranchSet {
  CoarseGraining cg;
  std::vector<BranchGrid> branches;  // alpha_min .. alpha_max
  BranchGrid evolved;
  HistoriesDiagnostics diagnostics;
};

// ---------------------------------------------------------------------------
// Automatic grid and branch range

struct AutoGridOptions {
  double sigmas = 7.0;  // half-width in standard deviations of |Psi(T)|^2
};

inline GridSpec auto_grid(const SystemParams& p, const GaussianState& particle,
                          const PointerState& pointer, int nx, int nX,
                          const AutoGridOptions& opt = {}) {
  if (pointer.sharp)
    throw ParameterError("auto_grid: a sharp pointer has no finite spread; give the X grid explicitly");
  const StateMoments m = evolved_moments(p, particle, pointer.packet.center, pointer.packet.width);
  GridSpec g;
  g.nx = nx;
  g.nX = nX;
  g.x_center = m.mean(0);
  g.X_center = m.mean(2);
  g.Lx = opt.sigmas * m.sd(0);
  g.LX = opt.sigmas * m.sd(2);
  return g;
}

/// Branches covering the time-average spread: mean +- (8 sd + 3 l + delta).
/// Completeness is measured in norm, so the uncovered probability enters
/// under a square root; 6 sd leaves about 4e-5 of the norm outside. A sharp
/// pointer's momentum kick is left out of the spread, which is exact at g = 0.
inline CoarseGraining auto_branch_range(const SystemParams& p, const GaussianState& particle,
                                        const PointerState& pointer, CoarseGraining cg) {
  const double w = pointer.sharp ? 0.0 : pointer.packet.width;
  const StateMoments m = evolved_moments(p, particle, pointer.center(), w);
  const double ell = system_constants(p).ell;
  const double reach = 8.0 * m.xbar_sd() + 3.0 * ell + cg.delta;
  cg.alpha_min = cg.branch_of(m.xbar_mean - reach);
  cg.alpha_max = cg.branch_of(m.xbar_mean + reach);
  return cg;
}

// ---------------------------------------------------------------------------

namespace detail {

template <class F>
void parallel_rows(long n, int threads, F&& body) {
  threads = std::max(1, std::min<int>(threads, static_cast<int>(std::max<long>(n, 1))));
  if (threads == 1) {
    body(0L, n);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (int t = 0; t < threads; ++t) {
    const long lo = n * t / threads, hi = n * (t + 1) / threads;
    pool.emplace_back([&, lo, hi, t] {
      try {
        body(lo, hi);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Trapezoid input nodes: integer offsets n (node at origin + n h) covering
/// center +- half_width.
struct NodeRange {
  long lo = 0, hi = 0;
  long count() const { return hi - lo + 1; }
};

inline NodeRange node_range(double origin, double h, double center, double half_width) {
  return {static_cast<long>(std::floor((center - half_width - origin) / h)),
          static_cast<long>(std::ceil((center + half_width - origin) / h))};
}

inline int refine_factor(double h_out, double h_needed) {
  if (!(h_needed > 0.0)) throw ParameterError("histories: invalid input spacing bound");
  return std::max(1, static_cast<int>(std::ceil(h_out / h_needed - 1e-9)));
}

}  // namespace detail

/// Branch wavefunctions for every alpha in cg, plus the unwindowed state.
inline BranchSet compute_branches(const SystemParams& p, const CoarseGraining& cg,
                                  const GaussianState& particle, const PointerState& pointer,
                                  const GridSpec& grid, const HistoriesOptions& opt = {}) {
  p.validate();
  cg.validate();
  particle.validate();
  pointer.validate();
  grid.validate();

  const QuadraticKernel K = system_kernel(p);
  const double hbar = p.hbar, ell = K.ell;
  const double hx = grid.hx(), hX = grid.hX();
  const double x_lo = grid.x(0), X_lo = grid.X(0);
  const double x_hi = grid.x(grid.nx - 1), X_hi = grid.X(grid.nX - 1);
  const double c_ptr = K.pointer_mass / (2.0 * hbar * K.T);

  // --- input supports
  const double sx = opt.input_sigmas * particle.amplitude_sigma();
  const double ax_lo = particle.center - sx, ax_hi = particle.center + sx;
  double aX_lo = pointer.X0, aX_hi = pointer.X0;
  if (!pointer.sharp) {
    const double sX = opt.input_sigmas * pointer.packet.amplitude_sigma();
    aX_lo = pointer.packet.center - sX;
    aX_hi = pointer.packet.center + sX;
  }

  // --- bounds on the integrand's wavenumber in x' and X'
  const double s_min = 0.5 * (x_lo + ax_lo), s_max = 0.5 * (x_hi + ax_hi);
  const double u_min = X_lo - aX_hi, u_max = X_hi - aX_lo;
  const double w_max = std::max({std::abs(u_max - K.pointer_shift * s_min),
                                 std::abs(u_max - K.pointer_shift * s_max),
                                 std::abs(u_min - K.pointer_shift * s_min),
                                 std::abs(u_min - K.pointer_shift * s_max)});
  const double z_a = K.Z(s_min, u_min), z_b = K.Z(s_max, u_max);
  const double z_c = K.Z(s_min, u_max), z_d = K.Z(s_max, u_min);
  const double z_lo = std::min({z_a, z_b, z_c, z_d}), z_hi = std::max({z_a, z_b, z_c, z_d});
  // Farthest any Z gets from an edge whose Fresnel ringing still matters. The
  // ringing amplitude is l / (2 sqrt(pi) v) at distance v; edges that stay
  // beyond the floor over the whole support are left unresolved.
  const double v_cap = ell / (2.0 * std::sqrt(std::numbers::pi) * opt.ringing_floor);
  double edge_dist = 0.0;
  for (int a = cg.alpha_min; a <= cg.alpha_max + 1; ++a) {
    const double e = cg.lower(a);
    const double near = (e >= z_lo && e <= z_hi) ? 0.0 : std::min(std::abs(z_lo - e), std::abs(z_hi - e));
    if (near > v_cap) continue;
    edge_dist = std::max(edge_dist, std::min(v_cap, std::max(std::abs(z_lo - e), std::abs(z_hi - e))));
  }
  const double ring = 2.0 * edge_dist / (ell * ell);  // Fresnel ringing rate in Z
  const double x_abs = std::max(std::abs(x_lo), std::abs(x_hi));
  const double xin_abs = std::max(std::abs(ax_lo), std::abs(ax_hi));
  const double kx = (std::abs(K.a_cross) * x_abs + 2.0 * std::abs(K.a_in) * xin_abs) / hbar +
                    std::abs(particle.momentum) / hbar +
                    c_ptr * w_max * std::abs(K.pointer_shift) + 0.5 * std::abs(K.z_mean) * ring;
  const double kX = 2.0 * c_ptr * w_max + std::abs(K.z_pointer) * ring;
  const double gauss_guard = 11.0;  // trapezoid aliasing below exp(-30) for the Gaussians

  HistoriesDiagnostics diag;
  diag.x_refine = detail::refine_factor(hx, 2.0 * std::numbers::pi / (kx + gauss_guard / particle.width));
  const double hx_in = hx / diag.x_refine;
  const detail::NodeRange jr = detail::node_range(x_lo, hx_in, particle.center, sx);
  diag.n_x_in = static_cast<int>(jr.count());

  detail::NodeRange lr{0, 0};
  double hX_in = hX;
  if (!pointer.sharp) {
    diag.X_refine = detail::refine_factor(
        hX, 2.0 * std::numbers::pi / (kX + gauss_guard / pointer.packet.width));
    hX_in = hX / diag.X_refine;
    lr = detail::node_range(X_lo, hX_in, pointer.packet.center,
                            opt.input_sigmas * pointer.packet.amplitude_sigma());
    diag.n_X_in = static_cast<int>(lr.count());
  }

  // s lattice: s = x_lo + q h_s, q = i r + n_j with n_j in [jr.lo, jr.hi]
  const int r = diag.x_refine;
  const long q_lo = jr.lo, q_hi = static_cast<long>(grid.nx - 1) * r + jr.hi;
  const long n_q = q_hi - q_lo + 1;
  const double h_s = hx / (2.0 * r);
  diag.s_lattice = n_q;

  // u lattice: u = t hX_in, t = k rX - n_l (relative to X_lo)
  const int rX = diag.X_refine;
  const long t_lo = pointer.sharp ? 0 : -lr.hi;
  const long t_hi = pointer.sharp ? 0 : static_cast<long>(grid.nX - 1) * rX - lr.lo;
  const long n_t = t_hi - t_lo + 1;
  diag.u_lattice = pointer.sharp ? grid.nX : n_t;

  const int n_branch = cg.branch_count();
  const int n_edge = n_branch + 1;
  const int n_chan = n_edge + 1;  // edges, then the unwindowed channel
  std::vector<double> edges(n_edge);
  for (int e = 0; e < n_edge; ++e) edges[e] = cg.lower(cg.alpha_min + e);

  const double n_X_in = pointer.sharp ? 1.0 : double(diag.n_X_in);
  diag.work = double(n_q) * grid.nX * n_X_in * n_chan +
              double(grid.nx) * diag.n_x_in * grid.nX * n_chan;
  diag.erf_calls = (pointer.sharp ? n_q * grid.nX : n_q * n_t) * n_edge;
  const double bytes = double(n_q) * grid.nX * n_chan * sizeof(cplx);
  if (diag.work > opt.node_budget)
    throw BudgetError("histories: " + std::to_string(diag.work) + " multiply-adds exceed the node budget " +
                      std::to_string(opt.node_budget));
  if (bytes > opt.memory_budget)
    throw BudgetError("histories: lattice sums need " + std::to_string(bytes) + " bytes");

  // --- pointer-side sums H[q][k][c]
  std::vector<cplx> H(static_cast<std::size_t>(n_q) * grid.nX * n_chan);
  std::vector<cplx> pointer_weight;  // hX_in Phi_0(X'_l)
  if (!pointer.sharp) {
    pointer_weight.resize(diag.n_X_in);
    for (long l = lr.lo; l <= lr.hi; ++l)
      pointer_weight[l - lr.lo] = hX_in * pointer.packet.amplitude(X_lo + l * hX_in, hbar);
  }

  detail::parallel_rows(n_q, opt.threads, [&](long q0, long q1) {
    std::vector<cplx> F;  // edge erfs per u-lattice point
    for (long qi = q0; qi < q1; ++qi) {
      const double s = x_lo + (q_lo + qi) * h_s;
      cplx* out = &H[static_cast<std::size_t>(qi) * grid.nX * n_chan];
      if (pointer.sharp) {
        for (int k = 0; k < grid.nX; ++k) {
          const double u = grid.X(k) - pointer.X0;
          const double w = u - K.pointer_shift * s;
          const cplx phase = std::exp(cplx{0.0, c_ptr * w * w});
          const double Z = K.Z(s, u);
          for (int e = 0; e < n_edge; ++e) out[k * n_chan + e] = phase * edge_erf(Z - edges[e], ell);
          out[k * n_chan + n_edge] = phase;
        }
        continue;
      }
      F.resize(static_cast<std::size_t>(n_t) * n_edge);
      for (long t = t_lo; t <= t_hi; ++t) {
        const double Z = K.Z(s, t * hX_in);
        cplx* f = &F[static_cast<std::size_t>(t - t_lo) * n_edge];
        for (int e = 0; e < n_edge; ++e) f[e] = edge_erf(Z - edges[e], ell);
      }
      for (int k = 0; k < grid.nX; ++k) {
        cplx* acc = out + k * n_chan;
        for (long l = lr.lo; l <= lr.hi; ++l) {
          const long t = static_cast<long>(k) * rX - l;
          const double w = t * hX_in - K.pointer_shift * s;
          const cplx a = pointer_weight[l - lr.lo] * std::exp(cplx{0.0, c_ptr * w * w});
          const cplx* f = &F[static_cast<std::size_t>(t - t_lo) * n_edge];
          for (int e = 0; e < n_edge; ++e) acc[e] += a * f[e];
          acc[n_edge] += a;
        }
      }
    }
  });

  // --- particle-side contraction
  BranchSet set;
  set.cg = cg;
  set.branches.resize(n_branch);
  for (int b = 0; b < n_branch; ++b) {
    set.branches[b].alpha = cg.alpha_min + b;
    set.branches[b].grid = grid;
    set.branches[b].psi.assign(static_cast<std::size_t>(grid.nx) * grid.nX, 0.0);
  }
  set.evolved.alpha = 0;
  set.evolved.unwindowed = true;
  set.evolved.grid = grid;
  set.evolved.psi.assign(static_cast<std::size_t>(grid.nx) * grid.nX, 0.0);

  std::vector<cplx> particle_weight(diag.n_x_in);
  for (long j = jr.lo; j <= jr.hi; ++j) {
    const double xp = x_lo + j * hx_in;
    particle_weight[j - jr.lo] = hx_in * particle.amplitude(xp, hbar);
  }

  detail::parallel_rows(grid.nx, opt.threads, [&](long i0, long i1) {
    std::vector<cplx> acc(static_cast<std::size_t>(grid.nX) * n_chan);
    for (long i = i0; i < i1; ++i) {
      std::fill(acc.begin(), acc.end(), cplx{});
      const double x = grid.x(static_cast<int>(i));
      for (long j = jr.lo; j <= jr.hi; ++j) {
        const double xp = x_lo + j * hx_in;
        const cplx c = particle_weight[j - jr.lo] *
                       std::exp(cplx{0.0, (K.a_cross * x * xp + K.a_in * xp * xp) / hbar});
        const long qi = i * r + j - q_lo;
        const cplx* h = &H[static_cast<std::size_t>(qi) * grid.nX * n_chan];
        for (std::size_t n = 0; n < acc.size(); ++n) acc[n] += c * h[n];
      }
      const cplx pre = K.amplitude * std::exp(cplx{0.0, K.a_out * x * x / hbar});
      for (int k = 0; k < grid.nX; ++k) {
        const cplx* a = &acc[static_cast<std::size_t>(k) * n_chan];
        const std::size_t idx = static_cast<std::size_t>(i) * grid.nX + k;
        for (int b = 0; b < n_branch; ++b) set.branches[b].psi[idx] = 0.5 * pre * (a[b] - a[b + 1]);
        set.evolved.psi[idx] = pre * a[n_edge];
      }
    }
  });

  diag.evolved_norm = set.evolved.norm2();
  set.diagnostics = diag;
  if (!pointer.sharp && opt.check_leakage && 1.0 - diag.evolved_norm > opt.leakage_tolerance)
    throw GridTooSmallError("histories: " + std::to_string(1.0 - diag.evolved_norm) +
                                " of the evolved norm lies outside the grid",
                            1.5);
  return set;
}

inline BranchGrid branch_wavefunction(const SystemParams& p, CoarseGraining cg, int alpha,
                                      const GaussianState& particle, const PointerState& pointer,
                                      const GridSpec& grid, const HistoriesOptions& opt = {}) {
  cg.validate();
  cg.check(alpha);
  cg.alpha_min = cg.alpha_max = alpha;
  return std::move(compute_branches(p, cg, particle, pointer, grid, opt).branches.front());
}

inline BranchGrid evolve(const SystemParams& p, const GaussianState& particle,
                         const PointerState& pointer, const GridSpec& grid,
                         const HistoriesOptions& opt = {}) {
  // one placeholder window with edges out of reach; only the unwindowed
  // channel is returned
  CoarseGraining cg;
  cg.delta = 1e100;
  return std::move(compute_branches(p, cg, particle, pointer, grid, opt).evolved);
}

// ---------------------------------------------------------------------------
// Decoherence functional

struct DecoherenceMatrix {
  int alpha_min = 0;
  int n = 0;
  std::vector<cplx> D;  // D[a * n + b] = <Psi_a | Psi_b>
  cplx total{};         // sum over all entries

  cplx operator()(int a, int b) const { return D[static_cast<std::size_t>(a - alpha_min) * n + (b - alpha_min)]; }
  double probability(int a) const { return (*this)(a, a).real(); }
  double probability_sum() const {
    double s = 0.0;
    for (int a = 0; a < n; ++a) s += D[static_cast<std::size_t>(a) * n + a].real();
    return s;
  }
  cplx off_diagonal_sum() const {
    cplx s = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (a != b) s += D[static_cast<std::size_t>(a) * n + b];
    return s;
  }
  double hermiticity_defect() const {
    double m = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        m = std::max(m, std::abs(D[static_cast<std::size_t>(a) * n + b] -
                                 std::conj(D[static_cast<std::size_t>(b) * n + a])));
    return m;
  }
  double min_diagonal() const {
    double m = 1e300;
    for (int a = 0; a < n; ++a) m = std::min(m, D[static_cast<std::size_t>(a) * n + a].real());
    return m;
  }
};

inline DecoherenceMatrix decoherence_matrix(const std::vector<BranchGrid>& branches,
                                            int threads = 1) {
  if (branches.empty()) throw ParameterError("decoherence_matrix: no branches");
  const GridSpec& g = branches.front().grid;
  for (std::size_t b = 1; b < branches.size(); ++b) {
    if (!(branches[b].grid == g)) throw GridError("decoherence_matrix: branches on different grids");
    if (branches[b].alpha != branches[b - 1].alpha + 1)
      throw GridError("decoherence_matrix: branches must be consecutive in alpha");
  }
  DecoherenceMatrix M;
  M.alpha_min = branches.front().alpha;
  M.n = static_cast<int>(branches.size());
  M.D.assign(static_cast<std::size_t>(M.n) * M.n, 0.0);
  const double w = g.hx() * g.hX();
  const std::size_t len = branches.front().psi.size();
  // upper triangle by pairwise summation in a fixed order; the lower is its conjugate
  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < M.n; ++a)
    for (int b = a; b < M.n; ++b) pairs.emplace_back(a, b);
  detail::parallel_rows(static_cast<long>(pairs.size()), threads, [&](long p0, long p1) {
    for (long pi = p0; pi < p1; ++pi) {
      const auto [a, b] = pairs[pi];
      const auto& A = branches[a].psi;
      const auto& B = branches[b].psi;
      cplx s = 0.0;
      for (std::size_t n = 0; n < len; ++n) s += std::conj(A[n]) * B[n];
      M.D[static_cast<std::size_t>(a) * M.n + b] = s * w;
    }
  });
  for (int a = 0; a < M.n; ++a)
    for (int b = 0; b < a; ++b)
      M.D[static_cast<std::size_t>(a) * M.n + b] = std::conj(M.D[static_cast<std::size_t>(b) * M.n + a]);
  for (const cplx& v : M.D) M.total += v;
  return M;
}

inline constexpr double empty_branch_threshold = 1e-12;

/// max over a != a' of |D(a, a')| / sqrt(D(a, a) D(a', a')), skipping empty branches.
inline double decoherence_metric(const DecoherenceMatrix& M) {
  double eps = 0.0;
  int live = 0;
  for (int a = 0; a < M.n; ++a)
    if (M.D[static_cast<std::size_t>(a) * M.n + a].real() >= empty_branch_threshold) ++live;
  if (live == 0) throw DegenerateError("decoherence_metric: every branch is empty");
  for (int a = 0; a < M.n; ++a) {
    const double da = M.D[static_cast<std::size_t>(a) * M.n + a].real();
    if (da < empty_branch_threshold) continue;
    for (int b = 0; b < M.n; ++b) {
      if (b == a) continue;
      const double db = M.D[static_cast<std::size_t>(b) * M.n + b].real();
      if (db < empty_branch_threshold) continue;
      eps = std::max(eps, std::abs(M.D[static_cast<std::size_t>(a) * M.n + b]) / std::sqrt(da * db));
    }
  }
  return eps;
}

/// ||sum_a Psi_a - Psi(T)|| / ||Psi(T)||.
inline double completeness_defect(const BranchSet& set) {
  double num = 0.0, den = 0.0;
  const std::size_t len = set.evolved.psi.size();
  for (std::size_t n = 0; n < len; ++n) {
    cplx s = 0.0;
    for (const auto& b : set.branches) s += b.psi[n];
    num += std::norm(s - set.evolved.psi[n]);
    den += std::norm(set.evolved.psi[n]);
  }
  return std::sqrt(num / den);
}

// ---------------------------------------------------------------------------
// A complete histories problem, as read from a scenario

struct GridRequest {
  bool automatic = true;  // half-widths and centers from the evolved moments
  int nx = 96;
  int nX = 96;
  double sigmas = 7.0;
  GridSpec manual;        // used when automatic is false
};

struct HistoriesProblem {
  SystemParams params;
  CoarseGraining cg;
  bool auto_branches = true;
  GaussianState particle;
  PointerState pointer;
  GridRequest grid;

  void validate() const {
    params.validate();
    cg.validate();
    particle.validate();
    pointer.validate();
    if (grid.automatic) {
      if (pointer.sharp)
        throw ParameterError("HistoriesProblem: a sharp pointer needs an explicit grid");
      if (grid.nx < 16 || grid.nX < 16) throw ParameterError("GridSpec: nx and nX must be >= 16");
      if (!(grid.sigmas > 0.0)) throw ParameterError("GridRequest: sigmas must be > 0");
    } else {
      grid.manual.validate();
    }
  }
  GridSpec resolved_grid() const {
    if (!grid.automatic) return grid.manual;
    return auto_grid(params, particle, pointer, grid.nx, grid.nX, {grid.sigmas});
  }
  CoarseGraining resolved_branches() const {
    return auto_branches ? auto_branch_range(params, particle, pointer, cg) : cg;
  }
};

struct HistoriesResult {
  BranchSet set;
  DecoherenceMatrix D;
  double epsilon = 0.0;
};

inline HistoriesResult solve(const HistoriesProblem& prob, const HistoriesOptions& opt = {}) {
  prob.validate();
  HistoriesResult r;
  r.set = compute_branches(prob.params, prob.resolved_branches(), prob.particle, prob.pointer,
                           prob.resolved_grid(), opt);
  r.D = decoherence_matrix(r.set.branches, opt.threads);
  r.epsilon = decoherence_metric(r.D);
  return r;
}

}  // namespace decohist
