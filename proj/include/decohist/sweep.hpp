#pragma once

// Classical-limit and coarseness sweeps. An hbar sweep rescales hbar with
// everything else fixed; a delta sweep rescales the interval width. Each row
// rebuilds the derived constants, grid and branch range and recomputes the
// decoherence matrix.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "decohist/histories.hpp"

namespace decohist {

enum class SweepAxis { hbar, delta };

inline std::string to_string(SweepAxis a) { return a == SweepAxis::hbar ? "hbar" : "delta"; }

struct SweepSpec {
  SweepAxis axis = SweepAxis::hbar;
  std::vector<double> factors{1.0, 0.25, 0.0625};
  HistoriesProblem base;

  void validate() const {
    if (factors.size() < 3) throw ParameterError("SweepSpec: at least 3 factors are required");
    for (double f : factors)
      if (!(std::isfinite(f) && f > 0.0)) throw ParameterError("SweepSpec: factors must be finite and > 0");
    for (std::size_t i = 1; i < factors.size(); ++i) {
      const bool ok = axis == SweepAxis::hbar ? factors[i] < factors[i - 1] : factors[i] > factors[i - 1];
      if (!ok)
        throw ParameterError(axis == SweepAxis::hbar
                                 ? "SweepSpec: hbar factors must be strictly decreasing"
                                 : "SweepSpec: delta factors must be strictly increasing");
    }
    base.validate();
  }
};

struct SweepRow {
  double factor = 1.0;
  double hbar = 1.0;
  double delta = 1.0;
  double ell = 0.0;
  double ell_over_delta = 0.0;
  double t_spread = 0.0;
  double epsilon = std::numeric_limits<double>::quiet_NaN();
  double window_deviation = 0.0;
  double completeness = 0.0;
  int branch_count = 0;
  int nx = 0, nX = 0;
  int x_refine = 0, X_refine = 0;
  double work = 0.0;
  bool budget_limited = false;  // grid coarser than the scaling rule asks for
  bool computed = false;        // false when even the coarsest grid was over budget
};

/// max |window_E - indicator| over Z within 3 delta of the centre interval,
/// excluding neighborhoods of half-width `exclusion` around its two edges.
inline double window_deviation(double ell, const CoarseGraining& cg, double exclusion,
                               int samples = 4001) {
  CoarseGraining one = cg;
  one.alpha_min = one.alpha_max = 0;
  const double lo = one.lower(0), up = one.upper(0);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double Z = one.center(0) - 3.0 * cg.delta + 6.0 * cg.delta * i / (samples - 1);
    if (std::abs(Z - lo) < exclusion || std::abs(Z - up) < exclusion) continue;
    const double ind = (Z > lo && Z <= up) ? 1.0 : 0.0;
    worst = std::max(worst, std::abs(window_E(Z, ell, one, 0) - ind));
  }
  return worst;
}

namespace detail {

inline int scaled_count(int n0, double half_width, double base_half_width, double spacing_scale) {
  const double h0 = 2.0 * base_half_width / (n0 - 1);
  const double n = std::ceil(2.0 * half_width / (h0 * spacing_scale) - 1e-9) + 1.0;
  return std::max(n0, static_cast<int>(std::min(n, 1e6)));
}

}  // namespace detail

/// Rows in factor order. The exclusion zone of the window check is fixed at
/// 3 l of the base row so that the deviation measures the shrinking of l.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, const HistoriesOptions& opt = {}) {
  spec.validate();
  const GridSpec base_grid = spec.base.resolved_grid();
  const double base_ell = system_constants(spec.base.params).ell;
  const double exclusion = 3.0 * base_ell;

  std::vector<SweepRow> rows;
  for (double f : spec.factors) {
    HistoriesProblem prob = spec.base;
    SweepRow row;
    row.factor = f;
    if (spec.axis == SweepAxis::hbar)
      prob.params.hbar *= f;
    else
      prob.cg.delta *= f;
    row.hbar = prob.params.hbar;
    row.delta = prob.cg.delta;
    row.ell = system_constants(prob.params).ell;
    row.ell_over_delta = row.ell / row.delta;
    row.t_spread = prob.particle.width * prob.particle.width * prob.params.m / (2.0 * prob.params.hbar);
    row.window_deviation = window_deviation(row.ell, prob.cg, exclusion);

    // output spacing proportional to sqrt(hbar); the point count never drops below the base
    GridSpec g = prob.resolved_grid();
    const double scale = spec.axis == SweepAxis::hbar ? std::sqrt(f) : 1.0;
    const int want_x = detail::scaled_count(base_grid.nx, g.Lx, base_grid.Lx, scale);
    const int want_X = detail::scaled_count(base_grid.nX, g.LX, base_grid.LX, scale);
    const CoarseGraining cg = prob.resolved_branches();
    row.branch_count = cg.branch_count();

    double shrink = 1.0;
    while (true) {
      g.nx = std::max(16, static_cast<int>(std::lround(want_x * shrink)));
      g.nX = std::max(16, static_cast<int>(std::lround(want_X * shrink)));
      try {
        const BranchSet set = compute_branches(prob.params, cg, prob.particle, prob.pointer, g, opt);
        const DecoherenceMatrix D = decoherence_matrix(set.branches, opt.threads);
        row.epsilon = decoherence_metric(D);
        row.completeness = completeness_defect(set);
        row.x_refine = set.diagnostics.x_refine;
        row.X_refine = set.diagnostics.X_refine;
        row.work = set.diagnostics.work;
        row.computed = true;
        break;
      } catch (const BudgetError&) {
        row.budget_limited = true;
        if (g.nx == 16 && g.nX == 16) break;
        shrink *= 0.8;
      }
    }
    row.nx = g.nx;
    row.nX = g.nX;
    rows.push_back(row);
  }
  return rows;
}

struct SweepVerdict {
  bool all_computed = true;
  bool strictly_decreasing = true;
  bool final_below = false;        // epsilon(final) < 0.01
  bool ratio_met = false;          // epsilon(first) > 5 epsilon(final)
  bool window_converging = true;   // window deviation strictly decreasing
  bool passed() const {
    return all_computed && strictly_decreasing && final_below && ratio_met && window_converging;
  }
};

inline constexpr double classical_epsilon_bound = 0.01;
inline constexpr double classical_decay_ratio = 5.0;

inline SweepVerdict assess_hbar_sweep(const std::vector<SweepRow>& rows) {
  SweepVerdict v;
  if (rows.empty()) {
    v.all_computed = false;
    return v;
  }
  for (const auto& r : rows) v.all_computed = v.all_computed && r.computed;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    v.strictly_decreasing = v.strictly_decreasing && rows[i].epsilon < rows[i - 1].epsilon;
    v.window_converging = v.window_converging && rows[i].window_deviation < rows[i - 1].window_deviation;
  }
  v.final_below = rows.back().epsilon < classical_epsilon_bound;
  v.ratio_met = rows.front().epsilon > classical_decay_ratio * rows.back().epsilon;
  return v;
}

}  // namespace decohist
