#pragma once

// Scenario parameters, coarse-graining geometry, the interval indicator and
// its smoothed (erf-difference) window, plus the product-form kernel shared by
// the free-particle and oscillator modules.

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "decohist/errors.hpp"
#include "decohist/specfun.hpp"

namespace decohist {

using cplx = std::complex<double>;

inline constexpr cplx imag_unit{0.0, 1.0};

/// exp(i pi/4), the square root of i used in all Fresnel-type arguments.
inline const cplx sqrt_i{std::numbers::sqrt2 / 2.0, std::numbers::sqrt2 / 2.0};

/// Guard band around caustics (sin wT = 0) and poles of g(T) (cos(wT/2) = 0).
inline constexpr double caustic_guard = 1e-6;

enum class SystemKind { free, oscillator };

inline std::string to_string(SystemKind k) { return k == SystemKind::free ? "free" : "oscillator"; }

struct SystemParams {
  SystemKind kind = SystemKind::free;
  double m = 1.0;      // particle mass
  double M = 1.0;      // pointer mass
  double g = 0.0;      // dimensionless coupling
  double omega = 0.0;  // oscillator angular frequency, 0 for the free particle
  double T = 1.0;      // measurement duration
  double hbar = 1.0;

  void validate() const {
    const auto positive = [](double v, const char* name) {
      if (!(std::isfinite(v) && v > 0.0))
        throw ParameterError(std::string("SystemParams: ") + name + " must be finite and > 0");
    };
    positive(m, "m");
    positive(M, "M");
    positive(T, "T");
    positive(hbar, "hbar");
    if (!std::isfinite(g)) throw ParameterError("SystemParams: g must be finite");
    if (!(std::isfinite(omega) && omega >= 0.0))
      throw ParameterError("SystemParams: omega must be finite and >= 0");
    if (kind == SystemKind::free && omega != 0.0)
      throw ParameterError("SystemParams: omega must be 0 for the free particle");
    if (kind == SystemKind::oscillator) {
      if (omega == 0.0) throw ParameterError("SystemParams: oscillator requires omega > 0");
      const double u = omega * T;
      if (std::abs(std::sin(u)) <= caustic_guard)
        throw CausticError("SystemParams: |sin(omega T)| within the caustic guard band");
      if (std::abs(std::cos(u / 2.0)) <= caustic_guard)
        throw CausticError("SystemParams: |cos(omega T / 2)| within the g(T) pole guard band");
    }
  }
};

/// Equal intervals (c_a - delta/2, c_a + delta/2] with c_a = xbar0 + a delta.
struct CoarseGraining {
  double delta = 1.0;
  double xbar0 = 0.0;
  int alpha_min = 0;
  int alpha_max = 0;

  void validate() const {
    if (!(std::isfinite(delta) && delta > 0.0))
      throw ParameterError("CoarseGraining: delta must be finite and > 0");
    if (!std::isfinite(xbar0)) throw ParameterError("CoarseGraining: xbar0 must be finite");
    if (alpha_max < alpha_min) throw ParameterError("CoarseGraining: alpha_max < alpha_min");
  }

  int branch_count() const { return alpha_max - alpha_min + 1; }
  bool contains(int alpha) const { return alpha >= alpha_min && alpha <= alpha_max; }
  void check(int alpha) const {
    if (!contains(alpha))
      throw RangeError("CoarseGraining: alpha " + std::to_string(alpha) + " outside [" +
                       std::to_string(alpha_min) + ", " + std::to_string(alpha_max) + "]");
  }

  double center(int alpha) const { return xbar0 + alpha * delta; }
  double lower(int alpha) const { return xbar0 + (alpha - 0.5) * delta; }
  double upper(int alpha) const { return xbar0 + (alpha + 0.5) * delta; }

  /// The unique interval index over all integers whose interval holds xbar.
  int branch_of(double xbar) const {
    int a = static_cast<int>(std::ceil((xbar - xbar0) / delta - 0.5));
    // settle rounding at the edges against the exact edge expressions
    while (xbar <= lower(a)) --a;
    while (xbar > upper(a)) ++a;
    return a;
  }
};

/// Boundary coordinates of a matrix element <x_out, X_out| . |x_in, X_in>.
struct Endpoints {
  double x_in = 0.0;
  double x_out = 0.0;
  double X_in = 0.0;
  double X_out = 0.0;
};

/// (2 / (pi d^2))^{1/4} exp(-(x - c)^2 / d^2 + i p (x - c) / hbar).
struct GaussianState {
  double center = 0.0;
  double width = 1.0;
  double momentum = 0.0;

  void validate() const {
    if (!(std::isfinite(width) && width > 0.0))
      throw ParameterError("GaussianState: width must be finite and > 0");
    if (!std::isfinite(center) || !std::isfinite(momentum))
      throw ParameterError("GaussianState: center and momentum must be finite");
  }

  cplx amplitude(double x, double hbar) const {
    const double y = x - center;
    const double norm = std::pow(2.0 / (std::numbers::pi * width * width), 0.25);
    return norm * std::exp(cplx{-y * y / (width * width), momentum * y / hbar});
  }

  /// Standard deviation of the amplitude profile exp(-y^2/d^2), i.e. d / sqrt 2.
  double amplitude_sigma() const { return width / std::numbers::sqrt2; }
};

inline int indicator(const CoarseGraining& cg, int alpha, double xbar) {
  cg.check(alpha);
  return (xbar > cg.lower(alpha) && xbar <= cg.upper(alpha)) ? 1 : 0;
}

/// erf(v / (sqrt(i) l)). For |v| / l >= 8 the asymptotic erfc series is
/// summed in real arithmetic: with q = |v| e^{-i pi/4} / l, q^2 = -i t and
/// 1 / (2 q^2) = i / (2 t), t = v^2 / l^2.
inline cplx edge_erf(double v, double ell) {
  const double r = std::abs(v) / ell;
  if (r < specfun::asymptotic_radius) return specfun::cerf(v / (sqrt_i * ell));
  const double t = r * r, h = 0.5 / t;
  double sr = 1.0, si = 0.0, ar = 1.0, ai = 0.0;
  for (int k = 1; k <= 40; ++k) {
    const double c = -(2 * k - 1) * h;  // term *= i c
    const double nr = -ai * c, ni = ar * c;
    ar = nr;
    ai = ni;
    sr += ar;
    si += ai;
    if (ar * ar + ai * ai < 1e-34) break;
  }
  // erfc(q) = e^{i t} e^{i pi/4} / (r sqrt(pi)) * series
  const double ph = t + 0.25 * std::numbers::pi;
  const double amp = 1.0 / (r * std::sqrt(std::numbers::pi));
  const double cr = amp * std::cos(ph), ci = amp * std::sin(ph);
  const cplx erfc{cr * sr - ci * si, cr * si + ci * sr};
  return v > 0.0 ? 1.0 - erfc : erfc - 1.0;
}

/// Smoothed window 1/2 {erf[(Z - lower)/(sqrt(i) l)] - erf[(Z - upper)/(sqrt(i) l)]}.
inline cplx window_E(double Z, double ell, const CoarseGraining& cg, int alpha) {
  if (!(ell > 0.0)) throw ParameterError("window_E: ell must be > 0");
  cg.check(alpha);
  return 0.5 * (edge_erf(Z - cg.lower(alpha), ell) - edge_erf(Z - cg.upper(alpha), ell));
}

/// Kernel of the form amplitude * exp(i S / hbar) with
///   S = a_out x^2 + a_cross x x' + a_in x'^2 + (M_eff / 2T) (u - shift s)^2,
/// s = (x + x')/2, u = X - X', and window argument Z = z_mean s + z_pointer u.
/// Both quadratic systems reduce to this form.
struct QuadraticKernel {
  double hbar = 1.0;
  double T = 1.0;
  cplx amplitude{};
  double a_out = 0.0;
  double a_cross = 0.0;
  double a_in = 0.0;
  double pointer_mass = 1.0;
  double pointer_shift = 0.0;
  double z_mean = 1.0;
  double z_pointer = 0.0;
  double ell = 1.0;

  double particle_action(double x_out, double x_in) const {
    return a_out * x_out * x_out + a_cross * x_out * x_in + a_in * x_in * x_in;
  }
  double pointer_action(double s, double u) const {
    const double w = u - pointer_shift * s;
    return pointer_mass / (2.0 * T) * w * w;
  }
  double action(const Endpoints& ep) const {
    const double s = 0.5 * (ep.x_out + ep.x_in);
    return particle_action(ep.x_out, ep.x_in) + pointer_action(s, ep.X_out - ep.X_in);
  }
  double Z(double s, double u) const { return z_mean * s + z_pointer * u; }
  double Z(const Endpoints& ep) const {
    return Z(0.5 * (ep.x_out + ep.x_in), ep.X_out - ep.X_in);
  }
  cplx propagator(const Endpoints& ep) const {
    return amplitude * std::exp(cplx{0.0, action(ep) / hbar});
  }
};

}  // namespace decohist
