#pragma once

// First and second moments of the evolved Gaussian state. The dynamics are
// linear, so the Heisenberg map v(T) = exp(A T) v(0) on v = (x, p, X, P)
// carries means and covariances exactly. The time average of x uses the
// integral of exp(A t), read off the exponential of an augmented matrix.

#include <cmath>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "decohist/core.hpp"

namespace decohist {

struct StateMoments {
  Eigen::Vector4d mean = Eigen::Vector4d::Zero();  // (x, p, X, P) at T
  Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();
  double xbar_mean = 0.0;
  double xbar_var = 0.0;

  double sd(int i) const { return std::sqrt(std::max(cov(i, i), 0.0)); }
  double xbar_sd() const { return std::sqrt(std::max(xbar_var, 0.0)); }
};

inline Eigen::Matrix4d heisenberg_generator(const SystemParams& p) {
  Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
  A(0, 1) = 1.0 / p.m;
  A(1, 0) = -p.m * p.omega * p.omega;
  A(1, 3) = -p.g / p.T;
  A(2, 0) = p.g / p.T;
  A(2, 3) = 1.0 / p.M;
  return A;
}

/// The pointer width enters only when it is a wavepacket; pass
/// pointer_width <= 0 for a sharp pointer (its moments are then left at the
/// sharp value with zero spread in X and infinite spread in P, which callers
/// must not use).
inline StateMoments evolved_moments(const SystemParams& p, const GaussianState& particle,
                                    double pointer_center, double pointer_width) {
  p.validate();
  const Eigen::Matrix4d A = heisenberg_generator(p);
  Eigen::Matrix<double, 8, 8> aug = Eigen::Matrix<double, 8, 8>::Zero();
  aug.topLeftCorner<4, 4>() = A * p.T;
  aug.topRightCorner<4, 4>() = Eigen::Matrix4d::Identity() * p.T;
  const Eigen::Matrix<double, 8, 8> e = aug.exp();
  const Eigen::Matrix4d Phi = e.topLeftCorner<4, 4>();
  const Eigen::Matrix4d avg = e.topRightCorner<4, 4>() / p.T;  // (1/T) int_0^T exp(A t) dt

  const double d = particle.width;
  Eigen::Vector4d v0(particle.center, particle.momentum, pointer_center, 0.0);
  Eigen::Matrix4d S0 = Eigen::Matrix4d::Zero();
  S0(0, 0) = d * d / 4.0;
  S0(1, 1) = p.hbar * p.hbar / (d * d);
  if (pointer_width > 0.0) {
    S0(2, 2) = pointer_width * pointer_width / 4.0;
    S0(3, 3) = p.hbar * p.hbar / (pointer_width * pointer_width);
  }
  StateMoments m;
  m.mean = Phi * v0;
  m.cov = Phi * S0 * Phi.transpose();
  const Eigen::RowVector4d row = avg.row(0);
  m.xbar_mean = row * v0;
  m.xbar_var = row * S0 * row.transpose();
  return m;
}

}  // namespace decohist
