#pragma once

// Brute-force Gram matrices by dense trapezoid quadrature, evaluating every
// basis function pointwise.

#include <Eigen/Dense>

#include "pfsi/basis.hpp"

namespace pfsi::oracles {

inline Eigen::MatrixXd time_gram(const TimeBasis& tb, int nodes = 10000) {
  const int n = tb.size();
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
  const double h = tb.T() / nodes;
  Eigen::VectorXd v(n);
  for (int q = 0; q < nodes; ++q) {
    for (int j = 0; j < n; ++j) v(j) = tb.value(j, q * h);
    G.noalias() += h * v * v.transpose();
  }
  return G;
}

/// H2 Gram: int s_i s_k + s_i' s_k' + s_i'' s_k''.
inline Eigen::MatrixXd beam_h2_gram(const BeamBasis& b, int nodes = 10000) {
  const int n = b.size();
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
  const double h = b.L() / nodes;
  Eigen::VectorXd v(n);
  for (int q = 0; q < nodes; ++q)
    for (int d = 0; d <= 2; ++d) {
      for (int i = 0; i < n; ++i) v(i) = b.value(i, q * h, d);
      G.noalias() += h * v * v.transpose();
    }
  return G;
}

/// L2(Omega) Gram of the vector fluid basis on an nodes x nodes tensor grid.
inline Eigen::MatrixXd fluid_gram(const FluidBasis& b, int nodes = 256) {
  const int n = b.size();
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
  const double hx = b.L() / nodes, hz = 2.0 * b.H() / nodes;
  Eigen::VectorXd v(n);
  for (int qx = 0; qx < nodes; ++qx)
    for (int qz = 0; qz < nodes; ++qz) {
      const double x = qx * hx, z = -b.H() + qz * hz;
      for (int i = 0; i < n; ++i) v(i) = b.value(i, x, z);
      // components are orthogonal unit vectors
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
          if (b.modes[static_cast<size_t>(i)].comp == b.modes[static_cast<size_t>(k)].comp) G(i, k) += hx * hz * v(i) * v(k);
    }
  return G;
}

}  // namespace pfsi::oracles
