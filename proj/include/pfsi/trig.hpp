#pragma once

// One-dimensional real trigonometric families and uniform periodic grids.
//
// Mode index convention, shared by every family in the library:
//   0      -> 1
//   2k - 1 -> sin(k w x)
//   2k     -> cos(k w x),      w = 2 pi / period.

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "pfsi/errors.hpp"

namespace pfsi {

enum class TrigKind { Const, Sin, Cos };

struct TrigFamily {
  double period = 1.0;
  int K = 0;  // highest harmonic

  int size() const { return 2 * K + 1; }

  static int harmonic(int idx) { return (idx + 1) / 2; }
  static TrigKind kind(int idx) {
    if (idx == 0) return TrigKind::Const;
    return (idx % 2 == 1) ? TrigKind::Sin : TrigKind::Cos;
  }
  static int index(int k, TrigKind kind) {
    if (kind == TrigKind::Const || k == 0) return 0;
    return kind == TrigKind::Sin ? 2 * k - 1 : 2 * k;
  }

  double omega() const { return 2.0 * std::numbers::pi / period; }
  double wavenumber(int idx) const { return omega() * harmonic(idx); }

  /// d-th derivative of mode idx at x, in closed form.
  double value(int idx, double x, int d = 0) const {
    if (idx == 0) return d == 0 ? 1.0 : 0.0;
    const double k = wavenumber(idx);
    const double s = std::sin(k * x), c = std::cos(k * x);
    const double kd = std::pow(k, d);
    const bool is_sin = kind(idx) == TrigKind::Sin;
    // derivative cycle of sin: sin, cos, -sin, -cos; of cos: cos, -sin, -cos, sin
    switch (d % 4) {
      case 0: return kd * (is_sin ? s : c);
      case 1: return kd * (is_sin ? c : -s);
      case 2: return kd * (is_sin ? -s : -c);
      default: return kd * (is_sin ? -c : s);
    }
  }

  /// Coefficient map of d/dx on this family: (d/dx) sum a_p chi_p = sum (D a)_p chi_p.
  Eigen::MatrixXd derivative_matrix() const {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(size(), size());
    for (int k = 1; k <= K; ++k) {
      const double w = omega() * k;
      const int is = 2 * k - 1, ic = 2 * k;
      D(ic, is) = w;    // (sin)' = w cos
      D(is, ic) = -w;   // (cos)' = -w sin
    }
    return D;
  }

  /// Mean-free antiderivative on the family (inverse of d/dx on non-constant modes).
  Eigen::MatrixXd antiderivative_matrix() const {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(size(), size());
    for (int k = 1; k <= K; ++k) {
      const double w = omega() * k;
      const int is = 2 * k - 1, ic = 2 * k;
      A(is, ic) = 1.0 / w;   // int cos = sin / w
      A(ic, is) = -1.0 / w;  // int sin = -cos / w  (mean-free part)
    }
    return A;
  }

  /// Diagonal of the L2(0, period) Gram matrix.
  Eigen::VectorXd gram_diagonal() const {
    Eigen::VectorXd g = Eigen::VectorXd::Constant(size(), 0.5 * period);
    g(0) = period;
    return g;
  }
};

/// Uniform periodic nodes origin + j * period / n, j = 0..n-1. Trapezoid weights.
struct UniformGrid1D {
  double origin = 0.0;
  double period = 1.0;
  int n = 1;

  double node(int j) const { return origin + period * static_cast<double>(j) / n; }
  double weight() const { return period / n; }

  /// Rows: nodes, columns: family modes, entries: d-th derivative values.
  Eigen::MatrixXd table(const TrigFamily& fam, int d = 0) const {
    Eigen::MatrixXd M(n, fam.size());
    for (int j = 0; j < n; ++j)
      for (int p = 0; p < fam.size(); ++p) M(j, p) = fam.value(p, node(j), d);
    return M;
  }
};

/// Space-time grid on Omega x (0,T); flat layout index ((t * nz) + z) * nx + x.
struct Grid3 {
  UniformGrid1D x, z, t;

  int nx() const { return x.n; }
  int nz() const { return z.n; }
  int nt() const { return t.n; }
  Eigen::Index size() const { return Eigen::Index(x.n) * z.n * t.n; }
  Eigen::Index at(int ix, int iz, int it) const {
    return (Eigen::Index(it) * z.n + iz) * x.n + ix;
  }
  double cell() const { return x.weight() * z.weight() * t.weight(); }
  bool conforms(const Grid3& o) const { return x.n == o.x.n && z.n == o.z.n && t.n == o.t.n; }
};

/// Grid on Gamma x (0,T); flat layout index t * nx + x.
struct Grid2 {
  UniformGrid1D x, t;

  int nx() const { return x.n; }
  int nt() const { return t.n; }
  Eigen::Index size() const { return Eigen::Index(x.n) * t.n; }
  Eigen::Index at(int ix, int it) const { return Eigen::Index(it) * x.n + ix; }
  double cell() const { return x.weight() * t.weight(); }
};

}  // namespace pfsi
