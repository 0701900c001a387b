#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "cnls/grid.hpp"

namespace cnls {

using Complex = std::complex<double>;

/// Field values on the tensor grid: entry (j, m) lives at (x_j, y_m).
using ComplexField = Eigen::MatrixXcd;
using RealField = Eigen::MatrixXd;

struct StatePair {
  ComplexField u;
  ComplexField v;
};

/// The three-level marching window. `current` holds level n at time t,
/// `previous` holds level n-1; the next advance produces level n+1.
struct ThreeLevelState {
  StatePair previous;
  StatePair current;
  int n = 1;
  double t = 0.0;
};

/// g(a, b) = |a|^{p-1} + lambda |b|^2, the local interaction felt by the
/// component whose amplitude is `a`.
inline double g_eval(Complex a, Complex b, const SchemeParams& p) {
  return std::pow(std::abs(a), p.power - 1.0) + p.lambda * std::norm(b);
}

inline Complex f_eval(Complex a, Complex b, const SchemeParams& p) {
  return g_eval(a, b, p) * a;
}

/// Entrywise g over two fields of identical shape.
inline RealField g_field(const ComplexField& a, const ComplexField& b, const SchemeParams& p) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("g_field: shape mismatch");
  RealField out(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out(i, j) = g_eval(a(i, j), b(i, j), p);
  return out;
}

/// Barycentric blend of the three levels, mu1 * next + mu2 * curr + mu3 * prev.
inline ComplexField bar_average(const ComplexField& next, const ComplexField& curr,
                                const ComplexField& prev, const SchemeParams& p) {
  return p.mu1 * next + p.mu2 * curr + p.mu3 * prev;
}

/// Frobenius norm, the discrete L2 norm used throughout (no h scaling).
inline double l2_norm(const ComplexField& x) { return x.norm(); }

inline bool all_finite(const ComplexField& x) { return x.allFinite(); }

}  // namespace cnls
