#pragma once

#include <array>
#include <stdexcept>

#include "cnls/field.hpp"
#include "cnls/grid.hpp"
#include "cnls/sylvester.hpp"

namespace cnls {

/// How the pointwise interaction g enters a step.
///
/// split: the matrices carry only the constant Laplacian part and the full
/// interaction is applied entrywise inside the fixed-point iteration; one
/// factorization then serves the whole run.
///
/// diagonal: the interaction is frozen at the diagonal samples g(W_jj) and
/// folded into the matrices, which are rebuilt every step; the step is then
/// a single linear solve. Kept as a comparison mode.
enum class NonlinearMode { split, diagonal };

/// gamma(i, j) = kappa * sigma_i * mu_j * sigma with sigma = l/h^2; the
/// weight of level j's stencil in equation i.
struct GammaTable {
  std::array<std::array<Complex, 3>, 2> value{};

  Complex gamma(int eq, int level) const {
    if (eq < 1 || eq > 2 || level < 1 || level > 3)
      throw std::out_of_range("GammaTable: indices are 1-based, eq in 1..2, level in 1..3");
    return value[eq - 1][level - 1];
  }
};

inline GammaTable make_gamma_table(const SchemeParams& p, const MeshRatio& ratio) {
  GammaTable t;
  const double ks = static_cast<double>(p.kappa) * ratio.sigma;
  t.value[0] = {Complex{ks * p.sigma1 * p.mu1, 0.0}, Complex{ks * p.sigma1 * p.mu2, 0.0},
                Complex{ks * p.sigma1 * p.mu3, 0.0}};
  t.value[1] = {Complex{ks * p.sigma2 * p.mu1, 0.0}, Complex{ks * p.sigma2 * p.mu2, 0.0},
                Complex{ks * p.sigma2 * p.mu3, 0.0}};
  return t;
}

/// Diagonal entries of the scheme matrices, one value per grid row.
///
/// Gamma1, Gamma2 collect the interaction sample minus the stencil center:
/// Gamma_i = (weight * g - 4 kappa sigma_i sigma) / 2. Lambda and Theta pair
/// them with +i/2 (new level), the tilde variants with -i/2 (old level); the
/// middle level uses mu2 * Gamma_i directly.
struct DiagCoefficients {
  ComplexField Gamma1, Gamma2;
  ComplexField Lambda, LambdaTilde;
  ComplexField Theta, ThetaTilde;
};

inline DiagCoefficients diag_coefficients(const ComplexField& u, const ComplexField& v,
                                          const SchemeParams& p, const MeshRatio& ratio,
                                          double weight) {
  if (u.rows() != v.rows() || u.cols() != v.cols())
    throw std::invalid_argument("diag_coefficients: shape mismatch");
  const double ks = static_cast<double>(p.kappa) * ratio.sigma;
  const Complex half_i{0.0, 0.5};

  DiagCoefficients c;
  RealField gu = g_field(u, v, p);
  RealField gv = g_field(v, u, p);
  const Eigen::Index rows = u.rows(), cols = u.cols();
  c.Gamma1.resize(rows, cols);
  c.Gamma2.resize(rows, cols);
  c.Lambda.resize(rows, cols);
  c.LambdaTilde.resize(rows, cols);
  c.Theta.resize(rows, cols);
  c.ThetaTilde.resize(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double g1 = 0.5 * (weight * gu(i, j) - 4.0 * ks * p.sigma1);
      const double g2 = 0.5 * (weight * gv(i, j) - 4.0 * ks * p.sigma2);
      c.Gamma1(i, j) = g1;
      c.Gamma2(i, j) = g2;
      c.Lambda(i, j) = half_i + p.mu1 * g1;
      c.LambdaTilde(i, j) = -half_i + p.mu3 * g1;
      c.Theta(i, j) = half_i + p.mu1 * g2;
      c.ThetaTilde(i, j) = -half_i + p.mu3 * g2;
    }
  }
  return c;
}

/// Coefficients with the interaction switched off (g = 0), the constant
/// tables the split mode factors once per run.
inline DiagCoefficients zero_diag_coefficients(int node_count, const SchemeParams& p,
                                               const MeshRatio& ratio) {
  ComplexField z = ComplexField::Zero(node_count, node_count);
  return diag_coefficients(z, z, p, ratio, 0.0);
}

namespace detail {

// Tridiagonal scheme matrix: `diag[j]` on the diagonal, `off` on the two
// neighbors, and the first and last rows double their single neighbor, which
// is the reflected ghost node of the homogeneous Neumann closure. Exactly
// 3(J+1) - 2 structural nonzeros.
inline ComplexField stencil_matrix(const Eigen::VectorXcd& diag, Complex off) {
  const Eigen::Index n = diag.size();
  ComplexField m = ComplexField::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    m(j, j) = diag(j);
    if (j > 0) m(j, j - 1) = off;
    if (j + 1 < n) m(j, j + 1) = off;
  }
  m(0, 1) *= 2.0;
  m(n - 1, n - 2) *= 2.0;
  return m;
}

}  // namespace detail

/// Builds the level-`level` matrix of equation 1 (A) or 2 (B). The diagonal
/// samples the coefficient field on the grid diagonal (j, j); in split mode
/// the coefficients come from zero_diag_coefficients and the sampling is
/// trivial.
inline ComplexField assemble_A(int level, const DiagCoefficients& c, const GammaTable& gamma,
                               const SchemeParams& p) {
  const Eigen::Index n = c.Gamma1.rows();
  Eigen::VectorXcd diag(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    switch (level) {
      case 1: diag(j) = c.Lambda(j, j); break;
      case 2: diag(j) = p.mu2 * c.Gamma1(j, j); break;
      case 3: diag(j) = c.LambdaTilde(j, j); break;
      default: throw std::out_of_range("assemble_A: level must be 1, 2 or 3");
    }
  }
  return detail::stencil_matrix(diag, gamma.gamma(1, level));
}

inline ComplexField assemble_B(int level, const DiagCoefficients& c, const GammaTable& gamma,
                               const SchemeParams& p) {
  const Eigen::Index n = c.Gamma2.rows();
  Eigen::VectorXcd diag(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    switch (level) {
      case 1: diag(j) = c.Theta(j, j); break;
      case 2: diag(j) = p.mu2 * c.Gamma2(j, j); break;
      case 3: diag(j) = c.ThetaTilde(j, j); break;
      default: throw std::out_of_range("assemble_B: level must be 1, 2 or 3");
    }
  }
  return detail::stencil_matrix(diag, gamma.gamma(2, level));
}

struct SchemeMatrices {
  ComplexField A1, A2, A3;  // equation 1, levels n+1 / n / n-1
  ComplexField B1, B2, B3;  // equation 2
  NonlinearMode mode = NonlinearMode::split;
  RightFactor right_factor = RightFactor::same;
  int J = 0;
};

inline SchemeMatrices assemble_matrices(const DiagCoefficients& c, const GammaTable& gamma,
                                        const SchemeParams& p,
                                        NonlinearMode mode = NonlinearMode::split,
                                        RightFactor rf = RightFactor::same) {
  SchemeMatrices m;
  m.A1 = assemble_A(1, c, gamma, p);
  m.A2 = assemble_A(2, c, gamma, p);
  m.A3 = assemble_A(3, c, gamma, p);
  m.B1 = assemble_B(1, c, gamma, p);
  m.B2 = assemble_B(2, c, gamma, p);
  m.B3 = assemble_B(3, c, gamma, p);
  m.mode = mode;
  m.right_factor = rf;
  m.J = static_cast<int>(c.Gamma1.rows()) - 1;
  return m;
}

namespace detail {

inline ComplexField two_sided(const ComplexField& a, const ComplexField& x, RightFactor rf) {
  return rf == RightFactor::same ? ComplexField(a * x + x * a)
                                 : ComplexField(a * x + x * a.transpose());
}

}  // namespace detail

/// Right-hand sides of the two level-(n+1) solves:
///   A1 X + X A1' = -(A2 U + U A2' + A3 U- + U- A3') - N_u + S_u
/// and the B analogue. `nonlinear` carries the entrywise interaction terms
/// (zero fields in diagonal mode), `source` the weight-scaled forcing
/// samples at level n, already on the correct side of the equation.
inline StatePair step_rhs(const ThreeLevelState& state, const SchemeMatrices& m,
                          const StatePair& nonlinear, const StatePair* source = nullptr) {
  const RightFactor rf = m.right_factor;
  ComplexField ru = -detail::two_sided(m.A2, state.current.u, rf) -
                    detail::two_sided(m.A3, state.previous.u, rf) - nonlinear.u;
  ComplexField rv = -detail::two_sided(m.B2, state.current.v, rf) -
                    detail::two_sided(m.B3, state.previous.v, rf) - nonlinear.v;
  if (source != nullptr) {
    ru += source->u;
    rv += source->v;
  }
  return {std::move(ru), std::move(rv)};
}

}  // namespace cnls
