#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <string>

#include "cnls/field.hpp"

namespace cnls {

/// Thrown when the spectrum of A admits lambda_i + lambda_j = 0, in which
/// case A X + X A' = C has no unique solution.
struct SingularOperator : std::runtime_error {
  double min_pair_sum;
  explicit SingularOperator(double m)
      : std::runtime_error("Lyapunov operator is singular: min |lambda_i + lambda_j| = " +
                           std::to_string(m)),
        min_pair_sum(m) {}
};

/// Which matrix multiplies from the right in A X + X A'.
///
/// `same` is the symmetric two-sided form. With the corner-doubled Neumann
/// matrices of this scheme, right multiplication by the same matrix folds
/// the ghost column onto column 1 instead of column 0; `transposed` uses
/// A^T on the right, which applies the fold consistently in both directions.
/// The distinction only matters for data that does not vanish on the
/// boundary.
enum class RightFactor { same, transposed };

/// One Schur factorization of A, reusable for any number of solves with
/// either right factor. Solution by back-substitution over the triangular
/// factor, one column at a time.
class LyapunovOperator {
 public:
  explicit LyapunovOperator(ComplexField a) : a_(std::move(a)) {
    if (a_.rows() != a_.cols()) throw std::invalid_argument("LyapunovOperator: matrix not square");
    if (a_.rows() < 1) throw std::invalid_argument("LyapunovOperator: empty matrix");
    Eigen::ComplexSchur<ComplexField> schur(a_);
    if (schur.info() != Eigen::Success)
      throw std::runtime_error("LyapunovOperator: Schur factorization failed");
    q_ = schur.matrixU();
    t_ = schur.matrixT();
    min_pair_sum_ = std::numeric_limits<double>::infinity();
    const Eigen::Index n = t_.rows();
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        min_pair_sum_ = std::min(min_pair_sum_, std::abs(t_(i, i) + t_(j, j)));
  }

  const ComplexField& matrix() const { return a_; }
  Eigen::VectorXcd eigenvalues() const { return t_.diagonal(); }
  double min_pair_sum() const { return min_pair_sum_; }
  bool invertible() const { return min_pair_sum_ > 1e-12 * a_.norm(); }

  ComplexField apply(const ComplexField& x, RightFactor rf = RightFactor::same) const {
    if (rf == RightFactor::same) return a_ * x + x * a_;
    return a_ * x + x * a_.transpose();
  }

  ComplexField solve(const ComplexField& c, RightFactor rf = RightFactor::same) const {
    if (c.rows() != a_.rows() || c.cols() != a_.cols())
      throw std::invalid_argument("LyapunovOperator::solve: shape mismatch");
    if (!invertible()) throw SingularOperator(min_pair_sum_);

    const Eigen::Index n = t_.rows();
    ComplexField y(n, n);
    if (rf == RightFactor::same) {
      // T Y + Y T = Q^H C Q, forward over columns: the Y T term only reaches
      // column k from columns j <= k.
      ComplexField ct = q_.adjoint() * c * q_;
      for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::VectorXcd rhs = ct.col(k);
        if (k > 0) rhs.noalias() -= y.leftCols(k) * t_.col(k).head(k);
        ComplexField tk = t_;
        tk.diagonal().array() += t_(k, k);
        y.col(k) = tk.triangularView<Eigen::Upper>().solve(rhs);
      }
      ComplexField x = q_ * y * q_.adjoint();
      check_residual(x, c, rf);
      return x;
    }
    // T Y + Y T^T = Q^H C conj(Q), backward: the Y T^T term reaches column k
    // from columns j >= k. The solution maps back through Q ... Q^T.
    ComplexField ct = q_.adjoint() * c * q_.conjugate();
    for (Eigen::Index k = n - 1; k >= 0; --k) {
      Eigen::VectorXcd rhs = ct.col(k);
      for (Eigen::Index j = k + 1; j < n; ++j) rhs.noalias() -= t_(k, j) * y.col(j);
      ComplexField tk = t_;
      tk.diagonal().array() += t_(k, k);
      y.col(k) = tk.triangularView<Eigen::Upper>().solve(rhs);
    }
    ComplexField x = q_ * y * q_.transpose();
    check_residual(x, c, rf);
    return x;
  }

 private:
  void check_residual(const ComplexField& x, const ComplexField& c, RightFactor rf) const {
    double scale = std::max(c.norm(), 1e-300);
    double rel = (apply(x, rf) - c).norm() / scale;
    if (!(rel <= 1e-10))
      throw std::runtime_error("LyapunovOperator::solve: residual check failed, rel = " +
                               std::to_string(rel));
  }

  ComplexField a_, q_, t_;
  double min_pair_sum_ = 0.0;
};

inline ComplexField solve_lyapunov(const ComplexField& a, const ComplexField& c,
                                   RightFactor rf = RightFactor::same) {
  return LyapunovOperator(a).solve(c, rf);
}

/// Dense reference solver: flattens A X + X A' = C to an n^2 x n^2 linear
/// system over row-major vec(X) and solves by LU. Exists to cross-check the
/// Schur path on small problems; refuses anything larger than 64 x 64.
inline ComplexField kronecker_oracle(const ComplexField& a, const ComplexField& c,
                                     RightFactor rf = RightFactor::same) {
  if (a.rows() != a.cols() || a.rows() != c.rows() || c.rows() != c.cols())
    throw std::invalid_argument("kronecker_oracle: shape mismatch");
  const Eigen::Index n = a.rows();
  if (n * n > 4096)
    throw std::invalid_argument("kronecker_oracle: problem too large, n^2 must stay <= 4096");

  ComplexField m = ComplexField::Zero(n * n, n * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index mm = 0; mm < n; ++mm) {
      const Eigen::Index row = j * n + mm;
      for (Eigen::Index k = 0; k < n; ++k) m(row, k * n + mm) += a(j, k);  // A X
      for (Eigen::Index l = 0; l < n; ++l) {
        // X A: entry (j,m) pulls X(j,l) A(l,m); transposed variant pulls
        // X(j,l) A(m,l).
        m(row, j * n + l) += (rf == RightFactor::same) ? a(l, mm) : a(mm, l);
      }
    }
  }

  Eigen::VectorXcd cv(n * n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index mm = 0; mm < n; ++mm) cv(j * n + mm) = c(j, mm);

  Eigen::PartialPivLU<ComplexField> lu(m);
  Eigen::VectorXcd xv = lu.solve(cv);
  double rel = (m * xv - cv).norm() / std::max(cv.norm(), 1e-300);
  if (!(rel <= 1e-8))
    throw std::runtime_error("kronecker_oracle: linear solve did not converge, rel = " +
                             std::to_string(rel));

  ComplexField x(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index mm = 0; mm < n; ++mm) x(j, mm) = xv(j * n + mm);
  return x;
}

struct SolvabilityReport {
  double min_pair_sum = 0.0;
  bool invertible = false;
  double deviation_from_i_id = 0.0;  // operator norm of X -> A X + X A - i X
};

/// Measures how far the two-sided operator sits from i times the identity.
/// The deviation is the spectral norm of L - i Id with L(X) = A X + X A,
/// estimated by power iteration on (L - i Id)^* (L - i Id) from a fixed
/// pseudo-random start, so the report is deterministic.
inline SolvabilityReport solvability_report(const ComplexField& a, int power_iterations = 50) {
  LyapunovOperator op(a);
  SolvabilityReport rep;
  rep.min_pair_sum = op.min_pair_sum();
  rep.invertible = op.invertible();

  const Eigen::Index n = a.rows();
  std::mt19937_64 rng(0x1f2e3d4c5b6a7988ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ComplexField z(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) z(i, j) = Complex{gauss(rng), gauss(rng)};
  z /= z.norm();

  const Complex iu{0.0, 1.0};
  const ComplexField ah = a.adjoint();
  double norm_sq = 0.0;
  for (int it = 0; it < power_iterations; ++it) {
    ComplexField lz = a * z + z * a - iu * z;
    ComplexField wz = ah * lz + lz * ah + iu * lz;
    norm_sq = wz.norm();  // Rayleigh-style estimate since |z| = 1
    if (norm_sq == 0.0) break;
    z = wz / norm_sq;
  }
  rep.deviation_from_i_id = std::sqrt(norm_sq);
  return rep;
}

}  // namespace cnls
