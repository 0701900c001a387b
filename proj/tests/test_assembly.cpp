#include <catch2/catch_amalgamated.hpp>

#include "cnls/assembly.hpp"
#include "cnls/grid.hpp"

using namespace cnls;

namespace {

SchemeParams params_with(double s1, double s2, double mu1, double mu2, double mu3) {
  return make_scheme_params(s1, s2, 1.0, 2.5, mu1, mu2, mu3, 2);
}

int count_nonzeros(const ComplexField& m) {
  int count = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (m(i, j) != Complex{0.0, 0.0}) ++count;
  return count;
}

}  // namespace

TEST_CASE("gamma table holds kappa * sigma_i * mu_j * sigma") {
  SchemeParams p = params_with(1.0, 3.0, 0.25, 0.5, 0.25);
  MeshRatio ratio{0.5, false};
  GammaTable t = make_gamma_table(p, ratio);
  REQUIRE(t.gamma(1, 1).real() == Catch::Approx(2.0 * 1.0 * 0.25 * 0.5));
  REQUIRE(t.gamma(1, 2).real() == Catch::Approx(2.0 * 1.0 * 0.5 * 0.5));
  REQUIRE(t.gamma(1, 3).real() == Catch::Approx(2.0 * 1.0 * 0.25 * 0.5));
  REQUIRE(t.gamma(2, 1).real() == Catch::Approx(2.0 * 3.0 * 0.25 * 0.5));
  REQUIRE(t.gamma(2, 2).real() == Catch::Approx(2.0 * 3.0 * 0.5 * 0.5));
  REQUIRE(t.gamma(1, 1).imag() == 0.0);
  REQUIRE_THROWS_AS(t.gamma(0, 1), std::out_of_range);
  REQUIRE_THROWS_AS(t.gamma(3, 1), std::out_of_range);
  REQUIRE_THROWS_AS(t.gamma(1, 0), std::out_of_range);
  REQUIRE_THROWS_AS(t.gamma(1, 4), std::out_of_range);
}

TEST_CASE("zero-interaction coefficients reduce to the stencil constants") {
  SchemeParams p = params_with(1.0, 2.0, 0.25, 0.5, 0.25);
  MeshRatio ratio{0.5, false};
  DiagCoefficients c = zero_diag_coefficients(6, p, ratio);
  const double ks = 2.0 * 0.5;  // kappa * sigma
  REQUIRE(c.Gamma1(2, 3).real() == Catch::Approx(-2.0 * ks * 1.0));
  REQUIRE(c.Gamma2(2, 3).real() == Catch::Approx(-2.0 * ks * 2.0));
  REQUIRE(c.Lambda(0, 0) == Complex{0.25 * -2.0 * ks, 0.5});
  REQUIRE(c.LambdaTilde(0, 0) == Complex{0.25 * -2.0 * ks, -0.5});
  REQUIRE(c.Theta(5, 5).imag() == Catch::Approx(0.5));
  REQUIRE(c.ThetaTilde(5, 5).imag() == Catch::Approx(-0.5));
}

TEST_CASE("interaction samples enter the diagonal coefficients") {
  SchemeParams p = params_with(1.0, 1.0, 0.25, 0.5, 0.25);
  MeshRatio ratio{0.25, false};
  ComplexField u = ComplexField::Constant(4, 4, Complex{1.0, 0.0});
  ComplexField v = ComplexField::Constant(4, 4, Complex{0.0, 2.0});
  const double weight = 0.8;
  DiagCoefficients c = diag_coefficients(u, v, p, ratio, weight);
  const double g = 1.0 + 4.0;  // |1|^{3/2} + |2i|^2
  const double expected = 0.5 * (weight * g - 4.0 * 2.0 * 0.25);
  REQUIRE(c.Gamma1(1, 2).real() == Catch::Approx(expected));
  REQUIRE(c.Lambda(1, 2) == Complex{0.25 * expected, 0.5});

  ComplexField bad(3, 4);
  REQUIRE_THROWS_AS(diag_coefficients(u, bad, p, ratio, weight), std::invalid_argument);
}

TEST_CASE("scheme matrices have the tridiagonal profile with doubled corners") {
  SchemeParams p = params_with(1.0, 1.0, 0.25, 0.5, 0.25);
  MeshRatio ratio{0.5, false};
  const int n = 10;  // J = 9
  DiagCoefficients c = zero_diag_coefficients(n, p, ratio);
  GammaTable t = make_gamma_table(p, ratio);

  ComplexField a1 = assemble_A(1, c, t, p);
  REQUIRE(count_nonzeros(a1) == 3 * n - 2);
  const Complex off = t.gamma(1, 1);
  REQUIRE(a1(0, 1) == 2.0 * off);
  REQUIRE(a1(n - 1, n - 2) == 2.0 * off);
  REQUIRE(a1(3, 4) == off);
  REQUIRE(a1(4, 3) == off);
  REQUIRE(a1(1, 0) == off);  // only the first row doubles its neighbor
  REQUIRE(a1(2, 2) == c.Lambda(2, 2));

  ComplexField a2 = assemble_A(2, c, t, p);
  REQUIRE(a2(2, 2) == 0.5 * c.Gamma1(2, 2));  // mu2 * Gamma1
  REQUIRE(a2(0, 1) == 2.0 * t.gamma(1, 2));

  ComplexField a3 = assemble_A(3, c, t, p);
  REQUIRE(a3(2, 2) == c.LambdaTilde(2, 2));

  REQUIRE_THROWS_AS(assemble_A(0, c, t, p), std::out_of_range);
  REQUIRE_THROWS_AS(assemble_A(4, c, t, p), std::out_of_range);
}

TEST_CASE("B matrices scale with sigma2") {
  SchemeParams p = params_with(1.0, 3.0, 0.25, 0.5, 0.25);
  MeshRatio ratio{0.5, false};
  DiagCoefficients c = zero_diag_coefficients(5, p, ratio);
  GammaTable t = make_gamma_table(p, ratio);
  ComplexField b1 = assemble_B(1, c, t, p);
  REQUIRE(b1(1, 2) == t.gamma(2, 1));
  REQUIRE(b1(1, 2).real() == Catch::Approx(3.0 * assemble_A(1, c, t, p)(1, 2).real()));
}

TEST_CASE("with g = 0 the three levels sum to the discrete Laplacian") {
  // off-diagonals of A1 + A2 + A3 add to kappa*sigma1*sigma (twice that at the
  // folded corners) and diagonals to -2*kappa*sigma1*sigma; the i/2 terms of
  // levels 1 and 3 cancel.
  SchemeParams p = params_with(1.5, 1.0, 0.3, 0.4, 0.3);
  MeshRatio ratio{0.8, false};
  const int n = 7;
  DiagCoefficients c = zero_diag_coefficients(n, p, ratio);
  GammaTable t = make_gamma_table(p, ratio);
  ComplexField sum = assemble_A(1, c, t, p) + assemble_A(2, c, t, p) + assemble_A(3, c, t, p);
  const double ks1 = 2.0 * 1.5 * 0.8;  // kappa * sigma1 * sigma
  for (int j = 0; j < n; ++j) {
    REQUIRE(sum(j, j).real() == Catch::Approx(-2.0 * ks1));
    REQUIRE(sum(j, j).imag() == Catch::Approx(0.0).margin(1e-15));
  }
  REQUIRE(sum(0, 1).real() == Catch::Approx(2.0 * ks1).epsilon(1e-12));
  REQUIRE(sum(3, 4).real() == Catch::Approx(ks1).epsilon(1e-12));
  REQUIRE(sum(3, 2).real() == Catch::Approx(ks1).epsilon(1e-12));
}

TEST_CASE("step_rhs assembles the level products with the chosen right factor") {
  SchemeParams p = params_with(1.0, 1.0, 0.25, 0.5, 0.25);
  MeshRatio ratio{0.5, false};
  const int n = 4;
  DiagCoefficients c = zero_diag_coefficients(n, p, ratio);
  GammaTable t = make_gamma_table(p, ratio);

  ThreeLevelState st;
  st.previous.u = ComplexField::Random(n, n);
  st.previous.v = ComplexField::Random(n, n);
  st.current.u = ComplexField::Random(n, n);
  st.current.v = ComplexField::Random(n, n);

  StatePair nonlinear{ComplexField::Random(n, n), ComplexField::Random(n, n)};
  StatePair source{ComplexField::Random(n, n), ComplexField::Random(n, n)};

  for (RightFactor rf : {RightFactor::same, RightFactor::transposed}) {
    SchemeMatrices m = assemble_matrices(c, t, p, NonlinearMode::split, rf);
    REQUIRE(m.J == n - 1);
    StatePair rhs = step_rhs(st, m, nonlinear, &source);
    auto prod = [&](const ComplexField& a, const ComplexField& x) {
      return rf == RightFactor::same ? ComplexField(a * x + x * a)
                                     : ComplexField(a * x + x * a.transpose());
    };
    ComplexField expect_u = -prod(m.A2, st.current.u) - prod(m.A3, st.previous.u) - nonlinear.u + source.u;
    ComplexField expect_v = -prod(m.B2, st.current.v) - prod(m.B3, st.previous.v) - nonlinear.v + source.v;
    REQUIRE((rhs.u - expect_u).norm() < 1e-13);
    REQUIRE((rhs.v - expect_v).norm() < 1e-13);

    StatePair rhs_nosrc = step_rhs(st, m, nonlinear);
    REQUIRE((rhs_nosrc.u - (expect_u - source.u)).norm() < 1e-13);
  }
}
