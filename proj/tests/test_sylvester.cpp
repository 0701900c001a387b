#include <catch2/catch_amalgamated.hpp>
#include <algorithm>
#include <cstring>
#include <random>

#include "cnls/sylvester.hpp"

using namespace cnls;

namespace {

ComplexField random_matrix(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  ComplexField m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = Complex{gauss(rng), gauss(rng)};
  return m;
}

}  // namespace

TEST_CASE("diagonal systems have the closed-form solution C_ij / (d_i + d_j)") {
  ComplexField a(2, 2), c(2, 2);
  a << 1, 0, 0, 2;
  c << 2, 3, 3, 8;
  ComplexField x = solve_lyapunov(a, c);
  ComplexField expected(2, 2);
  expected << 1, 1, 1, 2;
  REQUIRE((x - expected).norm() < 1e-13);

  // identity: A X + X A = 2X
  ComplexField c2 = ComplexField::Random(5, 5);
  ComplexField x2 = solve_lyapunov(ComplexField::Identity(5, 5), c2);
  REQUIRE((x2 - 0.5 * c2).norm() < 1e-13);

  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> uni(1.0, 2.0);
  ComplexField d = ComplexField::Zero(4, 4);
  for (int i = 0; i < 4; ++i) d(i, i) = Complex{uni(rng), uni(rng)};
  ComplexField c3 = random_matrix(4, rng);
  ComplexField x3 = solve_lyapunov(d, c3);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      REQUIRE(std::abs(x3(i, j) - c3(i, j) / (d(i, i) + d(j, j))) < 1e-12);
}

TEST_CASE("Schur solver agrees with the dense Kronecker oracle") {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 3 + trial;
    ComplexField a = random_matrix(n, rng);
    ComplexField c = random_matrix(n, rng);
    for (RightFactor rf : {RightFactor::same, RightFactor::transposed}) {
      ComplexField x = solve_lyapunov(a, c, rf);
      ComplexField ref = kronecker_oracle(a, c, rf);
      REQUIRE((x - ref).norm() / ref.norm() < 1e-10);
    }
  }
}

TEST_CASE("apply is the exact inverse map of solve") {
  std::mt19937_64 rng(99);
  ComplexField a = random_matrix(6, rng);
  LyapunovOperator op(a);
  ComplexField c = random_matrix(6, rng);
  for (RightFactor rf : {RightFactor::same, RightFactor::transposed}) {
    ComplexField x = op.solve(c, rf);
    REQUIRE((op.apply(x, rf) - c).norm() / c.norm() < 1e-12);
  }
}

TEST_CASE("the two right factors genuinely differ for asymmetric matrices") {
  std::mt19937_64 rng(7);
  ComplexField a = random_matrix(4, rng);
  ComplexField c = random_matrix(4, rng);
  ComplexField xs = solve_lyapunov(a, c, RightFactor::same);
  ComplexField xt = solve_lyapunov(a, c, RightFactor::transposed);
  REQUIRE((xs - xt).norm() > 1e-3);

  // ... and coincide for a symmetric matrix
  ComplexField sym = a + a.transpose();
  REQUIRE((solve_lyapunov(sym, c, RightFactor::same) -
           solve_lyapunov(sym, c, RightFactor::transposed))
              .norm() < 1e-10);
}

TEST_CASE("eigenvalues come from the triangular factor") {
  ComplexField a = ComplexField::Zero(3, 3);
  a(0, 0) = Complex{1, 1};
  a(1, 1) = Complex{2, -1};
  a(2, 2) = Complex{4, 0};
  LyapunovOperator op(a);
  Eigen::VectorXcd ev = op.eigenvalues();
  std::vector<double> got;
  for (int i = 0; i < 3; ++i) got.push_back(ev(i).real());
  std::sort(got.begin(), got.end());
  REQUIRE(got[0] == Catch::Approx(1.0));
  REQUIRE(got[1] == Catch::Approx(2.0));
  REQUIRE(got[2] == Catch::Approx(4.0));
}

TEST_CASE("a spectrum with lambda_i + lambda_j = 0 is rejected") {
  ComplexField a(2, 2);
  a << 1, 0, 0, -1;
  LyapunovOperator op(a);
  REQUIRE(op.min_pair_sum() < 1e-14);
  REQUIRE_FALSE(op.invertible());
  ComplexField c = ComplexField::Ones(2, 2);
  REQUIRE_THROWS_AS(op.solve(c), SingularOperator);
  try {
    op.solve(c);
  } catch (const SingularOperator& e) {
    REQUIRE(e.min_pair_sum < 1e-14);
  }
}

TEST_CASE("shape guards") {
  ComplexField a = ComplexField::Identity(3, 3);
  ComplexField bad(2, 3);
  REQUIRE_THROWS_AS(LyapunovOperator(ComplexField(bad)), std::invalid_argument);
  REQUIRE_THROWS_AS(LyapunovOperator(a).solve(ComplexField::Ones(2, 2)), std::invalid_argument);
  REQUIRE_THROWS_AS(kronecker_oracle(a, ComplexField::Ones(2, 2)), std::invalid_argument);
}

TEST_CASE("kronecker oracle refuses oversized problems") {
  ComplexField big = ComplexField::Identity(65, 65);
  REQUIRE_THROWS_AS(kronecker_oracle(big, big), std::invalid_argument);
}

TEST_CASE("solvability report on scaled identities") {
  // A = I: L(X) = 2X, so L - i Id has norm |2 - i| = sqrt(5)
  SolvabilityReport rep = solvability_report(ComplexField::Identity(4, 4));
  REQUIRE(rep.invertible);
  REQUIRE(rep.min_pair_sum == Catch::Approx(2.0));
  REQUIRE(rep.deviation_from_i_id == Catch::Approx(std::sqrt(5.0)).epsilon(1e-10));

  // A = (i/2) I: L(X) = iX exactly, deviation zero
  ComplexField half_i = Complex{0.0, 0.5} * ComplexField::Identity(4, 4);
  SolvabilityReport rep2 = solvability_report(half_i);
  REQUIRE(rep2.invertible);
  REQUIRE(rep2.deviation_from_i_id < 1e-12);
}

TEST_CASE("solve results are deterministic") {
  std::mt19937_64 rng(2024);
  ComplexField a = random_matrix(8, rng);
  ComplexField c = random_matrix(8, rng);
  LyapunovOperator op1(a), op2(a);
  ComplexField x1 = op1.solve(c);
  ComplexField x2 = op2.solve(c);
  REQUIRE(std::memcmp(x1.data(), x2.data(), sizeof(Complex) * 64) == 0);
}
