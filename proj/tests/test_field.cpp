#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "cnls/field.hpp"

using namespace cnls;

namespace {
SchemeParams default_params() { return SchemeParams{}; }  // p = 2.5, lambda = 1
}

TEST_CASE("g_eval matches the closed form |a|^{p-1} + lambda |b|^2") {
  SchemeParams p = default_params();
  REQUIRE(g_eval({0, 0}, {0, 0}, p) == 0.0);
  REQUIRE(g_eval({1, 0}, {2, 0}, p) == Catch::Approx(1.0 + 4.0));
  // |3+4i| = 5, so the self term is 5^{3/2}
  REQUIRE(g_eval({3, 4}, {0, 1}, p) == Catch::Approx(std::pow(5.0, 1.5) + 1.0));

  SchemeParams q = p;
  q.lambda = 2.0;
  REQUIRE(g_eval({1, 0}, {2, 0}, q) == Catch::Approx(1.0 + 8.0));
  q.power = 3.0;
  REQUIRE(g_eval({2, 0}, {0, 0}, q) == Catch::Approx(4.0));
}

TEST_CASE("f_eval is g times the first argument") {
  SchemeParams p = default_params();
  Complex a{1.0, 1.0}, b{0.5, -0.5};
  Complex f = f_eval(a, b, p);
  REQUIRE(std::abs(f - g_eval(a, b, p) * a) < 1e-15);
}

TEST_CASE("g_field applies g entrywise and checks shapes") {
  SchemeParams p = default_params();
  ComplexField a(2, 2), b(2, 2);
  a << Complex{1, 0}, Complex{0, 2}, Complex{3, 4}, Complex{0, 0};
  b << Complex{0, 1}, Complex{1, 0}, Complex{0, 0}, Complex{2, 0};
  RealField g = g_field(a, b, p);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) REQUIRE(g(i, j) == Catch::Approx(g_eval(a(i, j), b(i, j), p)));

  ComplexField wrong(2, 3);
  REQUIRE_THROWS_AS(g_field(a, wrong, p), std::invalid_argument);
}

TEST_CASE("bar_average blends levels with the barycentric weights") {
  SchemeParams p = default_params();  // (1/4, 1/2, 1/4)
  ComplexField x = ComplexField::Random(4, 4);
  ComplexField same = bar_average(x, x, x, p);
  REQUIRE((same - x).norm() < 1e-14);

  ComplexField a = ComplexField::Random(3, 3);
  ComplexField b = ComplexField::Random(3, 3);
  ComplexField c = ComplexField::Random(3, 3);
  ComplexField bar = bar_average(a, b, c, p);
  ComplexField manual = 0.25 * a + 0.5 * b + 0.25 * c;
  REQUIRE((bar - manual).norm() < 1e-14);
}

TEST_CASE("l2_norm is the Frobenius norm") {
  ComplexField m(1, 2);
  m << Complex{3, 0}, Complex{0, 4};
  REQUIRE(l2_norm(m) == Catch::Approx(5.0));
}

TEST_CASE("all_finite flags inf and nan") {
  ComplexField m = ComplexField::Zero(2, 2);
  REQUIRE(all_finite(m));
  m(0, 1) = Complex{std::numeric_limits<double>::infinity(), 0.0};
  REQUIRE_FALSE(all_finite(m));
  m(0, 1) = Complex{0.0, std::numeric_limits<double>::quiet_NaN()};
  REQUIRE_FALSE(all_finite(m));
}
