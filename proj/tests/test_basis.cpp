#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "dyngal/basis.hpp"
#include "dyngal/quadrature.hpp"

using namespace dyngal;
using Catch::Approx;

namespace {

const basis_descriptor fourier1{basis_kind::fourier, 1};
const basis_descriptor fourier2{basis_kind::fourier, 2};
const basis_descriptor legendre_b{basis_kind::legendre_bs, 1};

coeff_vector random_coeffs(const basis_descriptor& b, int n, int span,
                           std::mt19937_64& rng) {
  coeff_vector v(b);
  std::uniform_int_distribution<int> pick(
      b.kind == basis_kind::legendre_bs ? 2 : -span, span);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  for (int i = 0; i < n; ++i)
    v.set(multi_index(pick(rng)), complex(val(rng), val(rng)));
  return v;
}

// H^1_p norm of the synthesized trigonometric sum by the composite
// trapezoidal rule, which is exact for trigonometric polynomials once the
// grid resolves the highest frequency.
double h1p_norm_by_quadrature(const coeff_vector& v) {
  int kmax = 0;
  for (const auto& [k, val] : v) kmax = std::max(kmax, std::abs(k[0]));
  const int m = 4 * kmax + 8;
  double sum = 0.0;
  for (int i = 0; i < m; ++i) {
    const double x = 2.0 * M_PI * i / m;
    complex f = 0.0, df = 0.0;
    for (const auto& [k, val] : v) {
      const complex phase =
          std::polar(1.0 / std::sqrt(2.0 * M_PI), k[0] * x);
      f += val * phase;
      df += val * complex(0.0, k[0]) * phase;
    }
    sum += (std::norm(f) + std::norm(df)) * (2.0 * M_PI / m);
  }
  return std::sqrt(sum);
}

}  // namespace

TEST_CASE("basis weights") {
  REQUIRE(weight(multi_index(3), fourier1) == 10.0);
  REQUIRE(weight(multi_index(0, 0), fourier2) == 1.0);
  REQUIRE(weight(multi_index(7), legendre_b) == 1.0);
  REQUIRE(weight(multi_index(2, -1), fourier2) == 6.0);
  REQUIRE_THROWS_AS(weight(multi_index(1), legendre_b), std::domain_error);
}

TEST_CASE("phi_norm") {
  SECTION("empty vector") {
    REQUIRE(phi_norm(coeff_vector(fourier1)) == 0.0);
  }
  SECTION("two-term fourier sum") {
    coeff_vector v(fourier1);
    v.set(multi_index(0), 1.0);
    v.set(multi_index(3), 1.0);
    REQUIRE(phi_norm(v) == Approx(std::sqrt(11.0)).epsilon(1e-14));
  }
  SECTION("legendre pythagoras") {
    coeff_vector v(legendre_b);
    v.set(multi_index(2), 3.0);
    v.set(multi_index(4), 4.0);
    REQUIRE(phi_norm(v) == Approx(5.0).epsilon(1e-14));
  }
}

TEST_CASE("dual_norm") {
  SECTION("empty") { REQUIRE(dual_norm(dual_vector(fourier1)) == 0.0); }
  SECTION("single weighted term") {
    dual_vector f(fourier1);
    f.set(multi_index(3), 10.0);
    REQUIRE(dual_norm(f) == Approx(std::sqrt(10.0)).epsilon(1e-14));
  }
  SECTION("legendre weights are one") {
    dual_vector f(legendre_b);
    f.set(multi_index(2), 3.0);
    f.set(multi_index(4), 4.0);
    REQUIRE(dual_norm(f) == Approx(5.0).epsilon(1e-14));
  }
}

TEST_CASE("projection") {
  coeff_vector v(fourier1);
  v.set(multi_index(0), 1.0);
  v.set(multi_index(1), complex(0.0, 2.0));
  v.set(multi_index(2), -1.0);

  SECTION("empty set gives the zero vector") {
    REQUIRE(project(v, index_set{}).empty());
  }
  SECTION("superset leaves the vector unchanged") {
    index_set big{multi_index(-1), multi_index(0), multi_index(1),
                  multi_index(2), multi_index(3)};
    coeff_vector pv = project(v, big);
    REQUIRE(pv.size() == 3);
    REQUIRE(pv.at(multi_index(1)) == v.at(multi_index(1)));
  }
  SECTION("restriction keeps the named entry") {
    coeff_vector pv = project(v, index_set{multi_index(1)});
    REQUIRE(pv.size() == 1);
    REQUIRE(pv.at(multi_index(1)) == complex(0.0, 2.0));
  }
  SECTION("idempotent") {
    index_set lambda{multi_index(0), multi_index(2)};
    REQUIRE(project(project(v, lambda), lambda).size() ==
            project(v, lambda).size());
  }
}

TEST_CASE("pythagoras identity for projections", "[property]") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    coeff_vector v = random_coeffs(fourier1, 12, 20, rng);
    index_set lambda;
    for (const auto& [k, val] : v)
      if (rng() % 2) lambda.insert(k);
    const coeff_vector pv = project(v, lambda);
    const coeff_vector qv = v - pv;
    const double total = phi_norm(v), a = phi_norm(pv), b = phi_norm(qv);
    REQUIRE(a * a + b * b == Approx(total * total).epsilon(1e-13));
    REQUIRE(a <= total * (1 + 1e-14));
  }
}

TEST_CASE("fourier phi_norm matches the synthesized H1 norm") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    coeff_vector v = random_coeffs(fourier1, 8, 12, rng);
    REQUIRE(phi_norm(v) ==
            Approx(h1p_norm_by_quadrature(v)).margin(1e-10));
  }
}

TEST_CASE("weighted Cauchy-Schwarz between dual and primal", "[property]") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    coeff_vector v = random_coeffs(fourier1, 10, 15, rng);
    dual_vector f(fourier1);
    std::uniform_int_distribution<int> pick(-15, 15);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    for (int i = 0; i < 10; ++i)
      f.set(multi_index(pick(rng)), complex(val(rng), val(rng)));
    REQUIRE(std::abs(pairing(f, v)) <=
            dual_norm(f) * phi_norm(v) * (1 + 1e-12));
  }
}

TEST_CASE("babuska-shen basis is H1_0-orthonormal") {
  const quadrature_rule rule = gauss_legendre(20);
  for (int k = 2; k <= 8; ++k)
    for (int m = 2; m <= 8; ++m) {
      const double ip = rule.integrate([&](double x) {
        return babuska_shen_derivative(k, x) * babuska_shen_derivative(m, x);
      });
      REQUIRE(ip == Approx(k == m ? 1.0 : 0.0).margin(1e-12));
    }
}

TEST_CASE("babuska-shen vanishes at the interval ends") {
  for (int k = 2; k <= 9; ++k) {
    REQUIRE(babuska_shen(k, 1.0) == Approx(0.0).margin(1e-13));
    REQUIRE(babuska_shen(k, -1.0) == Approx(0.0).margin(1e-13));
  }
}

TEST_CASE("gauss-legendre rule integrates polynomials exactly") {
  const quadrature_rule rule = gauss_legendre(6);
  // degree 11 monomial: exact value 2/13 for x^12 would exceed the rule
  double s = rule.integrate([](double x) { return std::pow(x, 10); });
  REQUIRE(s == Approx(2.0 / 11.0).epsilon(1e-13));
  s = rule.integrate([](double x) { return std::pow(x, 11); });
  REQUIRE(s == Approx(0.0).margin(1e-14));
}
