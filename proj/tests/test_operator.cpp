#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dyngal/operator.hpp"
#include "support/test_problems.hpp"

using namespace dyngal;
using Catch::Approx;
using testsupport::constant_problem;
using testsupport::cosine_problem;
using testsupport::entry_by_quadrature;

TEST_CASE("constant coefficients diagonalize") {
  elliptic_problem p = constant_problem(1.0, 1.0);
  REQUIRE(assemble_entry(p, multi_index(3), multi_index(3)) ==
          complex(10.0));
  REQUIRE(assemble_entry(p, multi_index(2), multi_index(1)) == complex(0.0));
  REQUIRE(assemble_entry(p, multi_index(0), multi_index(0)) == complex(1.0));
}

TEST_CASE("cosine coefficient off-diagonal entry") {
  elliptic_problem p = cosine_problem();
  REQUIRE(assemble_entry(p, multi_index(2), multi_index(1)).real() ==
          Approx(0.5).epsilon(1e-14));
  REQUIRE(assemble_entry(p, multi_index(2), multi_index(1)).imag() ==
          Approx(0.0).margin(1e-15));
}

TEST_CASE("assembly convention matches the quadrature oracle") {
  elliptic_problem p = cosine_problem();
  for (int l = -3; l <= 3; ++l)
    for (int k = -3; k <= 3; ++k) {
      const complex oracle = entry_by_quadrature(p, l, k);
      const complex entry = assemble_entry(p, multi_index(l), multi_index(k));
      REQUIRE(std::abs(entry - oracle) < 1e-12);
    }
}

TEST_CASE("two-dimensional constant-coefficient diagonal") {
  elliptic_problem p = constant_problem(2.0, 0.5, 2);
  REQUIRE(assemble_entry(p, multi_index(1, 2), multi_index(1, 2)) ==
          complex(2.0 * 5.0 + 0.5));
  REQUIRE(assemble_entry(p, multi_index(1, 2), multi_index(0, 2)) ==
          complex(0.0));
}

TEST_CASE("legendre assembly: pure stiffness is the identity") {
  elliptic_problem p;
  p.basis = basis_descriptor{basis_kind::legendre_bs, 1};
  p.nu_fn = [](double) { return 1.0; };
  p.sigma_fn = [](double) { return 0.0; };
  p.nu_lo = p.nu_hi = 1.0;
  p.sigma_lo = p.sigma_hi = 1e-30;  // nominal positive bounds
  for (int k = 2; k <= 7; ++k)
    for (int m = 2; m <= 7; ++m)
      REQUIRE(std::abs(assemble_entry(p, multi_index(k), multi_index(m)) -
                       complex(k == m ? 1.0 : 0.0)) < 1e-12);
}

TEST_CASE("assemble_window structure") {
  const window w(basis_kind::fourier, 1, 32);
  SECTION("constant coefficients: diagonal at any bandwidth") {
    elliptic_problem p = constant_problem(1.0, 1.0);
    stiffness_window s = assemble_window(p, w, 3);
    REQUIRE(s.nnz() == w.cardinality());
    for (const auto& [l, row] : s.rows()) {
      REQUIRE(row.size() == 1);
      REQUIRE(row[0].first == l);
    }
  }
  SECTION("cosine problem with bandwidth 1 has exact tridiagonal rows") {
    elliptic_problem p = cosine_problem();
    stiffness_window s = assemble_window(p, w, 1);
    const auto* row = s.row(multi_index(5));
    REQUIRE(row != nullptr);
    REQUIRE(row->size() == 3);
    REQUIRE(std::abs(s.entry(multi_index(5), multi_index(4)) -
                     complex(5.0)) < 1e-14);  // k l /4 = 20/4
    REQUIRE(std::abs(s.entry(multi_index(5), multi_index(5)) -
                     complex(26.0)) < 1e-14);
  }
  SECTION("bandwidth 0 keeps the diagonal of the full matrix") {
    elliptic_problem p = cosine_problem();
    stiffness_window s = assemble_window(p, w, 0);
    REQUIRE(s.nnz() == w.cardinality());
    for (const auto& [l, row] : s.rows()) REQUIRE(row.size() == 1);
  }
}

TEST_CASE("hermitian symmetry of assembled windows") {
  const window w(basis_kind::fourier, 1, 24);
  elliptic_problem p = cosine_problem();
  stiffness_window s = assemble_window(p, w, 2);
  double worst = 0.0;
  for (const auto& [l, row] : s.rows())
    for (const auto& [k, a] : row)
      worst = std::max(worst, std::abs(a - std::conj(s.entry(k, l))));
  REQUIRE(worst <= 1e-12);
}

TEST_CASE("rayleigh quotients stay within the coefficient bounds",
          "[property]") {
  const window w(basis_kind::fourier, 1, 24);
  elliptic_problem p = cosine_problem();
  stiffness_window s = assemble_window(p, w, 1);
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    coeff_vector x = testsupport::random_window_vector(w, 8, 20, rng);
    if (x.empty()) continue;
    const dual_vector ax = apply(s, x, index_set(w.indices()));
    double quad = 0.0;
    for (const auto& [k, axk] : ax)
      quad += (std::conj(axk) * x.at(k)).real();
    double dquad = 0.0;
    for (const auto& [k, xk] : x) dquad += std::norm(xk) * p.basis.weight(k);
    const double q = quad / dquad;
    REQUIRE(q >= p.alpha_lo() - 1e-10);
    REQUIRE(q <= p.alpha_hi() + 1e-10);
  }
}

TEST_CASE("restrict_to") {
  const window w(basis_kind::fourier, 1, 16);
  elliptic_problem p = constant_problem(1.0, 1.0);
  stiffness_window s = assemble_window(p, w, 2);
  SECTION("empty set") {
    REQUIRE(restrict_to(s, index_set{}).size() == 0);
  }
  SECTION("singleton") {
    restricted_matrix m = restrict_to(s, index_set{multi_index(3)});
    REQUIRE(m.size() == 1);
    REQUIRE(m.rows[0].size() == 1);
    REQUIRE(m.rows[0][0].second == complex(10.0));
  }
  SECTION("diagonal pattern k^2+1") {
    index_set lambda{multi_index(-2), multi_index(0), multi_index(5)};
    restricted_matrix m = restrict_to(s, lambda);
    REQUIRE(m.size() == 3);
    REQUIRE(m.rows[0][0].second == complex(5.0));
    REQUIRE(m.rows[1][0].second == complex(1.0));
    REQUIRE(m.rows[2][0].second == complex(26.0));
  }
  SECTION("outside window throws") {
    REQUIRE_THROWS_AS(restrict_to(s, index_set{multi_index(17)}),
                      std::invalid_argument);
  }
}

TEST_CASE("apply") {
  const window w(basis_kind::fourier, 1, 16);
  elliptic_problem p = constant_problem(1.0, 1.0);
  stiffness_window s = assemble_window(p, w, 1);
  SECTION("zero vector maps to zero") {
    coeff_vector v(p.basis);
    REQUIRE(apply(s, v, index_set(w.indices())).empty());
  }
  SECTION("diagonal action") {
    coeff_vector v(p.basis);
    v.set(multi_index(4), 1.0);
    dual_vector av = apply(s, v, index_set(w.indices()));
    REQUIRE(av.size() == 1);
    REQUIRE(av.at(multi_index(4)) == complex(17.0));
  }
  SECTION("workload counts multiply-adds") {
    workload_counter wl;
    coeff_vector v(p.basis);
    v.set(multi_index(4), 1.0);
    v.set(multi_index(5), 2.0);
    apply(s, v, index_set(w.indices()), &wl);
    REQUIRE(wl.total() == 2);  // diagonal matrix: one entry per column
  }
}

TEST_CASE("apply is hermitian and commutes with restriction", "[property]") {
  const window w(basis_kind::fourier, 1, 24);
  elliptic_problem p = cosine_problem();
  stiffness_window s = assemble_window(p, w, 1);
  std::mt19937_64 rng(29);
  const index_set all(w.indices());
  for (int trial = 0; trial < 20; ++trial) {
    coeff_vector v = testsupport::random_window_vector(w, 6, 20, rng);
    coeff_vector u = testsupport::random_window_vector(w, 6, 20, rng);
    // <Av, u> = <v, Au> within roundoff
    const dual_vector av = apply(s, v, all);
    const dual_vector au = apply(s, u, all);
    const complex lhs = pairing(av, u);
    complex rhs = 0.0;
    for (const auto& [k, vk] : v) rhs += vk * std::conj(au.at(k));
    REQUIRE(std::abs(lhs - rhs) < 1e-12);

    // restrict-then-apply equals apply-then-project on Lambda-supported v
    index_set lambda = v.support();
    restricted_matrix m = restrict_to(s, lambda);
    std::vector<complex> xv(lambda.size());
    {
      std::size_t i = 0;
      for (const auto& k : lambda) xv[i++] = v.at(k);
    }
    std::vector<complex> y(lambda.size());
    m.apply(xv, y);
    const dual_vector projected = project(apply(s, v, all), lambda);
    std::size_t i = 0;
    for (const auto& k : lambda) {
      REQUIRE(std::abs(y[i] - projected.at(k)) < 1e-12);
      ++i;
    }
  }
}

TEST_CASE("fit_decay") {
  SECTION("diagonal matrix gives the sentinel") {
    const window w(basis_kind::fourier, 1, 16);
    elliptic_problem p = constant_problem(1.0, 1.0);
    stiffness_window s = assemble_window(p, w, 2);
    decay_estimate est = fit_decay(s);
    REQUIRE(est.diagonal);
    REQUIRE(std::isinf(est.eta));
  }
  SECTION("synthetic exponential entries recover the rate") {
    // legendre-kind window so the normalization weights are all one
    const window w(basis_kind::legendre_bs, 1, 40);
    stiffness_window s(w, basis_descriptor{basis_kind::legendre_bs, 1}, 10);
    for (const multi_index& l : w.indices())
      for (int k = std::max(2, l[0] - 10); k <= std::min(40, l[0] + 10); ++k)
        s.set_entry(l, multi_index(k), std::exp(-0.7 * std::abs(l[0] - k)));
    decay_estimate est = fit_decay(s);
    REQUIRE(est.eta == Approx(0.7).margin(1e-6));
    REQUIRE(est.c == Approx(1.0).margin(1e-6));
    REQUIRE(est.fit_residual < 1e-9);
  }
  SECTION("cosine problem yields a finite rate with its residual reported") {
    const window w(basis_kind::fourier, 1, 32);
    elliptic_problem p = cosine_problem();
    stiffness_window s = assemble_window(p, w, 4);
    decay_estimate est = fit_decay(s);
    REQUIRE(!est.diagonal);
    REQUIRE(est.eta > 0.0);
    REQUIRE(std::isfinite(est.eta));
    REQUIRE(est.fit_residual >= 0.0);
  }
}

TEST_CASE("truncation error decreases at the fitted rate") {
  const window w(basis_kind::fourier, 1, 32);
  elliptic_problem p = cosine_problem(0.8);
  stiffness_window s = assemble_window(p, w, 6);
  decay_estimate est = fit_decay(s);

  // row sums of normalized entries beyond distance J, against the fitted
  // envelope c (J+1)^(d-1) exp(-eta J) scaled by the geometric tail factor
  double prev = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= 4; ++j) {
    double worst_row = 0.0;
    for (const auto& [l, row] : s.rows()) {
      double sum = 0.0;
      for (const auto& [k, a] : row)
        if (distance(l, k) > j)
          sum += std::abs(a) /
                 std::sqrt(s.basis().weight(l) * s.basis().weight(k));
      worst_row = std::max(worst_row, sum);
    }
    REQUIRE(worst_row <= prev * (1 + 1e-12));
    const double bound =
        est.c * std::exp(-est.eta * j) * 2.0 * std::exp(-est.eta) /
        (1.0 - std::exp(-est.eta));
    if (worst_row > 0.0) REQUIRE(worst_row <= bound * (1 + 1e-9));
    prev = worst_row;
  }
}

TEST_CASE("fit_inverse_decay") {
  SECTION("diagonal matrix gives the sentinel") {
    const window w(basis_kind::fourier, 1, 64);
    elliptic_problem p = constant_problem(1.0, 1.0);
    stiffness_window s = assemble_window(p, w, 1);
    decay_estimate est =
        fit_inverse_decay(s, index_set{multi_index(0)});
    REQUIRE(est.diagonal);
  }
  SECTION("tridiagonal toeplitz rate matches the dense inverse oracle") {
    // symbol 2 + cos: inverse decays like the smaller root of
    // r^2 - 4r + 1 = 0, i.e. rate -log(2 - sqrt(3))
    const window w(basis_kind::legendre_bs, 1, 402);
    stiffness_window s(w, basis_descriptor{basis_kind::legendre_bs, 1}, 1);
    for (const multi_index& l : w.indices()) {
      s.set_entry(l, l, 2.0);
      if (l[0] > 2) s.set_entry(l, multi_index(l[0] - 1), 0.5);
      if (l[0] < 402) s.set_entry(l, multi_index(l[0] + 1), 0.5);
    }
    decay_estimate est = fit_inverse_decay(s, index_set{multi_index(200)});
    // dense inverse oracle on a 401x401 truncation
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(401, 401);
    for (int i = 0; i < 401; ++i) {
      a(i, i) = 2.0;
      if (i > 0) a(i, i - 1) = 0.5;
      if (i < 400) a(i, i + 1) = 0.5;
    }
    Eigen::MatrixXd inv = a.inverse();
    std::vector<double> xs, ys;
    for (int j = 1; j <= 60; ++j) {
      xs.push_back(double(j));
      ys.push_back(std::log(std::abs(inv(200, 200 + j))));
    }
    const line_fit oracle = fit_line(xs, ys);
    REQUIRE(est.eta == Approx(-oracle.slope).epsilon(0.05));
  }
  SECTION("cosine problem yields finite positive constants") {
    const window w(basis_kind::fourier, 1, 128);
    elliptic_problem p = cosine_problem();
    stiffness_window s = assemble_window(p, w, 1);
    decay_estimate est = fit_inverse_decay(
        s, index_set{multi_index(-50), multi_index(0), multi_index(50)});
    REQUIRE(est.c > 0.0);
    REQUIRE(est.eta > 0.0);
    REQUIRE(std::isfinite(est.c));
    REQUIRE(std::isfinite(est.eta));
  }
  SECTION("probe too close to the boundary throws") {
    const window w(basis_kind::fourier, 1, 64);
    elliptic_problem p = cosine_problem();
    stiffness_window s = assemble_window(p, w, 1);
    REQUIRE_THROWS_AS(fit_inverse_decay(s, index_set{multi_index(60)}),
                      std::invalid_argument);
  }
}
