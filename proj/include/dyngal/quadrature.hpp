#pragma once

// Legendre polynomials, the Babuska-Shen H^1_0 basis built from them, and
// Gauss-Legendre quadrature on (-1,1).

#include <cmath>
#include <stdexcept>
#include <vector>

namespace dyngal {

// L_n(x) by the three-term recurrence; L_n(1) = 1 normalization.
inline double legendre(int n, double x) {
  if (n == 0) return 1.0;
  double pm1 = 1.0, p = x;
  for (int k = 2; k <= n; ++k) {
    const double pp = ((2.0 * k - 1.0) * x * p - (k - 1.0) * pm1) / k;
    pm1 = p;
    p = pp;
  }
  return p;
}

inline double legendre_derivative(int n, double x) {
  if (n == 0) return 0.0;
  // (1 - x^2) L_n' = n (L_{n-1} - x L_n)
  const double den = 1.0 - x * x;
  if (std::abs(den) < 1e-14) {
    // endpoint value n(n+1)/2 * (sign pattern)
    const double v = 0.5 * n * (n + 1.0);
    return x > 0 ? v : (n % 2 == 0 ? -v : v);
  }
  return n * (legendre(n - 1, x) - x * legendre(n, x)) / den;
}

// eta_k(x) = (L_{k-2}(x) - L_k(x)) / sqrt(4k-2),  k >= 2.
inline double babuska_shen(int k, double x) {
  if (k < 2) throw std::domain_error("babuska_shen: k < 2");
  return (legendre(k - 2, x) - legendre(k, x)) / std::sqrt(4.0 * k - 2.0);
}

// eta_k'(x) = -sqrt((2k-1)/2) L_{k-1}(x).
inline double babuska_shen_derivative(int k, double x) {
  if (k < 2) throw std::domain_error("babuska_shen: k < 2");
  return -std::sqrt((2.0 * k - 1.0) / 2.0) * legendre(k - 1, x);
}

struct quadrature_rule {
  std::vector<double> nodes;
  std::vector<double> weights;

  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
    return s;
  }
};

// n-point Gauss-Legendre rule on (-1,1); exact for polynomials of degree
// 2n-1.  Nodes by Newton iteration from the Chebyshev initial guess.
inline quadrature_rule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n < 1");
  quadrature_rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const double f = legendre(n, x);
      const double df = legendre_derivative(n, x);
      const double dx = f / df;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double df = legendre_derivative(n, x);
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * df * df);
  }
  return rule;
}

}  // namespace dyngal
