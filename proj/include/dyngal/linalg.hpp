#pragma once

// Restriction of a windowed operator to an index set and the preconditioned
// conjugate gradient solver used on it.  The preconditioner is the diagonal
// of basis weights d_k, which makes the monitored residual norm the
// phi*-weighted one and keeps iteration counts independent of the set size
// for operators with bounded Rayleigh quotients.

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dyngal/basis.hpp"
#include "dyngal/multi_index.hpp"
#include "dyngal/workload.hpp"

namespace dyngal {

class solver_error : public std::runtime_error {
 public:
  solver_error(const std::string& what, int iterations, double residual)
      : std::runtime_error(what + " (iterations=" + std::to_string(iterations) +
                           ", relative residual=" + std::to_string(residual) +
                           ")"),
        iterations(iterations),
        residual(residual) {}
  int iterations;
  double residual;
};

// Hermitian principal submatrix A_Lambda in the canonical order of Lambda.
struct restricted_matrix {
  index_set lambda;
  std::vector<std::vector<std::pair<int, complex>>> rows;  // (column, value)
  std::vector<double> weights;                             // d_k per position
  std::size_t nnz = 0;

  std::size_t size() const { return lambda.size(); }

  void apply(const std::vector<complex>& x, std::vector<complex>& y,
             workload_counter* wl = nullptr) const {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      complex s = 0.0;
      for (const auto& [j, a] : rows[i]) s += a * x[std::size_t(j)];
      y[i] = s;
    }
    if (wl) wl->add(nnz);
  }

  // Dense column-major copy (oracle/diagnostics use).
  std::vector<complex> dense() const {
    const std::size_t n = size();
    std::vector<complex> a(n * n, complex(0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (const auto& [j, v] : rows[i]) a[std::size_t(j) * n + i] = v;
    return a;
  }
};

struct pcg_result {
  std::vector<complex> x;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = true;
};

inline pcg_result pcg_solve(const restricted_matrix& m,
                            const std::vector<complex>& b, double tol,
                            int max_iter, workload_counter* wl = nullptr,
                            const std::vector<complex>* x0 = nullptr) {
  const std::size_t n = m.size();
  pcg_result out;
  out.x.assign(n, complex(0.0));
  if (n == 0) return out;
  if (max_iter < 0) max_iter = 10 * int(n) + 100;

  auto precond_dot = [&](const std::vector<complex>& r) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::norm(r[i]) / m.weights[i];
    return s;
  };

  std::vector<complex> r(b), q(n), z(n), p(n);
  if (x0 && !x0->empty()) {
    out.x = *x0;
    m.apply(out.x, q, wl);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
  }

  const double rhs_norm = std::sqrt(precond_dot(b));
  if (rhs_norm == 0.0) {
    out.x.assign(n, complex(0.0));
    return out;
  }
  const double target = tol * rhs_norm;

  for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / m.weights[i];
  double rho = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    rho += (std::conj(r[i]) * z[i]).real();
  p = z;

  int it = 0;
  while (std::sqrt(std::max(rho, 0.0)) > target && it < max_iter) {
    m.apply(p, q, wl);
    double pq = 0.0;
    for (std::size_t i = 0; i < n; ++i) pq += (std::conj(p[i]) * q[i]).real();
    if (!(pq > 0.0))
      throw solver_error("pcg: operator not positive definite", it,
                         std::sqrt(std::max(rho, 0.0)) / rhs_norm);
    const double alpha = rho / pq;
    for (std::size_t i = 0; i < n; ++i) {
      out.x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
      z[i] = r[i] / m.weights[i];
    }
    double rho_new = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      rho_new += (std::conj(r[i]) * z[i]).real();
    const double beta = rho_new / rho;
    rho = rho_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    if (wl) wl->add(5 * n);
    ++it;
  }

  out.iterations = it;
  out.relative_residual = std::sqrt(std::max(rho, 0.0)) / rhs_norm;
  out.converged = out.relative_residual <= tol;
  return out;
}

}  // namespace dyngal
