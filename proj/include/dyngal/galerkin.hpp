#pragma once

// Galerkin solve on an index set, exact windowed residual, and the
// residual-based two-sided error estimate.
//
// The residual r = f - A u_Lambda is computed on supp(f) united with the
// bandwidth-dilation of Lambda; every omitted coefficient is exactly zero
// when the coefficient expansions are finite, so this is the residual of the
// infinite problem, not an approximation to it.  Dilating past the window
// is reported as saturation, never clipped silently.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dyngal/basis.hpp"
#include "dyngal/linalg.hpp"
#include "dyngal/multi_index.hpp"
#include "dyngal/operator.hpp"
#include "dyngal/workload.hpp"

namespace dyngal {

struct galerkin_solution {
  index_set lambda;
  coeff_vector u_hat;
  int solver_iterations = 0;
  double solver_residual = 0.0;
};

struct residual_data {
  dual_vector entries;      // exact residual coefficients off Lambda
  dual_vector lambda_tail;  // algebraic leftovers on Lambda (diagnostics)
  double norm_dual = 0.0;   // ||r||_phi* of the off-Lambda part
  bool saturated = false;   // dilation of Lambda left the window
};

// Conjugate gradients on A_Lambda u = f_Lambda, preconditioned by the basis
// weights, optionally warm-started from a previous solution extended by
// zeros.  Throws solver_error on non-convergence.
inline galerkin_solution solve(const stiffness_window& s,
                               const elliptic_problem& p,
                               const index_set& lambda, double tol,
                               workload_counter* wl = nullptr,
                               const coeff_vector* warm_start = nullptr,
                               int max_iter = -1) {
  if (!(tol > 0.0)) throw std::invalid_argument("solve: tol <= 0");
  galerkin_solution out;
  out.lambda = lambda;
  out.u_hat = coeff_vector(s.basis());
  if (lambda.empty()) return out;

  const restricted_matrix m = restrict_to(s, lambda);
  std::vector<complex> b(lambda.size());
  {
    std::size_t i = 0;
    for (const auto& k : lambda) b[i++] = p.rhs.at(k);
  }
  std::optional<std::vector<complex>> x0;
  if (warm_start && !warm_start->empty()) {
    x0.emplace(lambda.size(), complex(0.0));
    std::size_t i = 0;
    for (const auto& k : lambda) (*x0)[i++] = warm_start->at(k);
  }

  pcg_result sol =
      pcg_solve(m, b, tol, max_iter, wl, x0 ? &*x0 : nullptr);
  if (!sol.converged)
    throw solver_error("solve: conjugate gradients did not converge",
                       sol.iterations, sol.relative_residual);
  {
    std::size_t i = 0;
    for (const auto& k : lambda) out.u_hat.set(k, sol.x[i++]);
  }
  out.solver_iterations = sol.iterations;
  out.solver_residual = sol.relative_residual;
  return out;
}

inline residual_data residual(const stiffness_window& s,
                              const elliptic_problem& p,
                              const galerkin_solution& g,
                              workload_counter* wl = nullptr) {
  residual_data out;
  out.entries = dual_vector(s.basis());
  out.lambda_tail = dual_vector(s.basis());

  ball_result dilated = union_of_balls(g.lambda, s.bandwidth(), s.win());
  out.saturated = dilated.saturated;

  index_set support = set_union(dilated.set, p.rhs.support());
  dual_vector au = apply(s, g.u_hat, support, wl);

  double norm_sq = 0.0;
  for (const auto& k : support) {
    const complex rk = p.rhs.at(k) - au.at(k);
    if (g.lambda.contains(k)) {
      out.lambda_tail.set(k, rk);
    } else if (rk != complex(0.0)) {
      out.entries.set(k, rk);
      norm_sq += std::norm(rk) / s.basis().weight(k);
    }
  }
  out.norm_dual = std::sqrt(norm_sq);
  return out;
}

// sqrt(x^H A x) of a window-supported coefficient vector through the
// assembled entries; exact for finite coefficient expansions.
inline double energy_norm(const stiffness_window& s, const coeff_vector& v) {
  const dual_vector av = apply(s, v, v.support());
  double q = 0.0;
  for (const auto& [k, avk] : av) q += (std::conj(avk) * v.at(k)).real();
  return std::sqrt(std::max(q, 0.0));
}

struct error_bounds {
  double lower = 0.0;  // (beta_lo / sqrt(alpha_hi)) ||r||_phi*
  double upper = 0.0;  // (beta_hi / sqrt(alpha_lo)) ||r||_phi*
  std::optional<double> energy_error;  // |||u - u_Lambda||| when u is known
  bool sandwich_holds = true;
};

inline error_bounds error_sandwich(const stiffness_window& s,
                                   const elliptic_problem& p,
                                   const galerkin_solution& g,
                                   const residual_data& r,
                                   const coeff_vector* exact_u = nullptr) {
  error_bounds out;
  out.lower = p.basis.beta_lo / std::sqrt(p.alpha_hi()) * r.norm_dual;
  out.upper = p.basis.beta_hi / std::sqrt(p.alpha_lo()) * r.norm_dual;
  if (exact_u) {
    const coeff_vector e = *exact_u - g.u_hat;
    out.energy_error = energy_norm(s, e);
    out.sandwich_holds =
        out.lower <= *out.energy_error && *out.energy_error <= out.upper;
  }
  return out;
}

// View of the extended operator A_hat_Lambda = P A P + Q on window vectors:
// the Galerkin system on Lambda padded with the identity off Lambda.
struct extended_system_view {
  const stiffness_window* s = nullptr;
  index_set lambda;

  // y = A_hat_Lambda x for a window-supported coefficient vector x, returned
  // in the dual frame on `out_set`.
  dual_vector apply_to(const coeff_vector& x, const index_set& out_set) const {
    const coeff_vector x_on = project(x, lambda);
    dual_vector ax = apply(*s, x_on, out_set);
    dual_vector out(s->basis());
    for (const auto& k : out_set) {
      if (lambda.contains(k))
        out.set(k, ax.at(k));
      else
        out.set(k, x.at(k));  // identity off Lambda
    }
    return out;
  }
};

}  // namespace dyngal
