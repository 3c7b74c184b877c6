#pragma once

// Outer adaptive loops: the dynamically marked solver and the two
// fixed-parameter baselines.  All three share one driver; they differ only
// in how theta_n and the enrichment radius are chosen per pass:
//
//   set r_0 := f, Lambda_0 := empty
//   repeat   theta_n  <- policy(||r_n|| / ||r_0||)
//            dLambda  <- ENRICH(DORFLER(r_n, theta_n), J)
//            Lambda   <- Lambda union dLambda
//            u        <- GAL(Lambda)
//            r        <- RES(u)
//   until ||r_{n+1}|| <= eps ||r_0||
//
// Each pass appends one immutable record; saturation of the window stops the
// loop with a reported reason rather than silently truncating.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dyngal/galerkin.hpp"
#include "dyngal/marking.hpp"
#include "dyngal/operator.hpp"
#include "dyngal/workload.hpp"

namespace dyngal {

struct iteration_record {
  int n = 0;
  double theta_n = 0.0;
  int j_n = 0;
  std::int64_t card_added = 0;    // |dLambda_n|
  std::int64_t card_total = 0;    // |Lambda_{n+1}|
  std::int64_t n_marked = 0;      // |Doerfler seeds|
  double residual_norm = 0.0;     // ||r_{n+1}||_phi*
  double residual_ratio = 0.0;    // ||r_{n+1}|| / ||r_0||
  std::optional<double> energy_error;  // |||u - u_{n+1}||| (manufactured runs)
  double contraction_check = 0.0;  // [ratio_{n+1}/2] / [ratio_n/2]^2
  std::uint64_t workload_cumulative = 0;
  int solver_iterations = 0;
};

enum class termination_reason {
  tolerance_met,
  max_iter,
  window_saturated,
  trivial_rhs
};

inline const char* to_string(termination_reason r) {
  switch (r) {
    case termination_reason::tolerance_met: return "tolerance_met";
    case termination_reason::max_iter: return "max_iter";
    case termination_reason::window_saturated: return "window_saturated";
    case termination_reason::trivial_rhs: return "trivial_rhs";
  }
  return "unknown";
}

struct convergence_trace {
  std::vector<iteration_record> records;
  double epsilon = 0.0;
  bool terminated = false;
  termination_reason reason = termination_reason::tolerance_met;
  std::uint64_t workload_total = 0;
  double r0_norm = 0.0;
  index_set final_lambda;
  coeff_vector final_u;
};

struct adapt_options {
  double epsilon = 1e-10;
  int max_iter = 50;
  double solver_tol = 1e-12;
  const coeff_vector* exact_u = nullptr;  // enables energy-error records
};

namespace detail {

// theta and enrichment radius for one pass, given the residual ratio.
struct marking_policy {
  std::function<double(double)> theta_of_ratio;
  bool enrich = true;
};

inline convergence_trace adaptive_loop(const elliptic_problem& p,
                                       const stiffness_window& s,
                                       const marking_params& mp,
                                       const adapt_options& opt,
                                       const marking_policy& policy) {
  if (!(opt.epsilon > 0.0 && opt.epsilon < 1.0))
    throw std::invalid_argument("adaptive loop: epsilon outside (0,1)");
  if (opt.max_iter < 1)
    throw std::invalid_argument("adaptive loop: max_iter < 1");

  convergence_trace trace;
  trace.epsilon = opt.epsilon;
  workload_counter wl;

  // r_0 := f on the empty set.
  galerkin_solution g;
  g.u_hat = coeff_vector(s.basis());
  residual_data r;
  r.entries = p.rhs;
  r.norm_dual = dual_norm(p.rhs);
  trace.r0_norm = r.norm_dual;

  if (trace.r0_norm == 0.0) {
    trace.terminated = true;
    trace.reason = termination_reason::trivial_rhs;
    trace.final_u = g.u_hat;
    return trace;
  }

  index_set lambda;
  double prev_ratio = 1.0;

  for (int n = 0; n < opt.max_iter; ++n) {
    const double theta = policy.theta_of_ratio(r.norm_dual / trace.r0_norm);

    e_dorfler_result marked;
    if (policy.enrich) {
      marked = e_dorfler(r, theta, mp, s.win());
    } else {
      marked.marked = dorfler(r, theta);
      marked.enriched = marked.marked;
      marked.j = 0;
    }
    if (marked.saturated) {
      trace.reason = termination_reason::window_saturated;
      trace.final_lambda = lambda;
      trace.final_u = g.u_hat;
      trace.workload_total = wl.total();
      return trace;
    }

    lambda = set_union(lambda, marked.enriched);
    g = solve(s, p, lambda, opt.solver_tol, &wl, &g.u_hat);
    r = residual(s, p, g, &wl);
    if (r.saturated) {
      trace.reason = termination_reason::window_saturated;
      trace.final_lambda = lambda;
      trace.final_u = g.u_hat;
      trace.workload_total = wl.total();
      return trace;
    }

    iteration_record rec;
    rec.n = n;
    rec.theta_n = theta;
    rec.j_n = marked.j;
    rec.card_added = std::int64_t(marked.enriched.size());
    rec.card_total = std::int64_t(lambda.size());
    rec.n_marked = std::int64_t(marked.marked.size());
    rec.residual_norm = r.norm_dual;
    rec.residual_ratio = r.norm_dual / trace.r0_norm;
    const double prev_half = prev_ratio / 2.0;
    rec.contraction_check = prev_half > 0.0
                                ? (rec.residual_ratio / 2.0) / (prev_half * prev_half)
                                : 0.0;
    rec.workload_cumulative = wl.total();
    rec.solver_iterations = g.solver_iterations;
    if (opt.exact_u)
      rec.energy_error = energy_norm(s, *opt.exact_u - g.u_hat);
    trace.records.push_back(rec);

    prev_ratio = rec.residual_ratio;

    if (rec.residual_ratio <= opt.epsilon) {
      trace.terminated = true;
      trace.reason = termination_reason::tolerance_met;
      break;
    }
  }

  if (!trace.terminated && trace.records.size() == std::size_t(opt.max_iter))
    trace.reason = termination_reason::max_iter;

  trace.final_lambda = lambda;
  trace.final_u = g.u_hat;
  trace.workload_total = wl.total();
  return trace;
}

}  // namespace detail

// Dynamic marking: theta_n from sqrt(1 - theta^2) = C0 ratio^sigma.
inline convergence_trace dyn_gal(const elliptic_problem& p,
                                 const stiffness_window& s,
                                 const marking_params& mp,
                                 const adapt_options& opt) {
  detail::marking_policy policy;
  policy.theta_of_ratio = [&mp](double ratio) {
    return dynamic_theta(ratio, 1.0, mp);
  };
  policy.enrich = true;
  return detail::adaptive_loop(p, s, mp, opt, policy);
}

// Fixed theta with enrichment (the static two-step marking).
inline convergence_trace static_e_dorfler_gal(const elliptic_problem& p,
                                              const stiffness_window& s,
                                              const marking_params& mp,
                                              double theta,
                                              const adapt_options& opt) {
  if (!(theta > 0.0 && theta < 1.0))
    throw std::invalid_argument("static_e_dorfler_gal: theta outside (0,1)");
  detail::marking_policy policy;
  policy.theta_of_ratio = [theta](double) { return theta; };
  policy.enrich = true;
  return detail::adaptive_loop(p, s, mp, opt, policy);
}

// Fixed theta, no enrichment (plain bulk chasing baseline).
inline convergence_trace plain_dorfler_gal(const elliptic_problem& p,
                                           const stiffness_window& s,
                                           const marking_params& mp,
                                           double theta,
                                           const adapt_options& opt) {
  if (!(theta > 0.0 && theta < 1.0))
    throw std::invalid_argument("plain_dorfler_gal: theta outside (0,1)");
  detail::marking_policy policy;
  policy.theta_of_ratio = [theta](double) { return theta; };
  policy.enrich = false;
  return detail::adaptive_loop(p, s, mp, opt, policy);
}

}  // namespace dyngal
