#pragma once

// Best N-term approximation machinery and the exponential (Gevrey-type) and
// algebraic sparsity classes used to assess convergence rates.
//
// All quantities live on the weighted moduli: |v_k| d_k^(1/2) for primal
// vectors and |f_k| d_k^(-1/2) for dual ones, so E_N is the tail l2 norm of
// the non-increasing rearrangement and the class norms are
//   exponential:  sup_n n^((1-t/d)/2) exp(eta omega_d^(-t/d) n^(t/d)) v*_n
//   algebraic:    sup_N (N+1)^(s/d) E_N.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dyngal/basis.hpp"
#include "dyngal/fit_util.hpp"

namespace dyngal {

inline double unit_ball_measure(int dim) {
  if (dim == 1) return 2.0;
  if (dim == 2) return M_PI;
  throw std::invalid_argument("unit_ball_measure: dim not in {1,2}");
}

struct gevrey_class {
  double eta = 0.0;
  double t = 0.0;
  int dim = 1;
  std::optional<double> class_norm;

  double omega_d() const { return unit_ball_measure(dim); }

  void validate() const {
    if (!(eta > 0.0)) throw std::invalid_argument("gevrey_class: eta <= 0");
    if (!(t > 0.0 && t <= double(dim)))
      throw std::invalid_argument("gevrey_class: t outside (0, d]");
  }
};

// Non-increasing rearrangement of the weighted moduli.
template <class Tag>
std::vector<double> rearrange(const sparse_vector<Tag>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& [k, val] : v) out.push_back(v.weighted_modulus(k));
  std::sort(out.begin(), out.end(), std::greater<double>());
  return out;
}

// E_0, ..., E_M with E_N = sqrt(sum_{n > N} (v*_n)^2): the best N-term
// approximation errors, attained by keeping the N largest weighted moduli.
// Tail sums are accumulated in reverse for accuracy.
inline std::vector<double> best_n_term_from_rearranged(
    const std::vector<double>& sorted) {
  std::vector<double> e(sorted.size() + 1, 0.0);
  double tail = 0.0;
  for (std::size_t i = sorted.size(); i > 0; --i) {
    tail += sorted[i - 1] * sorted[i - 1];
    e[i - 1] = std::sqrt(tail);
  }
  return e;
}

template <class Tag>
std::vector<double> best_n_term(const sparse_vector<Tag>& v) {
  return best_n_term_from_rearranged(rearrange(v));
}

template <class Tag>
double gevrey_norm(const sparse_vector<Tag>& v, const gevrey_class& g) {
  g.validate();
  const std::vector<double> sorted = rearrange(v);
  const double td = g.t / double(g.dim);
  const double scale = g.eta * std::pow(g.omega_d(), -td);
  double sup = 0.0;
  for (std::size_t n = 1; n <= sorted.size(); ++n) {
    const double term = std::pow(double(n), (1.0 - td) / 2.0) *
                        std::exp(scale * std::pow(double(n), td)) *
                        sorted[n - 1];
    sup = std::max(sup, term);
  }
  return sup;
}

struct fit_report {
  enum class model_t { gevrey, algebraic };
  model_t model = model_t::gevrey;
  double eta_fit = 0.0;  // exponential rate (after omega_d normalization)
  double t_fit = 0.0;    // exponential exponent on the t-grid
  double s_fit = 0.0;    // algebraic rate
  double prefactor = 0.0;
  double r_squared = 0.0;
  double n_lo = 0.0, n_hi = 0.0;  // data range actually used
  bool degenerate = false;
};

// Fit E ~ C exp(-eta omega_d^(-t/d) N^(t/d)) by a grid search over t with a
// log-linear regression per grid point, or E ~ C N^(-s/d) by one log-log
// regression.  Points with non-positive or roundoff-level E are dropped.
inline fit_report fit_decay_model(
    const std::vector<std::pair<double, double>>& points, int dim,
    fit_report::model_t model, double t_grid_step = 0.05) {
  std::vector<std::pair<double, double>> data;
  double e_max = 0.0;
  for (const auto& [n, e] : points) e_max = std::max(e_max, e);
  for (const auto& [n, e] : points)
    if (e > 0.0 && e > e_max * 1e-13) data.emplace_back(n, e);
  if (data.size() < 6)
    throw std::invalid_argument(
        "fit_decay_model: need >= 6 strictly positive entries");

  fit_report out;
  out.model = model;
  out.n_lo = data.front().first;
  out.n_hi = data.front().first;
  for (const auto& [n, e] : data) {
    out.n_lo = std::min(out.n_lo, n);
    out.n_hi = std::max(out.n_hi, n);
  }
  const double omega = unit_ball_measure(dim);

  if (model == fit_report::model_t::algebraic) {
    std::vector<double> xs, ys;
    for (const auto& [n, e] : data)
      if (n > 0.0) {
        xs.push_back(std::log(n));
        ys.push_back(std::log(e));
      }
    const line_fit fit = fit_line(xs, ys);
    out.s_fit = -fit.slope * double(dim);
    out.prefactor = std::exp(fit.intercept);
    out.r_squared = fit.r_squared;
    out.degenerate = fit.r_squared < 0.5 || !(out.s_fit > 0.0);
    return out;
  }

  double best_r2 = -1.0;
  for (double t = t_grid_step; t <= double(dim) + 1e-12; t += t_grid_step) {
    const double td = t / double(dim);
    std::vector<double> xs, ys;
    for (const auto& [n, e] : data) {
      xs.push_back(std::pow(n, td));
      ys.push_back(std::log(e));
    }
    const line_fit fit = fit_line(xs, ys);
    if (fit.slope < 0.0 && fit.r_squared > best_r2) {
      best_r2 = fit.r_squared;
      out.t_fit = t;
      out.eta_fit = -fit.slope * std::pow(omega, td);
      out.prefactor = std::exp(fit.intercept);
      out.r_squared = fit.r_squared;
    }
  }
  out.degenerate = best_r2 < 0.5;
  if (best_r2 < 0.0) {
    // no decaying fit at any t: flag and return the flat-model diagnostics
    out.degenerate = true;
    out.t_fit = double(dim);
    out.eta_fit = 0.0;
    out.r_squared = 0.0;
  }
  return out;
}

inline fit_report fit_decay_model(const std::vector<double>& errors, int dim,
                                  fit_report::model_t model,
                                  double t_grid_step = 0.05) {
  std::vector<std::pair<double, double>> points;
  points.reserve(errors.size());
  for (std::size_t n = 0; n < errors.size(); ++n)
    points.emplace_back(double(n), errors[n]);
  return fit_decay_model(points, dim, model, t_grid_step);
}

// Cardinality bound for reaching accuracy eps within the class:
//   |Lambda| <= omega_d ((1/eta) log(||v||_class / eps))^(d/t) + 1.
inline double cardinality_bound(double eps, const gevrey_class& g) {
  g.validate();
  if (!g.class_norm)
    throw std::invalid_argument("cardinality_bound: class_norm not set");
  if (!(eps > 0.0)) throw std::invalid_argument("cardinality_bound: eps <= 0");
  const double log_arg = *g.class_norm / eps;
  if (log_arg <= 1.0) return 1.0;  // eps >= class_norm: bound degenerates
  return g.omega_d() *
             std::pow(std::log(log_arg) / g.eta, double(g.dim) / g.t) +
         1.0;
}

}  // namespace dyngal
