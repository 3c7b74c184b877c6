#pragma once

// The model operator  L u = -div(nu grad u) + sigma u  in coefficient space:
// windowed assembly of the stiffness matrix a_{l,k} = a(phi_k, phi_l),
// restrictions, application to sparse vectors, and empirical estimates of the
// off-diagonal decay of the matrix and of its inverse.
//
// Trigonometric basis: coefficient functions are finite trigonometric
// expansions, so rows are exact convolutions,
//   a_{l,k} = (k . l) nu_hat(l - k) + sigma_hat(l - k),
// normalized so that constant coefficients give the diagonal
// a_{k,k} = nu_0 |k|^2 + sigma_0.  Babuska-Shen basis: entries are
// Gauss-Legendre integrals of nu eta_k' eta_l' + sigma eta_k eta_l.

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dyngal/basis.hpp"
#include "dyngal/fit_util.hpp"
#include "dyngal/linalg.hpp"
#include "dyngal/multi_index.hpp"
#include "dyngal/quadrature.hpp"
#include "dyngal/workload.hpp"

namespace dyngal {

using trig_expansion = std::map<multi_index, complex>;

inline complex expansion_coeff(const trig_expansion& e, const multi_index& m) {
  auto it = e.find(m);
  return it == e.end() ? complex(0.0) : it->second;
}

// Largest Euclidean |m| over the support of the expansion.
inline double expansion_support_radius(const trig_expansion& e) {
  double r = 0.0;
  for (const auto& [m, c] : e)
    if (std::abs(c) > 0.0) r = std::max(r, m.norm());
  return r;
}

struct elliptic_problem {
  basis_descriptor basis;

  // Trigonometric coefficient expansions (fourier kind).
  trig_expansion nu_hat;
  trig_expansion sigma_hat;

  // Pointwise coefficients on (-1,1) (legendre_bs kind).
  std::function<double(double)> nu_fn;
  std::function<double(double)> sigma_fn;
  int coeff_degree = 0;  // polynomial degree bound for quadrature sizing

  double nu_lo = 0.0, nu_hi = 0.0;
  double sigma_lo = 0.0, sigma_hi = 0.0;

  dual_vector rhs;

  double alpha_lo() const { return std::min(nu_lo, sigma_lo); }
  double alpha_hi() const { return std::max(nu_hi, sigma_hi); }

  double coefficient_support_radius() const {
    return std::max(expansion_support_radius(nu_hat),
                    expansion_support_radius(sigma_hat));
  }

  void validate() const {
    if (!(nu_lo > 0.0 && nu_lo <= nu_hi))
      throw std::invalid_argument("elliptic_problem: need 0 < nu_lo <= nu_hi");
    if (!(sigma_lo > 0.0 && sigma_lo <= sigma_hi))
      throw std::invalid_argument(
          "elliptic_problem: need 0 < sigma_lo <= sigma_hi");
    if (basis.kind == basis_kind::fourier) {
      for (const auto* e : {&nu_hat, &sigma_hat})
        for (const auto& [m, c] : *e) {
          multi_index neg = m.dim() == 1 ? multi_index(-m[0])
                                         : multi_index(-m[0], -m[1]);
          if (std::abs(expansion_coeff(*e, neg) - std::conj(c)) > 1e-14)
            throw std::invalid_argument(
                "elliptic_problem: coefficient expansion not Hermitian "
                "(real-valued) at " + m.to_string());
        }
    } else if (!nu_fn || !sigma_fn) {
      throw std::invalid_argument(
          "elliptic_problem: legendre_bs problem needs callable coefficients");
    }
  }
};

inline double dot(const multi_index& a, const multi_index& b) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) s += double(a[i]) * double(b[i]);
  return s;
}

inline complex assemble_entry(const elliptic_problem& p, const multi_index& l,
                              const multi_index& k) {
  if (!p.basis.admissible(l) || !p.basis.admissible(k))
    throw std::domain_error("assemble_entry: inadmissible index");
  if (p.basis.kind == basis_kind::fourier) {
    const multi_index diff = l.dim() == 1
                                 ? multi_index(l[0] - k[0])
                                 : multi_index(l[0] - k[0], l[1] - k[1]);
    return dot(k, l) * expansion_coeff(p.nu_hat, diff) +
           expansion_coeff(p.sigma_hat, diff);
  }
  // Babuska-Shen: 1D integrals; rule exact for polynomial data of degree
  // <= 2 max(k,l) + coeff_degree + 2.
  const int deg = k[0] + l[0] + p.coeff_degree + 2;
  const quadrature_rule rule = gauss_legendre(deg / 2 + 1);
  const int kk = k[0], ll = l[0];
  const double stiff = rule.integrate([&](double x) {
    return p.nu_fn(x) * babuska_shen_derivative(kk, x) *
           babuska_shen_derivative(ll, x);
  });
  const double mass = rule.integrate([&](double x) {
    return p.sigma_fn(x) * babuska_shen(kk, x) * babuska_shen(ll, x);
  });
  return complex(stiff + mass);
}

// Assembled entries a_{l,k} on |l - k| <= bandwidth inside the window.
class stiffness_window {
 public:
  using row_type = std::vector<std::pair<multi_index, complex>>;

  stiffness_window(window win, basis_descriptor basis, int bandwidth)
      : win_(win), basis_(basis), bandwidth_(bandwidth) {}

  const window& win() const { return win_; }
  const basis_descriptor& basis() const { return basis_; }
  int bandwidth() const { return bandwidth_; }
  bool hermitian() const { return hermitian_; }

  complex entry(const multi_index& l, const multi_index& k) const {
    auto it = rows_.find(l);
    if (it == rows_.end()) return complex(0.0);
    for (const auto& [kk, a] : it->second)
      if (kk == k) return a;
    return complex(0.0);
  }

  const row_type* row(const multi_index& l) const {
    auto it = rows_.find(l);
    return it == rows_.end() ? nullptr : &it->second;
  }

  std::size_t nnz() const {
    std::size_t n = 0;
    for (const auto& [l, row] : rows_) n += row.size();
    return n;
  }

  const std::map<multi_index, row_type>& rows() const { return rows_; }

  void set_entry(const multi_index& l, const multi_index& k, complex a) {
    rows_[l].emplace_back(k, a);
  }
  void set_hermitian(bool h) { hermitian_ = h; }

 private:
  window win_;
  basis_descriptor basis_;
  int bandwidth_;
  bool hermitian_ = true;
  std::map<multi_index, row_type> rows_;
};

inline stiffness_window assemble_window(const elliptic_problem& p,
                                        const window& w, int bandwidth,
                                        double drop_tol = 0.0) {
  if (bandwidth < 0) throw std::invalid_argument("assemble_window: bandwidth < 0");
  stiffness_window s(w, p.basis, bandwidth);
  for (const multi_index& l : w.indices()) {
    ball_result cols = ball(l, bandwidth, w);
    for (const multi_index& k : cols.set) {
      const complex a = assemble_entry(p, l, k);
      if (std::abs(a) > drop_tol) s.set_entry(l, k, a);
    }
  }
  return s;
}

// Principal submatrix A_Lambda in the canonical order of Lambda, with the
// basis weights attached for preconditioning.
inline restricted_matrix restrict_to(const stiffness_window& s,
                                     const index_set& lambda) {
  restricted_matrix m;
  m.lambda = lambda;
  const std::size_t n = lambda.size();
  std::map<multi_index, int> position;
  {
    int i = 0;
    for (const auto& k : lambda) {
      if (!s.win().contains(k))
        throw std::invalid_argument("restrict_to: index outside window: " +
                                    k.to_string());
      position[k] = i++;
    }
  }
  m.rows.resize(n);
  m.weights.resize(n);
  {
    std::size_t i = 0;
    for (const auto& l : lambda) {
      m.weights[i] = s.basis().weight(l);
      if (const auto* row = s.row(l)) {
        for (const auto& [k, a] : *row) {
          auto it = position.find(k);
          if (it != position.end()) m.rows[i].emplace_back(it->second, a);
        }
      }
      m.nnz += m.rows[i].size();
      ++i;
    }
  }
  return m;
}

// (A v)_k for k in out_set.  Uses Hermitian symmetry to scatter the stored
// rows of the support of v, so the cost is proportional to |supp v| times
// the row length; the workload counter sees one multiply-add per pair used.
inline dual_vector apply(const stiffness_window& s, const coeff_vector& v,
                         const index_set& out_set,
                         workload_counter* wl = nullptr) {
  for (const auto& k : out_set)
    if (!s.win().contains(k))
      throw std::invalid_argument("apply: out_set index outside window: " +
                                  k.to_string());
  std::map<multi_index, complex> acc;
  std::uint64_t ops = 0;
  for (const auto& [m, vm] : v) {
    if (!s.win().contains(m))
      throw std::invalid_argument("apply: support of v outside window");
    const auto* row = s.row(m);
    if (!row) continue;
    for (const auto& [k, a_mk] : *row) {
      if (!out_set.contains(k)) continue;
      // a_{k,m} = conj(a_{m,k})
      acc[k] += std::conj(a_mk) * vm;
      ++ops;
    }
  }
  if (wl) wl->add(ops);
  dual_vector out(s.basis());
  for (const auto& [k, val] : acc) out.set(k, val);
  return out;
}

struct decay_estimate {
  enum class kind_t { forward, inverse };
  kind_t kind = kind_t::forward;
  double c = 0.0;    // prefactor (c_L, or the operator-level C for inverse)
  double eta = 0.0;  // exponential rate
  double fit_residual = 0.0;
  bool diagonal = false;  // sentinel: no off-diagonal mass, eta = +inf
};

namespace detail {

// Per-shell maxima of |values| keyed by rounded Euclidean distance.
inline std::map<int, double> shell_maxima(
    const std::vector<std::pair<double, double>>& dist_value) {
  std::map<int, double> shells;
  for (const auto& [d, v] : dist_value) {
    const int j = int(std::lround(d));
    auto [it, inserted] = shells.emplace(j, v);
    if (!inserted) it->second = std::max(it->second, v);
  }
  return shells;
}

inline decay_estimate fit_shells(const std::map<int, double>& shells,
                                 decay_estimate::kind_t kind) {
  decay_estimate est;
  est.kind = kind;
  bool any_off = false;
  for (const auto& [j, m] : shells)
    if (j >= 1 && m > 0.0) any_off = true;
  if (!any_off) {
    est.diagonal = true;
    est.eta = std::numeric_limits<double>::infinity();
    auto it = shells.find(0);
    est.c = it == shells.end() ? 0.0 : it->second;
    return est;
  }
  std::vector<double> xs, ys;
  for (const auto& [j, m] : shells)
    if (m > 0.0) {
      xs.push_back(double(j));
      ys.push_back(std::log(m));
    }
  const line_fit fit = fit_line(xs, ys);
  if (!(fit.slope < 0.0))
    throw std::runtime_error("fit_decay: entries show no off-diagonal decay");
  est.eta = -fit.slope;
  est.c = std::exp(fit.intercept);
  est.fit_residual = fit.rms_residual;
  return est;
}

}  // namespace detail

// Least-squares fit of log max_{|k-m|=j} of the norm-equivalence-frame
// entries |a_{k,m}| / sqrt(d_k d_m) against j.  Returns the "diagonal"
// sentinel (eta = +inf) when every off-diagonal entry vanishes.
inline decay_estimate fit_decay(const stiffness_window& s) {
  std::vector<std::pair<double, double>> data;
  for (const auto& [l, row] : s.rows()) {
    const double dl = s.basis().weight(l);
    for (const auto& [k, a] : row) {
      const double w = std::abs(a) / std::sqrt(dl * s.basis().weight(k));
      data.emplace_back(distance(l, k), w);
    }
  }
  return detail::fit_shells(detail::shell_maxima(data),
                            decay_estimate::kind_t::forward);
}

// Solves A z = e_l on the window for each probe l and fits the decay of the
// normalized inverse entries |z_k| sqrt(d_k d_l) away from the probe.  The
// returned prefactor is lifted from the pointwise envelope to the operator
// truncation bound of eq-style form  ||A^-1 - (A^-1)_J|| <= C exp(-eta J):
// a geometric row-tail sum for d = 1, and an exponent shrink absorbing the
// polynomial shell factor for d = 2.
inline decay_estimate fit_inverse_decay(const stiffness_window& s,
                                        const index_set& probes,
                                        double solver_tol = 1e-13) {
  const window& w = s.win();
  const int margin = 20 * std::max(1, s.bandwidth());
  for (const auto& l : probes) {
    if (!w.contains(l))
      throw std::invalid_argument("fit_inverse_decay: probe outside window");
    for (int i = 0; i < w.dim(); ++i)
      if (w.radius_max() - std::abs(l[i]) < margin)
        throw std::invalid_argument(
            "fit_inverse_decay: probe too close to window boundary");
  }
  if (probes.empty())
    throw std::invalid_argument("fit_inverse_decay: empty probe set");

  const index_set all(w.indices());
  const restricted_matrix m = restrict_to(s, all);

  std::vector<std::pair<double, double>> data;
  for (const auto& l : probes) {
    std::vector<complex> b(all.size(), complex(0.0));
    {
      int i = 0;
      for (const auto& k : all) {
        if (k == l) b[std::size_t(i)] = 1.0;
        ++i;
      }
    }
    pcg_result sol = pcg_solve(m, b, solver_tol, -1);
    if (!sol.converged)
      throw solver_error("fit_inverse_decay: probe solve did not converge",
                         sol.iterations, sol.relative_residual);
    const double dl = s.basis().weight(l);
    int i = 0;
    for (const auto& k : all) {
      const double wk = std::abs(sol.x[std::size_t(i)]) *
                        std::sqrt(s.basis().weight(k) * dl);
      data.emplace_back(distance(l, k), wk);
      ++i;
    }
  }

  // Drop the solver-noise plateau before fitting.
  double peak = 0.0;
  for (const auto& [d, v] : data) peak = std::max(peak, v);
  std::vector<std::pair<double, double>> kept;
  for (const auto& [d, v] : data)
    if (v > peak * 1e-10) kept.emplace_back(d, v);

  decay_estimate est = detail::fit_shells(detail::shell_maxima(kept),
                                          decay_estimate::kind_t::inverse);
  if (est.diagonal) return est;

  // Pointwise envelope prefactor over the kept shells.
  const auto shells = detail::shell_maxima(kept);
  double c_env = 0.0;
  for (const auto& [j, v] : shells)
    if (v > 0.0) c_env = std::max(c_env, v * std::exp(est.eta * j));

  const double eta_bar = est.eta;
  if (w.dim() == 1) {
    est.c = 2.0 * c_env * std::exp(-eta_bar) / (1.0 - std::exp(-eta_bar));
  } else {
    est.eta = 0.95 * eta_bar;
    double worst = 0.0;
    for (int J = 0; J <= 400; ++J) {
      double tail = 0.0;
      for (int j = J + 1; j <= J + 400; ++j) {
        const double shell =
            double(ball_lattice_count(2, j) - ball_lattice_count(2, j - 1));
        tail += shell * std::exp(-eta_bar * j);
      }
      worst = std::max(worst, tail * std::exp(est.eta * J));
    }
    est.c = c_env * worst;
  }
  return est;
}

}  // namespace dyngal
