#pragma once

// Two-step enriched Doerfler marking and the dynamic bulk parameter.
//
// Step 1 (dorfler): the minimal set of residual indices capturing the bulk
// theta^2 of the squared dual norm, found greedily from the sorted weighted
// moduli.  Step 2 (enrich): a Euclidean ball of radius J around every marked
// index, with J = J(theta) the smallest integer making the inverse-matrix
// truncation tail small enough that enrichment preserves the contraction,
//   C_inv exp(-eta J) <= sqrt((1 - theta^2) / (alpha_lo alpha_hi)).
// The dynamic rule drives theta_n -> 1 by tying 1 - theta_n^2 to the
// squared residual reduction, which is what upgrades the linear contraction
// to a super-linear one.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dyngal/basis.hpp"
#include "dyngal/galerkin.hpp"
#include "dyngal/multi_index.hpp"
#include "dyngal/operator.hpp"

namespace dyngal {

struct marking_params {
  double c0 = 0.0;
  double sigma_mark = 1.0;           // exponent of the dynamic rule
  double theta_cap = 1.0 - 1e-12;    // keeps J(theta) finite near machine zero
  decay_estimate inverse_decay;      // kind must be inverse
  double alpha_lo = 0.0, alpha_hi = 0.0;
  double beta_lo = 1.0, beta_hi = 1.0;

  // Largest C0 for which the quadratic-contraction certificate applies.
  double certified_c0_bound() const {
    return 0.25 * std::sqrt(alpha_lo / alpha_hi) * (beta_lo / beta_hi);
  }
  bool certified() const { return c0 <= certified_c0_bound() * (1.0 + 1e-12); }
};

// Minimal-cardinality bulk set: sort weighted moduli |R_k| = |r_k| d_k^-1/2
// decreasingly (ties broken by canonical index order) and accumulate until
// theta^2 of the total squared mass is reached.
inline index_set dorfler(const residual_data& r, double theta) {
  if (theta < 0.0 || theta > 1.0)
    throw std::invalid_argument("dorfler: theta outside [0,1]");
  if (theta == 0.0) return index_set{};

  std::vector<std::pair<double, multi_index>> moduli;
  moduli.reserve(r.entries.size());
  for (const auto& [k, v] : r.entries)
    moduli.emplace_back(r.entries.weighted_modulus(k), k);
  std::sort(moduli.begin(), moduli.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });

  double total = 0.0;
  for (const auto& [m, k] : moduli) total += m * m;
  const double target = theta * theta * total;

  std::vector<multi_index> marked;
  double acc = 0.0;
  for (const auto& [m, k] : moduli) {
    if (acc >= target) break;
    acc += m * m;
    marked.push_back(k);
  }
  return index_set(std::move(marked));
}

// Smallest integer J >= 0 with  c exp(-eta J) <= sqrt((1-theta^2)/(a* a^*)).
inline int compute_j(double theta, const marking_params& mp) {
  if (theta >= 1.0)
    throw std::invalid_argument("compute_j: theta >= 1 needs J = infinity");
  if (theta < 0.0) throw std::invalid_argument("compute_j: theta < 0");
  const decay_estimate& inv = mp.inverse_decay;
  if (inv.diagonal) return 0;  // inverse truncation error is exactly zero
  if (!(inv.eta > 0.0))
    throw std::invalid_argument("compute_j: inverse decay rate not positive");
  const double rhs =
      std::sqrt((1.0 - theta * theta) / (mp.alpha_lo * mp.alpha_hi));
  auto ok = [&](int j) { return inv.c * std::exp(-inv.eta * j) <= rhs; };
  if (ok(0)) return 0;
  int j = std::max(0, int(std::ceil(std::log(inv.c / rhs) / inv.eta)));
  while (!ok(j)) ++j;
  while (j > 0 && ok(j - 1)) --j;
  return j;
}

// theta_n of the dynamic rule sqrt(1 - theta^2) = C0 (||r_n|| / ||r_0||)^sigma,
// clamped into [0, theta_cap].
inline double dynamic_theta(double r_norm, double r0_norm,
                            const marking_params& mp) {
  if (!(r0_norm > 0.0))
    throw std::invalid_argument("dynamic_theta: r0_norm must be positive");
  const double s = mp.c0 * std::pow(r_norm / r0_norm, mp.sigma_mark);
  const double one_minus_theta_sq = s * s;
  if (one_minus_theta_sq >= 1.0) return 0.0;
  return std::min(std::sqrt(1.0 - one_minus_theta_sq), mp.theta_cap);
}

struct e_dorfler_result {
  index_set enriched;  // the output set
  index_set marked;    // the Doerfler seeds
  int j = 0;
  bool saturated = false;
};

inline e_dorfler_result e_dorfler(const residual_data& r, double theta,
                                  const marking_params& mp, const window& w) {
  e_dorfler_result out;
  out.marked = dorfler(r, theta);
  out.j = compute_j(theta, mp);
  ball_result enriched = union_of_balls(out.marked, out.j, w);
  out.enriched = std::move(enriched.set);
  out.saturated = enriched.saturated;
  return out;
}

}  // namespace dyngal
