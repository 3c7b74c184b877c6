#pragma once

// Riesz-basis descriptors and the sparse coefficient vectors they weigh.
//
// A basis supplies the weights d_k of the norm equivalence
//   ||v||_phi^2  = sum |v_k|^2 d_k      (primal)
//   ||f||_phi*^2 = sum |f_k|^2 / d_k    (dual)
// together with the equivalence constants beta_lo <= beta_hi.  Both supported
// bases (trigonometric, 1D Babuska-Shen) have beta_lo = beta_hi = 1.

#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>

#include "dyngal/multi_index.hpp"

namespace dyngal {

using complex = std::complex<double>;

struct basis_descriptor {
  basis_kind kind = basis_kind::fourier;
  int dim = 1;
  double beta_lo = 1.0;
  double beta_hi = 1.0;

  bool admissible(const multi_index& k) const {
    if (k.dim() != dim) return false;
    if (kind == basis_kind::legendre_bs) return k[0] >= 2;
    return true;
  }

  // d_k: 1 + |k|^2 for the trigonometric basis, 1 for the Babuska-Shen
  // basis (orthonormal in the H^1_0 inner product).
  double weight(const multi_index& k) const {
    if (!admissible(k))
      throw std::domain_error("basis: inadmissible index " + k.to_string());
    if (kind == basis_kind::fourier) return 1.0 + double(k.norm_sq());
    return 1.0;
  }
};

namespace detail {
struct primal_tag {};
struct dual_tag {};
}  // namespace detail

// Sparse association multi_index -> complex with no stored entries of
// modulus <= drop_tol (default 0: keep everything computed, prune exact
// zeros).  Entries iterate in canonical index order.
template <class Tag>
class sparse_vector {
 public:
  sparse_vector() = default;
  explicit sparse_vector(basis_descriptor basis, double drop_tol = 0.0)
      : basis_(basis), drop_tol_(drop_tol) {}

  const basis_descriptor& basis() const { return basis_; }

  void set(const multi_index& k, complex v) {
    if (std::abs(v) <= drop_tol_)
      entries_.erase(k);
    else
      entries_[k] = v;
  }

  void add(const multi_index& k, complex v) { set(k, at(k) + v); }

  complex at(const multi_index& k) const {
    auto it = entries_.find(k);
    return it == entries_.end() ? complex(0.0) : it->second;
  }

  bool has(const multi_index& k) const { return entries_.count(k) != 0; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  index_set support() const {
    std::vector<multi_index> ks;
    ks.reserve(entries_.size());
    for (const auto& [k, v] : entries_) ks.push_back(k);
    return index_set(std::move(ks));
  }

  // |v_k| d_k^(1/2) for primal vectors, |f_k| d_k^(-1/2) for dual ones:
  // the modulus in the frame where the norm is a plain l2 sum.
  double weighted_modulus(const multi_index& k) const {
    const double w = basis_.weight(k);
    if constexpr (std::is_same_v<Tag, detail::primal_tag>)
      return std::abs(at(k)) * std::sqrt(w);
    else
      return std::abs(at(k)) / std::sqrt(w);
  }

  double norm() const {
    double s = 0.0;
    for (const auto& [k, v] : entries_) {
      const double w = basis_.weight(k);
      const double m = std::norm(v);  // |v|^2
      if constexpr (std::is_same_v<Tag, detail::primal_tag>)
        s += m * w;
      else
        s += m / w;
    }
    return std::sqrt(s);
  }

  sparse_vector restricted_to(const index_set& lambda) const {
    sparse_vector out(basis_, drop_tol_);
    for (const auto& k : lambda) {
      auto it = entries_.find(k);
      if (it != entries_.end()) out.entries_[k] = it->second;
    }
    return out;
  }

  friend sparse_vector operator-(const sparse_vector& a,
                                 const sparse_vector& b) {
    sparse_vector out = a;
    for (const auto& [k, v] : b.entries_) out.add(k, -v);
    return out;
  }

 private:
  basis_descriptor basis_;
  double drop_tol_ = 0.0;
  std::map<multi_index, complex> entries_;
};

using coeff_vector = sparse_vector<detail::primal_tag>;  // primal v_k
using dual_vector = sparse_vector<detail::dual_tag>;     // dual f_k = <f, phi_k>

inline double weight(const multi_index& k, const basis_descriptor& b) {
  return b.weight(k);
}

inline double phi_norm(const coeff_vector& v) { return v.norm(); }
inline double dual_norm(const dual_vector& f) { return f.norm(); }

// P_Lambda / P*_Lambda: restriction of the stored entries to Lambda.
template <class Tag>
sparse_vector<Tag> project(const sparse_vector<Tag>& v,
                           const index_set& lambda) {
  return v.restricted_to(lambda);
}

// <f, v> = sum f_k conj(v_k): the duality pairing in coefficient form.
inline complex pairing(const dual_vector& f, const coeff_vector& v) {
  complex s = 0.0;
  for (const auto& [k, fv] : f) s += fv * std::conj(v.at(k));
  return s;
}

}  // namespace dyngal
