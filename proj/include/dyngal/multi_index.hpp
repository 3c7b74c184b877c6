#pragma once

// Lattice multi-indices, finite index sets and the bounded index window the
// algorithms operate on.  Dimensions 1 and 2 are supported; a multi_index is
// a small value type, an index_set is a sorted duplicate-free vector.

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dyngal {

enum class basis_kind { fourier, legendre_bs };

class multi_index {
 public:
  multi_index() = default;
  explicit multi_index(int k0) : comps_{k0, 0}, dim_(1) {}
  multi_index(int k0, int k1) : comps_{k0, k1}, dim_(2) {}

  int dim() const { return dim_; }
  int operator[](int i) const { return comps_[i]; }

  std::int64_t norm_sq() const {
    std::int64_t s = 0;
    for (int i = 0; i < dim_; ++i) s += std::int64_t(comps_[i]) * comps_[i];
    return s;
  }
  double norm() const { return std::sqrt(double(norm_sq())); }

  // Euclidean distance |k - l| on the lattice.
  friend double distance(const multi_index& a, const multi_index& b) {
    std::int64_t s = 0;
    for (int i = 0; i < a.dim_; ++i) {
      const std::int64_t d = std::int64_t(a.comps_[i]) - b.comps_[i];
      s += d * d;
    }
    return std::sqrt(double(s));
  }
  friend std::int64_t distance_sq(const multi_index& a, const multi_index& b) {
    std::int64_t s = 0;
    for (int i = 0; i < a.dim_; ++i) {
      const std::int64_t d = std::int64_t(a.comps_[i]) - b.comps_[i];
      s += d * d;
    }
    return s;
  }

  // Canonical (lexicographic) order; indices of different dimension never mix
  // inside one problem, but keep the comparison total anyway.
  friend std::strong_ordering operator<=>(const multi_index& a,
                                          const multi_index& b) {
    if (a.dim_ != b.dim_) return a.dim_ <=> b.dim_;
    for (int i = 0; i < a.dim_; ++i)
      if (a.comps_[i] != b.comps_[i]) return a.comps_[i] <=> b.comps_[i];
    return std::strong_ordering::equal;
  }
  friend bool operator==(const multi_index& a, const multi_index& b) {
    return (a <=> b) == std::strong_ordering::equal;
  }

  // Canonical textual form: "(3)" or "(3,-2)".
  std::string to_string() const {
    std::string s = "(" + std::to_string(comps_[0]);
    for (int i = 1; i < dim_; ++i) s += "," + std::to_string(comps_[i]);
    return s + ")";
  }

  static multi_index parse(std::string_view text) {
    if (text.size() < 3 || text.front() != '(' || text.back() != ')')
      throw std::invalid_argument("multi_index: malformed text form: " +
                                  std::string(text));
    std::array<int, 2> comps{0, 0};
    int dim = 0;
    std::size_t pos = 1;
    while (pos < text.size() - 1) {
      if (dim >= 2)
        throw std::invalid_argument("multi_index: more than 2 components");
      std::size_t next = text.find(',', pos);
      if (next == std::string_view::npos || next > text.size() - 1)
        next = text.size() - 1;
      comps[dim++] = std::stoi(std::string(text.substr(pos, next - pos)));
      pos = next + 1;
    }
    if (dim == 0) throw std::invalid_argument("multi_index: empty text form");
    return dim == 1 ? multi_index(comps[0]) : multi_index(comps[0], comps[1]);
  }

 private:
  std::array<int, 2> comps_{0, 0};
  int dim_ = 1;
};

// Finite index set with canonical (lexicographic) ordering independent of
// insertion order.  Union/difference are exact set operations.
class index_set {
 public:
  index_set() = default;
  explicit index_set(std::vector<multi_index> members)
      : members_(std::move(members)) {
    normalize();
  }
  index_set(std::initializer_list<multi_index> members)
      : members_(members) {
    normalize();
  }

  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }

  bool contains(const multi_index& k) const {
    return std::binary_search(members_.begin(), members_.end(), k);
  }

  void insert(const multi_index& k) {
    auto it = std::lower_bound(members_.begin(), members_.end(), k);
    if (it == members_.end() || *it != k) members_.insert(it, k);
  }

  friend index_set set_union(const index_set& a, const index_set& b) {
    index_set out;
    out.members_.reserve(a.size() + b.size());
    std::set_union(a.members_.begin(), a.members_.end(), b.members_.begin(),
                   b.members_.end(), std::back_inserter(out.members_));
    return out;
  }

  friend index_set set_difference(const index_set& a, const index_set& b) {
    index_set out;
    std::set_difference(a.members_.begin(), a.members_.end(),
                        b.members_.begin(), b.members_.end(),
                        std::back_inserter(out.members_));
    return out;
  }

  bool is_subset_of(const index_set& other) const {
    return std::includes(other.members_.begin(), other.members_.end(),
                         members_.begin(), members_.end());
  }

  auto begin() const { return members_.begin(); }
  auto end() const { return members_.end(); }
  const std::vector<multi_index>& members() const { return members_; }

  friend bool operator==(const index_set&, const index_set&) = default;

 private:
  void normalize() {
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()),
                   members_.end());
  }
  std::vector<multi_index> members_;
};

// Bounded computational universe standing in for the infinite index set.
// An l-infinity box of radius radius_max intersected with the basis's
// admissible range (all of Z^d for Fourier, k >= 2 for the 1D Babuska-Shen
// basis).  Leaving the box is "saturation", a detectable condition that the
// callers must surface; falling outside the admissible range is a property
// of the basis, not of the window, and is clipped silently.
class window {
 public:
  window(basis_kind kind, int dim, int radius_max)
      : kind_(kind), dim_(dim), radius_(radius_max) {
    if (radius_max <= 0) throw std::invalid_argument("window: radius_max <= 0");
    if (dim < 1 || dim > 2) throw std::invalid_argument("window: dim not in {1,2}");
    if (kind == basis_kind::legendre_bs && dim != 1)
      throw std::invalid_argument("window: legendre_bs requires dim == 1");
  }

  basis_kind kind() const { return kind_; }
  int dim() const { return dim_; }
  int radius_max() const { return radius_; }

  bool admissible(const multi_index& k) const {
    if (k.dim() != dim_) return false;
    if (kind_ == basis_kind::legendre_bs) return k[0] >= 2;
    return true;
  }

  bool in_box(const multi_index& k) const {
    for (int i = 0; i < dim_; ++i)
      if (std::abs(k[i]) > radius_) return false;
    return true;
  }

  bool contains(const multi_index& k) const {
    return admissible(k) && in_box(k);
  }

  // All window indices in canonical order.
  std::vector<multi_index> indices() const {
    std::vector<multi_index> out;
    if (dim_ == 1) {
      const int lo = (kind_ == basis_kind::legendre_bs) ? 2 : -radius_;
      for (int k = lo; k <= radius_; ++k) out.emplace_back(k);
    } else {
      for (int k0 = -radius_; k0 <= radius_; ++k0)
        for (int k1 = -radius_; k1 <= radius_; ++k1) out.emplace_back(k0, k1);
    }
    return out;
  }

  // Window indices sorted by |k| (then lexicographic): the canonical
  // enumeration used for manufactured coefficient profiles.
  std::vector<multi_index> indices_by_norm() const {
    std::vector<multi_index> out = indices();
    std::stable_sort(out.begin(), out.end(),
                     [](const multi_index& a, const multi_index& b) {
                       if (a.norm_sq() != b.norm_sq())
                         return a.norm_sq() < b.norm_sq();
                       return a < b;
                     });
    return out;
  }

  std::size_t cardinality() const {
    if (dim_ == 1)
      return kind_ == basis_kind::legendre_bs ? std::size_t(radius_ - 1)
                                              : std::size_t(2 * radius_ + 1);
    return std::size_t(2 * radius_ + 1) * std::size_t(2 * radius_ + 1);
  }

 private:
  basis_kind kind_;
  int dim_;
  int radius_;
};

// Number of lattice points in the closed Euclidean ball of radius j.
inline std::int64_t ball_lattice_count(int dim, int j) {
  if (j < 0) return 0;
  if (dim == 1) return 2 * std::int64_t(j) + 1;
  std::int64_t n = 0;
  const std::int64_t jsq = std::int64_t(j) * j;
  for (int a = -j; a <= j; ++a)
    for (int b = -j; b <= j; ++b)
      if (std::int64_t(a) * a + std::int64_t(b) * b <= jsq) ++n;
  return n;
}

struct ball_result {
  index_set set;
  bool saturated = false;  // un-intersected ball left the window box
};

// Closed Euclidean ball of radius j around center, intersected with the
// window and the basis's admissible range.
inline ball_result ball(const multi_index& center, int j, const window& w) {
  if (j < 0) throw std::invalid_argument("ball: negative radius");
  if (!w.contains(center))
    throw std::invalid_argument("ball: center outside window");
  ball_result out;
  const std::int64_t jsq = std::int64_t(j) * j;
  std::vector<multi_index> pts;
  auto consider = [&](const multi_index& k) {
    if (!w.in_box(k)) {
      out.saturated = true;
      return;
    }
    if (w.admissible(k)) pts.push_back(k);
  };
  if (w.dim() == 1) {
    for (int a = center[0] - j; a <= center[0] + j; ++a)
      consider(multi_index(a));
  } else {
    for (int a = center[0] - j; a <= center[0] + j; ++a)
      for (int b = center[1] - j; b <= center[1] + j; ++b) {
        const multi_index k(a, b);
        if (distance_sq(k, center) <= jsq) consider(k);
      }
  }
  out.set = index_set(std::move(pts));
  return out;
}

inline ball_result union_of_balls(const index_set& seeds, int j,
                                  const window& w) {
  ball_result out;
  std::vector<multi_index> pts;
  for (const auto& s : seeds) {
    ball_result b = ball(s, j, w);
    out.saturated = out.saturated || b.saturated;
    pts.insert(pts.end(), b.set.begin(), b.set.end());
  }
  out.set = index_set(std::move(pts));
  return out;
}

}  // namespace dyngal
