#pragma once

// Exact rational linear algebra and projection onto shifted polyhedral cones.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "stratakit/errors.hpp"
#include "stratakit/rational.hpp"

namespace stratakit {

using RationalMatrix = std::vector<RationalVector>;

/// Solves `a x = b` exactly by Gauss-Jordan elimination. Returns nullopt when
/// `a` is singular.
inline std::optional<RationalVector> solve_exact(RationalMatrix a, RationalVector b) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && a[pivot][col] == 0) ++pivot;
    if (pivot == n) return std::nullopt;
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    const Rational inv = 1 / a[col][col];
    for (std::size_t k = col; k < n; ++k) a[col][k] *= inv;
    b[col] *= inv;
    for (std::size_t row = 0; row < n; ++row) {
      if (row == col || a[row][col] == 0) continue;
      const Rational f = a[row][col];
      for (std::size_t k = col; k < n; ++k) a[row][k] -= f * a[col][k];
      b[row] -= f * b[col];
    }
  }
  return b;
}

/// Inverse of a nonsingular rational matrix.
inline RationalMatrix invert_exact(const RationalMatrix& a) {
  const std::size_t n = a.size();
  RationalMatrix inv(n, RationalVector(n));
  for (std::size_t j = 0; j < n; ++j) {
    RationalVector e(n);
    e[j] = 1;
    auto col = solve_exact(a, e);
    if (!col) throw InputError("matrix is singular");
    for (std::size_t i = 0; i < n; ++i) inv[i][j] = (*col)[i];
  }
  return inv;
}

/// Symmetric positive-definite integer Gram matrix on R^dim.
class InnerProduct {
 public:
  InnerProduct() = default;

  explicit InnerProduct(std::vector<IntVector> gram) : gram_(std::move(gram)) {
    const std::size_t n = gram_.size();
    if (n == 0) throw InputError("inner product must have positive dimension");
    for (const auto& row : gram_)
      if (row.size() != n) throw InputError("gram matrix is not square");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (gram_[i][j] != gram_[j][i]) throw InputError("gram matrix is not symmetric");
    // Leading principal minors via exact elimination without pivoting.
    RationalMatrix m(n, RationalVector(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m[i][j] = gram_[i][j];
    for (std::size_t k = 0; k < n; ++k) {
      if (m[k][k] <= 0) throw InputError("gram matrix is not positive-definite");
      for (std::size_t i = k + 1; i < n; ++i) {
        const Rational f = m[i][k] / m[k][k];
        for (std::size_t j = k; j < n; ++j) m[i][j] -= f * m[k][j];
      }
    }
    diagonal_ = true;
    for (std::size_t i = 0; i < n && diagonal_; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && gram_[i][j] != 0) {
          diagonal_ = false;
          break;
        }
  }

  static InnerProduct identity(std::size_t n) { return diagonal(IntVector(n, 1)); }

  static InnerProduct diagonal(const IntVector& entries) {
    std::vector<IntVector> g(entries.size(), IntVector(entries.size(), 0));
    for (std::size_t i = 0; i < entries.size(); ++i) g[i][i] = entries[i];
    return InnerProduct(std::move(g));
  }

  std::size_t dim() const noexcept { return gram_.size(); }
  const std::vector<IntVector>& gram() const noexcept { return gram_; }
  bool is_diagonal() const noexcept { return diagonal_; }

  Rational dot(const RationalVector& u, const RationalVector& v) const {
    check(u);
    check(v);
    Rational s = 0;
    const std::size_t n = dim();
    for (std::size_t i = 0; i < n; ++i) {
      if (u[i] == 0) continue;
      if (diagonal_) {
        s += u[i] * gram_[i][i] * v[i];
        continue;
      }
      for (std::size_t j = 0; j < n; ++j)
        if (gram_[i][j] != 0) s += u[i] * gram_[i][j] * v[j];
    }
    return s;
  }

  Rational norm_sq(const RationalVector& u) const { return dot(u, u); }

  double dot(const std::vector<double>& u, const std::vector<double>& v) const {
    double s = 0;
    for (std::size_t i = 0; i < dim(); ++i)
      for (std::size_t j = 0; j < dim(); ++j)
        s += u[i] * static_cast<double>(gram_[i][j]) * v[j];
    return s;
  }

  /// Maps a dual (character) vector into the primal space: G^{-1} x.
  RationalVector raise(const RationalVector& x) const {
    check(x);
    if (diagonal_) {
      RationalVector out(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] / gram_[i][i];
      return out;
    }
    RationalMatrix g(dim(), RationalVector(dim()));
    for (std::size_t i = 0; i < dim(); ++i)
      for (std::size_t j = 0; j < dim(); ++j) g[i][j] = gram_[i][j];
    auto sol = solve_exact(std::move(g), x);
    return *sol;  // positive-definite, never singular
  }

  void check(const RationalVector& v) const {
    if (v.size() != dim())
      throw InputError("dimension mismatch: expected " + std::to_string(dim()) + ", got " +
                       std::to_string(v.size()));
  }

 private:
  std::vector<IntVector> gram_;
  bool diagonal_ = true;
};

/// Moreau certificate for the point of `cone(generators) - rho` closest to 0.
struct ConeProjection {
  RationalVector beta;          ///< closest point of the shifted cone
  RationalVector cone_point;    ///< beta + rho, the projection of rho onto the cone
  RationalVector complement;    ///< rho - cone_point = -beta, lies in the polar cone
  std::vector<std::size_t> active;  ///< generators with positive coefficient
  RationalVector coefficients;  ///< one per generator, zero off the active set
};

namespace detail {

// Calls `fn(subset)` for each k-subset of {0..m-1} in lexicographic order until
// it returns true.
template <typename Fn>
bool for_each_subset(std::size_t m, std::size_t k, Fn&& fn) {
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    if (fn(idx)) return true;
    if (k == 0) return false;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == m - k + i - 1) --i;
    if (i == 0) return false;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace detail

/// Closest point to the origin of `cone(generators) - rho`.
///
/// Enumerates candidate faces by linearly independent generator subsets of
/// increasing size (lexicographic within a size) and returns the first whose
/// least-squares solution has strictly positive coefficients and is dual
/// feasible. Every candidate is verified against the KKT conditions, so the
/// result is the exact minimizer; the reported active set is the least
/// certifying subset in (size, lexicographic) order.
inline ConeProjection project_shifted_cone(const std::vector<RationalVector>& generators,
                                           const RationalVector& rho, const InnerProduct& ip) {
  ip.check(rho);
  for (const auto& g : generators) ip.check(g);

  const std::size_t m = generators.size();
  const std::size_t n = ip.dim();
  ConeProjection out;
  out.coefficients.assign(m, 0);

  if (is_zero(rho)) {
    out.beta.assign(n, 0);
    out.cone_point.assign(n, 0);
    out.complement.assign(n, 0);
    return out;
  }

  // Pairings are reused across subsets.
  std::vector<RationalVector> gram(m, RationalVector(m));
  RationalVector rhs(m);
  for (std::size_t i = 0; i < m; ++i) {
    rhs[i] = ip.dot(generators[i], rho);
    for (std::size_t j = 0; j <= i; ++j) gram[i][j] = gram[j][i] = ip.dot(generators[i], generators[j]);
  }

  bool found = false;
  for (std::size_t k = 0; k <= std::min(m, n) && !found; ++k) {
    found = detail::for_each_subset(m, k, [&](const std::vector<std::size_t>& s) {
      RationalMatrix a(k, RationalVector(k));
      RationalVector b(k);
      for (std::size_t i = 0; i < k; ++i) {
        b[i] = rhs[s[i]];
        for (std::size_t j = 0; j < k; ++j) a[i][j] = gram[s[i]][s[j]];
      }
      auto c = solve_exact(std::move(a), std::move(b));
      if (!c) return false;
      for (const auto& ci : *c)
        if (ci <= 0) return false;
      // Dual feasibility: (g_j, beta) = sum_i c_i (g_j, g_i) - (g_j, rho) >= 0.
      for (std::size_t j = 0; j < m; ++j) {
        Rational p = -rhs[j];
        for (std::size_t i = 0; i < k; ++i) p += (*c)[i] * gram[j][s[i]];
        if (p < 0) return false;
      }
      out.active = s;
      for (std::size_t i = 0; i < k; ++i) out.coefficients[s[i]] = (*c)[i];
      return true;
    });
  }
  // Carathéodory guarantees a certifying independent subset exists.
  if (!found) throw std::logic_error("cone projection found no certifying face");

  out.cone_point.assign(n, 0);
  for (std::size_t i : out.active)
    for (std::size_t r = 0; r < n; ++r) out.cone_point[r] += out.coefficients[i] * generators[i][r];
  out.beta.resize(n);
  out.complement.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    out.beta[r] = out.cone_point[r] - rho[r];
    out.complement[r] = -out.beta[r];
  }
  return out;
}

/// Unique integer vector with coprime entries on the open ray through `direction`.
inline IntVector primitive_integer_ray(const RationalVector& direction) {
  if (is_zero(direction)) throw DomainError("zero vector spans no ray");
  Integer lcm = 1;
  for (const auto& x : direction) {
    const Integer& d = boost::multiprecision::denominator(x);
    lcm = lcm / boost::multiprecision::gcd(lcm, d) * d;
  }
  std::vector<Integer> scaled;
  Integer g = 0;
  for (const auto& x : direction) {
    Integer v = boost::multiprecision::numerator(x) * (lcm / boost::multiprecision::denominator(x));
    g = boost::multiprecision::gcd(g, boost::multiprecision::abs(v));
    scaled.push_back(std::move(v));
  }
  IntVector out;
  out.reserve(scaled.size());
  for (const auto& v : scaled) out.push_back(to_int64(v / g));
  return out;
}

/// True iff (chi, lambda) >= 0 for every chi in `weights`.
inline bool dual_cone_contains(const std::vector<RationalVector>& weights,
                               const RationalVector& lambda, const InnerProduct& ip) {
  ip.check(lambda);
  for (const auto& w : weights)
    if (ip.dot(w, lambda) < 0) return false;
  return true;
}

/// True iff the generators' cone is the whole space, i.e. their dual cone is {0}.
inline bool positively_spans(const std::vector<RationalVector>& generators, const InnerProduct& ip) {
  for (const auto& g : generators) ip.check(g);
  const std::size_t n = ip.dim();
  for (std::size_t k = 0; k < n; ++k) {
    for (int sign : {1, -1}) {
      RationalVector e(n);
      e[k] = sign;
      if (!is_zero(project_shifted_cone(generators, e, ip).beta)) return false;
    }
  }
  return true;
}

enum class Containment { kContained, kStrictlyContained, kNotContained };

inline const char* to_string(Containment c) {
  switch (c) {
    case Containment::kContained: return "contained";
    case Containment::kStrictlyContained: return "strictly_contained";
    case Containment::kNotContained: return "not_contained";
  }
  return "?";
}

/// Decides whether the dual cone of `weights` lies in {(rho, .) >= 0}, and
/// whether it lies in {(rho, .) > 0} away from the origin.
///
/// Containment holds iff the shifted projection vanishes. Strict containment
/// holds iff the dual cone meets {(rho, .) <= 0} only at 0, i.e. iff
/// `weights` together with -rho positively span the space.
inline Containment halfspace_containment(const std::vector<RationalVector>& weights,
                                         const RationalVector& rho, const InnerProduct& ip) {
  if (!is_zero(project_shifted_cone(weights, rho, ip).beta)) return Containment::kNotContained;
  auto extended = weights;
  RationalVector neg(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) neg[i] = -rho[i];
  extended.push_back(std::move(neg));
  return positively_spans(extended, ip) ? Containment::kStrictlyContained : Containment::kContained;
}

}  // namespace stratakit
