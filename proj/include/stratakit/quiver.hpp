#pragma once

// Quiver representations: the group G(Q,d) with character rho_theta, slope
// semistability, Harder-Narasimhan types and their block structures, and a
// generator of representations with a known HN type.

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "stratakit/errors.hpp"
#include "stratakit/ratgeom.hpp"
#include "stratakit/rational.hpp"
#include "stratakit/torus.hpp"

namespace stratakit {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using DimVector = IntVector;

struct Arrow {
  std::size_t tail = 0;
  std::size_t head = 0;
  std::string name;
};

class Quiver {
 public:
  Quiver() = default;

  Quiver(std::vector<std::string> vertices, std::vector<Arrow> arrows)
      : vertices_(std::move(vertices)), arrows_(std::move(arrows)) {
    for (std::size_t v = 0; v < vertices_.size(); ++v) {
      if (index_.count(vertices_[v])) throw InputError("duplicate vertex '" + vertices_[v] + "'", "vertices");
      index_[vertices_[v]] = v;
    }
    for (std::size_t a = 0; a < arrows_.size(); ++a) {
      auto& ar = arrows_[a];
      if (ar.tail >= vertices_.size() || ar.head >= vertices_.size())
        throw InputError("arrow endpoint out of range", "arrows[" + std::to_string(a) + "]");
      if (ar.name.empty()) ar.name = "a" + std::to_string(a);
    }
  }

  std::size_t vertex_count() const noexcept { return vertices_.size(); }
  std::size_t arrow_count() const noexcept { return arrows_.size(); }
  const std::vector<std::string>& vertices() const noexcept { return vertices_; }
  const std::vector<Arrow>& arrows() const noexcept { return arrows_; }
  const Arrow& arrow(std::size_t a) const { return arrows_.at(a); }

  std::size_t vertex_index(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) throw InputError("unknown vertex '" + label + "'");
    return it->second;
  }

 private:
  std::vector<std::string> vertices_;
  std::vector<Arrow> arrows_;
  std::map<std::string, std::size_t> index_;
};

/// Quiver with dimension vector d, stability theta and inner-product weights
/// alpha. Requires sum theta_v d_v = 0.
class QuiverInstance {
 public:
  QuiverInstance() = default;

  QuiverInstance(Quiver quiver, DimVector d, IntVector theta, IntVector alpha)
      : quiver_(std::move(quiver)), d_(std::move(d)), theta_(std::move(theta)), alpha_(std::move(alpha)) {
    const std::size_t n = quiver_.vertex_count();
    if (d_.size() != n) throw InputError("one entry per vertex required", "d");
    if (theta_.size() != n) throw InputError("one entry per vertex required", "theta");
    if (alpha_.size() != n) throw InputError("one entry per vertex required", "alpha");
    std::int64_t s = 0;
    for (std::size_t v = 0; v < n; ++v) {
      if (d_[v] < 0) throw InputError("dimensions must be nonnegative", "d[" + std::to_string(v) + "]");
      if (alpha_[v] < 1) throw InputError("weights must be positive", "alpha[" + std::to_string(v) + "]");
      s += theta_[v] * d_[v];
    }
    if (s != 0) throw InputError("sum of theta_v d_v must vanish, got " + std::to_string(s), "theta");
    offsets_.assign(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v) offsets_[v + 1] = offsets_[v] + static_cast<std::size_t>(d_[v]);
  }

  const Quiver& quiver() const noexcept { return quiver_; }
  const DimVector& d() const noexcept { return d_; }
  const IntVector& theta() const noexcept { return theta_; }
  const IntVector& alpha() const noexcept { return alpha_; }
  std::size_t vertex_count() const noexcept { return quiver_.vertex_count(); }
  std::size_t dim(std::size_t v) const { return static_cast<std::size_t>(d_.at(v)); }

  /// Rank of the maximal torus; coordinates (v, k) start at offset(v).
  std::size_t total_dim() const noexcept { return offsets_.empty() ? 0 : offsets_.back(); }
  std::size_t offset(std::size_t v) const { return offsets_.at(v); }

  bool is_abelian() const {
    return std::all_of(d_.begin(), d_.end(), [](auto x) { return x <= 1; });
  }

  std::int64_t theta_of(const DimVector& e) const { return pair(theta_, e); }
  std::int64_t alpha_of(const DimVector& e) const { return pair(alpha_, e); }

 private:
  static std::int64_t pair(const IntVector& w, const DimVector& e) {
    std::int64_t s = 0;
    for (std::size_t v = 0; v < w.size(); ++v) s += w[v] * e.at(v);
    return s;
  }

  Quiver quiver_;
  DimVector d_;
  IntVector theta_;
  IntVector alpha_;
  std::vector<std::size_t> offsets_;
};

/// One complex d_{h(a)} x d_{t(a)} matrix per arrow.
struct QuiverRep {
  std::vector<Matrix> maps;
};

/// One invertible d_v x d_v matrix per vertex.
using GroupElement = std::vector<Matrix>;

inline QuiverRep zero_rep(const QuiverInstance& inst) {
  QuiverRep r;
  for (const auto& a : inst.quiver().arrows())
    r.maps.push_back(Matrix::Zero(inst.dim(a.head), inst.dim(a.tail)));
  return r;
}

inline void check_rep(const QuiverRep& rep, const QuiverInstance& inst) {
  const auto& arrows = inst.quiver().arrows();
  if (rep.maps.size() != arrows.size())
    throw InputError("expected " + std::to_string(arrows.size()) + " arrow matrices, got " +
                     std::to_string(rep.maps.size()), "reps");
  for (std::size_t a = 0; a < arrows.size(); ++a) {
    const auto& m = rep.maps[a];
    if (static_cast<std::size_t>(m.rows()) != inst.dim(arrows[a].head) ||
        static_cast<std::size_t>(m.cols()) != inst.dim(arrows[a].tail))
      throw InputError("matrix shape does not match d", "reps." + arrows[a].name);
  }
}

inline GroupElement identity_element(const QuiverInstance& inst) {
  GroupElement g;
  for (std::size_t v = 0; v < inst.vertex_count(); ++v) g.push_back(Matrix::Identity(inst.dim(v), inst.dim(v)));
  return g;
}

/// g . phi : phi_a -> g_{h(a)} phi_a g_{t(a)}^{-1}.
inline QuiverRep act(const GroupElement& g, const QuiverRep& rep, const QuiverInstance& inst) {
  check_rep(rep, inst);
  std::vector<Matrix> inv;
  for (const auto& gv : g) inv.push_back(gv.size() ? Matrix(gv.inverse()) : gv);
  QuiverRep out;
  for (std::size_t a = 0; a < rep.maps.size(); ++a) {
    const auto& ar = inst.quiver().arrow(a);
    out.maps.push_back(g[ar.head] * rep.maps[a] * inv[ar.tail]);
  }
  return out;
}

inline double rep_norm_sq(const QuiverRep& rep) {
  double s = 0;
  for (const auto& m : rep.maps) s += m.squaredNorm();
  return s;
}

// ---------------------------------------------------------------------------
// Maximal torus model

/// The diagonal maximal torus of G(Q,d) acting on Rep(Q,d). Entry (i, j) of
/// arrow a has weight e_{(h,i)} - e_{(t,j)}; rho = theta_v on every
/// coordinate of vertex v; the inner product is diag(alpha_v).
inline TorusActionSpec torus_spec_of(const QuiverInstance& inst) {
  const std::size_t n = inst.total_dim();
  if (n == 0) throw DomainError("dimension vector is zero");
  std::vector<IntVector> weights;
  std::vector<std::string> labels;
  for (const auto& ar : inst.quiver().arrows()) {
    for (std::size_t i = 0; i < inst.dim(ar.head); ++i)
      for (std::size_t j = 0; j < inst.dim(ar.tail); ++j) {
        IntVector w(n, 0);
        w[inst.offset(ar.head) + i] += 1;
        w[inst.offset(ar.tail) + j] -= 1;
        weights.push_back(std::move(w));
        labels.push_back(ar.name + "[" + std::to_string(i) + "," + std::to_string(j) + "]");
      }
  }
  IntVector rho(n), ip(n);
  for (std::size_t v = 0; v < inst.vertex_count(); ++v)
    for (std::size_t k = 0; k < inst.dim(v); ++k) {
      rho[inst.offset(v) + k] = inst.theta()[v];
      ip[inst.offset(v) + k] = inst.alpha()[v];
    }
  return TorusActionSpec(n, std::move(weights), std::move(rho), InnerProduct::diagonal(ip), std::move(labels));
}

/// Arrow entries in the coordinate order of torus_spec_of.
inline TorusPoint flatten(const QuiverRep& rep, const QuiverInstance& inst) {
  check_rep(rep, inst);
  TorusPoint out;
  for (const auto& m : rep.maps)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  return out;
}

/// Sorts each vertex's coordinates decreasingly (Weyl chamber representative).
template <typename T>
std::vector<T> sort_per_vertex(std::vector<T> flat, const QuiverInstance& inst) {
  if (flat.size() != inst.total_dim()) throw InputError("vector length differs from total dimension");
  for (std::size_t v = 0; v < inst.vertex_count(); ++v) {
    auto b = flat.begin() + static_cast<std::ptrdiff_t>(inst.offset(v));
    std::sort(b, b + static_cast<std::ptrdiff_t>(inst.dim(v)), std::greater<T>());
  }
  return flat;
}

// ---------------------------------------------------------------------------
// Slopes and the abelian oracle

inline Rational slope(const DimVector& e, const QuiverInstance& inst) {
  if (e.size() != inst.vertex_count()) throw InputError("dimension vector has wrong length");
  for (std::size_t v = 0; v < e.size(); ++v)
    if (e[v] < 0 || e[v] > inst.d()[v]) throw InputError("dimension vector must satisfy 0 <= e <= d");
  if (std::all_of(e.begin(), e.end(), [](auto x) { return x == 0; }))
    throw DomainError("slope of the zero dimension vector is undefined");
  return make_rational(inst.theta_of(e), inst.alpha_of(e));
}

namespace detail {

using VertexMask = std::uint64_t;

inline DimVector mask_dims(VertexMask m, std::size_t n) {
  DimVector e(n, 0);
  for (std::size_t v = 0; v < n; ++v)
    if (m >> v & 1U) e[v] = 1;
  return e;
}

inline Rational mask_slope(VertexMask m, const QuiverInstance& inst) {
  auto e = mask_dims(m, inst.vertex_count());
  return make_rational(inst.theta_of(e), inst.alpha_of(e));
}

inline VertexMask support_mask(const QuiverInstance& inst) {
  if (inst.vertex_count() > 30) throw ResourceError("abelian oracle supports at most 30 vertices");
  VertexMask m = 0;
  for (std::size_t v = 0; v < inst.vertex_count(); ++v)
    if (inst.d()[v] == 1) m |= VertexMask{1} << v;
  return m;
}

inline std::vector<bool> nonzero_arrows(const QuiverRep& rep, const QuiverInstance& inst) {
  check_rep(rep, inst);
  if (!inst.is_abelian())
    throw UnsupportedError("exact subrepresentation enumeration needs d_v <= 1; use the flow classification");
  std::vector<bool> nz;
  for (const auto& m : rep.maps) nz.push_back(m.size() == 1 && m(0, 0) != Complex(0, 0));
  return nz;
}

/// Subsets S of `within` closed under the nonzero arrows with both ends in
/// `within`, in increasing mask order.
inline std::vector<VertexMask> closed_subsets(const QuiverInstance& inst, VertexMask within,
                                              const std::vector<bool>& nonzero) {
  std::vector<VertexMask> out;
  // Enumerate submasks of `within` in increasing order.
  VertexMask s = 0;
  while (true) {
    bool closed = true;
    for (std::size_t a = 0; a < nonzero.size() && closed; ++a) {
      if (!nonzero[a]) continue;
      const auto& ar = inst.quiver().arrow(a);
      VertexMask t = VertexMask{1} << ar.tail, h = VertexMask{1} << ar.head;
      if ((within & t) && (within & h) && (s & t) && !(s & h)) closed = false;
    }
    if (closed) out.push_back(s);
    if (s == within) break;
    s = (s - within) & within;
  }
  return out;
}

/// Slope semistability of the subquotient supported on `block`.
inline bool block_semistable(const QuiverInstance& inst, VertexMask block, const std::vector<bool>& nonzero) {
  const Rational mu = mask_slope(block, inst);
  for (VertexMask s : closed_subsets(inst, block, nonzero))
    if (s != 0 && mask_slope(s, inst) < mu) return false;
  return true;
}

}  // namespace detail

/// Dimension vectors of all subrepresentations of an abelian representation.
inline std::vector<DimVector> subrep_candidates_abelian(const QuiverRep& rep, const QuiverInstance& inst) {
  auto nz = detail::nonzero_arrows(rep, inst);
  std::vector<DimVector> out;
  for (auto s : detail::closed_subsets(inst, detail::support_mask(inst), nz))
    out.push_back(detail::mask_dims(s, inst.vertex_count()));
  return out;
}

/// Ordered dimension vectors (d_1, ..., d_s) with strictly increasing slopes.
struct HNType {
  std::vector<DimVector> parts;
  std::vector<Rational> slopes;

  std::size_t length() const noexcept { return parts.size(); }
  bool operator==(const HNType& o) const { return parts == o.parts; }
};

inline HNType make_hn_type(std::vector<DimVector> parts, const QuiverInstance& inst) {
  HNType t;
  DimVector sum(inst.vertex_count(), 0);
  for (const auto& p : parts) {
    if (p.size() != inst.vertex_count()) throw InputError("HN part has wrong length");
    if (std::all_of(p.begin(), p.end(), [](auto x) { return x == 0; })) throw DomainError("HN part is zero");
    for (std::size_t v = 0; v < p.size(); ++v) {
      if (p[v] < 0) throw InputError("HN part has a negative entry");
      sum[v] += p[v];
    }
  }
  if (sum != inst.d()) throw DomainError("HN parts do not sum to d");
  for (const auto& p : parts) t.slopes.push_back(make_rational(inst.theta_of(p), inst.alpha_of(p)));
  for (std::size_t i = 1; i < t.slopes.size(); ++i)
    if (!(t.slopes[i - 1] < t.slopes[i]))
      throw DomainError("HN slopes must strictly increase, got " + to_string(t.slopes[i - 1]) + " then " +
                        to_string(t.slopes[i]));
  t.parts = std::move(parts);
  return t;
}

/// HN type of an abelian representation: repeatedly split off, from the
/// current quotient, the closed vertex set of minimal slope and among those
/// maximal alpha-size.
inline HNType hn_filtration_abelian(const QuiverRep& rep, const QuiverInstance& inst) {
  auto nz = detail::nonzero_arrows(rep, inst);
  detail::VertexMask rest = detail::support_mask(inst);
  std::vector<DimVector> parts;
  while (rest != 0) {
    detail::VertexMask best = 0;
    Rational best_slope;
    std::int64_t best_size = 0;
    bool tie = false;
    for (auto s : detail::closed_subsets(inst, rest, nz)) {
      if (s == 0) continue;
      Rational mu = detail::mask_slope(s, inst);
      std::int64_t size = inst.alpha_of(detail::mask_dims(s, inst.vertex_count()));
      if (best == 0 || mu < best_slope || (mu == best_slope && size > best_size)) {
        best = s, best_slope = mu, best_size = size, tie = false;
      } else if (mu == best_slope && size == best_size) {
        tie = true;
      }
    }
    if (tie) throw std::logic_error("HN selection tie: maximal destabilizing subobject is not unique");
    if (!detail::block_semistable(inst, best, nz))
      throw std::logic_error("HN quotient failed the semistability check");
    parts.push_back(detail::mask_dims(best, inst.vertex_count()));
    rest &= ~best;
  }
  return make_hn_type(std::move(parts), inst);
}

inline bool is_semistable_abelian(const QuiverRep& rep, const QuiverInstance& inst) {
  return hn_filtration_abelian(rep, inst).length() <= 1;
}

// ---------------------------------------------------------------------------
// beta(tau) and block structure

/// beta(tau): block i carries beta_i = -slope(d_i) on each of its
/// coordinates, with blocks laid out in tau order inside every vertex.
/// lambda = scale * beta is the primitive integral 1-PS (zero when beta = 0).
struct BlockWeights {
  HNType tau;
  std::vector<Rational> block_beta;            ///< beta_1 > ... > beta_s
  std::vector<std::int64_t> block_lambda;      ///< scale * beta_i
  Rational scale;                              ///< n with lambda = n beta; 0 when beta = 0
  std::vector<std::vector<std::size_t>> block_of;  ///< per vertex, block index of each coordinate
  Rational norm_sq;                            ///< ||beta||^2_alpha

  RationalVector flat_beta() const {
    RationalVector out;
    for (const auto& bv : block_of)
      for (auto i : bv) out.push_back(block_beta[i]);
    return out;
  }
  IntVector flat_lambda() const {
    IntVector out;
    for (const auto& bv : block_of)
      for (auto i : bv) out.push_back(block_lambda[i]);
    return out;
  }
  std::vector<RationalVector> vertex_beta() const {
    std::vector<RationalVector> out;
    for (const auto& bv : block_of) {
      RationalVector r;
      for (auto i : bv) r.push_back(block_beta[i]);
      out.push_back(std::move(r));
    }
    return out;
  }
  bool is_zero() const { return scale == 0; }
};

inline BlockWeights beta_of_type(const HNType& tau, const QuiverInstance& inst) {
  BlockWeights b;
  b.tau = tau;
  for (const auto& s : tau.slopes) b.block_beta.push_back(-s);
  b.block_of.resize(inst.vertex_count());
  for (std::size_t i = 0; i < tau.parts.size(); ++i)
    for (std::size_t v = 0; v < inst.vertex_count(); ++v)
      for (std::int64_t k = 0; k < tau.parts[i][v]; ++k) b.block_of[v].push_back(i);
  b.norm_sq = 0;
  for (std::size_t i = 0; i < tau.parts.size(); ++i)
    b.norm_sq += b.block_beta[i] * b.block_beta[i] * inst.alpha_of(tau.parts[i]);
  RationalVector distinct = b.block_beta;
  if (stratakit::is_zero(distinct)) {
    b.scale = 0;
    b.block_lambda.assign(tau.parts.size(), 0);
    return b;
  }
  auto ray = primitive_integer_ray(distinct);
  for (std::size_t i = 0; i < ray.size(); ++i)
    if (ray[i] != 0) {
      b.scale = Rational(ray[i]) / b.block_beta[i];
      break;
    }
  b.block_lambda = ray;
  return b;
}

/// Zero patterns Z_tau (diagonal blocks only) and Y_tau (no strictly lower
/// blocks) and the projection p_tau : Y_tau -> Z_tau.
class BlockStructure {
 public:
  BlockStructure(BlockWeights beta, QuiverInstance inst) : beta_(std::move(beta)), inst_(std::move(inst)) {}

  const BlockWeights& beta() const noexcept { return beta_; }
  std::size_t head_block(std::size_t a, std::size_t row) const {
    return beta_.block_of[inst_.quiver().arrow(a).head].at(row);
  }
  std::size_t tail_block(std::size_t a, std::size_t col) const {
    return beta_.block_of[inst_.quiver().arrow(a).tail].at(col);
  }

  /// lambda_beta-weight of entry (row, col) of arrow a: n (beta_i - beta_j).
  std::int64_t entry_weight(std::size_t a, std::size_t row, std::size_t col) const {
    return beta_.block_lambda[head_block(a, row)] - beta_.block_lambda[tail_block(a, col)];
  }

  bool in_Z(const QuiverRep& rep) const { return pattern_holds(rep, [](auto i, auto j) { return i == j; }); }
  bool in_Y(const QuiverRep& rep) const { return pattern_holds(rep, [](auto i, auto j) { return i <= j; }); }

  QuiverRep p_tau(const QuiverRep& rep) const {
    if (!in_Y(rep)) throw InputError("p_tau is defined on Y_tau only");
    QuiverRep out = rep;
    for_entries(out, [&](std::size_t a, Eigen::Index r, Eigen::Index c, Complex& x) {
      if (head_block(a, r) != tail_block(a, c)) x = 0;
    });
    return out;
  }

  /// Zeroes the strictly lower blocks.
  QuiverRep project_Y(const QuiverRep& rep) const {
    QuiverRep out = rep;
    for_entries(out, [&](std::size_t a, Eigen::Index r, Eigen::Index c, Complex& x) {
      if (head_block(a, r) > tail_block(a, c)) x = 0;
    });
    return out;
  }

 private:
  template <typename Fn>
  void for_entries(QuiverRep& rep, Fn&& fn) const {
    check_rep(rep, inst_);
    for (std::size_t a = 0; a < rep.maps.size(); ++a)
      for (Eigen::Index r = 0; r < rep.maps[a].rows(); ++r)
        for (Eigen::Index c = 0; c < rep.maps[a].cols(); ++c)
          fn(a, r, c, rep.maps[a](r, c));
  }

  template <typename Allowed>
  bool pattern_holds(const QuiverRep& rep, Allowed allowed) const {
    check_rep(rep, inst_);
    for (std::size_t a = 0; a < rep.maps.size(); ++a)
      for (Eigen::Index r = 0; r < rep.maps[a].rows(); ++r)
        for (Eigen::Index c = 0; c < rep.maps[a].cols(); ++c)
          if (!allowed(head_block(a, r), tail_block(a, c)) && rep.maps[a](r, c) != Complex(0, 0)) return false;
    return true;
  }

  BlockWeights beta_;
  QuiverInstance inst_;
};

/// Natural pairing of a character (per-coordinate coefficients) with a 1-PS.
inline Rational character_pairing(const RationalVector& chi, const IntVector& lambda) {
  if (chi.size() != lambda.size()) throw InputError("character and 1-PS lengths differ");
  Rational s = 0;
  for (std::size_t k = 0; k < chi.size(); ++k) s += chi[k] * lambda[k];
  return s;
}

/// rho_lambda = ||lambda||^2 rho - (rho, lambda) lambda^*, per coordinate.
/// lambda is a flat integer pattern over the maximal torus coordinates.
inline RationalVector rho_lambda(const IntVector& lambda, const QuiverInstance& inst) {
  if (lambda.size() != inst.total_dim()) throw InputError("1-PS has wrong length");
  if (std::all_of(lambda.begin(), lambda.end(), [](auto x) { return x == 0; })) throw DomainError("trivial 1-PS");
  Rational norm = 0, pairing = 0;
  for (std::size_t v = 0; v < inst.vertex_count(); ++v)
    for (std::size_t k = 0; k < inst.dim(v); ++k) {
      auto l = lambda[inst.offset(v) + k];
      norm += Rational(inst.alpha()[v] * l * l);
      pairing += Rational(inst.theta()[v] * l);
    }
  RationalVector out(lambda.size());
  for (std::size_t v = 0; v < inst.vertex_count(); ++v)
    for (std::size_t k = 0; k < inst.dim(v); ++k) {
      auto idx = inst.offset(v) + k;
      out[idx] = norm * inst.theta()[v] - pairing * inst.alpha()[v] * lambda[idx];
    }
  return out;
}

/// True iff g lies in P_beta: every entry (k, l) of g_v with
/// beta_k < beta_l vanishes.
inline bool parabolic_membership(const GroupElement& g, const BlockWeights& beta, const QuiverInstance& inst) {
  if (g.size() != inst.vertex_count()) throw InputError("one matrix per vertex required");
  auto vb = beta.vertex_beta();
  for (std::size_t v = 0; v < g.size(); ++v) {
    const auto n = static_cast<Eigen::Index>(inst.dim(v));
    if (g[v].rows() != n || g[v].cols() != n) throw InputError("group element shape does not match d");
    if (n > 0 && !Eigen::FullPivLU<Matrix>(g[v]).isInvertible()) throw InputError("group element is singular");
    for (Eigen::Index k = 0; k < n; ++k)
      for (Eigen::Index l = 0; l < n; ++l)
        if (vb[v][k] < vb[v][l] && g[v](k, l) != Complex(0, 0)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Candidate indices

struct BetaCandidate {
  HNType tau;
  RationalVector beta;  ///< flat, decreasing per vertex
  Rational norm_sq;
};

/// beta(tau) for every ordered decomposition of d into nonzero parts of
/// strictly increasing slope, sorted by ||beta||.
inline std::vector<BetaCandidate> enumerate_hn_candidates(const QuiverInstance& inst, std::size_t cap = 200000) {
  const std::size_t n = inst.vertex_count();
  std::vector<DimVector> subs;
  {
    DimVector e(n, 0);
    std::function<void(std::size_t)> rec = [&](std::size_t v) {
      if (v == n) {
        if (std::any_of(e.begin(), e.end(), [](auto x) { return x != 0; })) subs.push_back(e);
        return;
      }
      for (std::int64_t k = 0; k <= inst.d()[v]; ++k) {
        e[v] = k;
        rec(v + 1);
      }
      e[v] = 0;
    };
    rec(0);
  }
  std::vector<BetaCandidate> out;
  std::vector<DimVector> parts;
  std::function<void(DimVector, std::optional<Rational>)> grow = [&](DimVector rest, std::optional<Rational> last) {
    if (std::all_of(rest.begin(), rest.end(), [](auto x) { return x == 0; })) {
      auto tau = make_hn_type(parts, inst);
      auto bw = beta_of_type(tau, inst);
      out.push_back({tau, bw.flat_beta(), bw.norm_sq});
      if (out.size() > cap) throw ResourceError("more than " + std::to_string(cap) + " HN candidates");
      return;
    }
    for (const auto& e : subs) {
      bool fits = true;
      for (std::size_t v = 0; v < n && fits; ++v) fits = e[v] <= rest[v];
      if (!fits) continue;
      Rational mu = make_rational(inst.theta_of(e), inst.alpha_of(e));
      if (last && !(*last < mu)) continue;
      DimVector next = rest;
      for (std::size_t v = 0; v < n; ++v) next[v] -= e[v];
      parts.push_back(e);
      grow(std::move(next), mu);
      parts.pop_back();
    }
  };
  if (inst.total_dim() == 0) return {{HNType{}, {}, 0}};
  grow(inst.d(), std::nullopt);
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.norm_sq != b.norm_sq) return a.norm_sq < b.norm_sq;
    return a.beta < b.beta;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Generator

/// Semistable representatives for the blocks of a generated instance. Abelian
/// dimension vectors are certified by the exact oracle; larger ones are
/// direct sums of certified abelian blocks of the same slope. Blocks added
/// by hand are used only when no certified block exists and are flagged.
class SemistableRegistry {
 public:
  struct Block {
    QuiverRep rep;  ///< shaped by the block's dimension vector
    bool certified = false;
  };

  explicit SemistableRegistry(const QuiverInstance& inst) : inst_(inst) {}

  void add(const DimVector& e, QuiverRep rep) { user_[e] = Block{std::move(rep), false}; }

  std::optional<Block> find(const DimVector& e) {
    if (auto b = certified(e)) return b;
    auto it = user_.find(e);
    if (it != user_.end()) return it->second;
    return std::nullopt;
  }

 private:
  std::size_t dim(const DimVector& e, std::size_t v) const { return static_cast<std::size_t>(e[v]); }

  QuiverRep zero_of(const DimVector& e) const {
    QuiverRep r;
    for (const auto& ar : inst_.quiver().arrows()) r.maps.push_back(Matrix::Zero(e[ar.head], e[ar.tail]));
    return r;
  }

  // Abelian block: the fullest arrow support that is slope-semistable on supp(e).
  std::optional<QuiverRep> abelian_block(const DimVector& e) {
    auto memo = abelian_.find(e);
    if (memo != abelian_.end()) return memo->second;
    detail::VertexMask block = 0;
    for (std::size_t v = 0; v < e.size(); ++v)
      if (e[v] == 1) block |= detail::VertexMask{1} << v;
    std::vector<std::size_t> inner;
    for (std::size_t a = 0; a < inst_.quiver().arrow_count(); ++a) {
      const auto& ar = inst_.quiver().arrow(a);
      if ((block >> ar.tail & 1U) && (block >> ar.head & 1U)) inner.push_back(a);
    }
    if (inner.size() > 20) throw ResourceError("too many arrows inside a block to search supports");
    std::vector<std::uint32_t> masks(std::size_t{1} << inner.size());
    for (std::size_t m = 0; m < masks.size(); ++m) masks[m] = static_cast<std::uint32_t>(m);
    std::stable_sort(masks.begin(), masks.end(), [](auto x, auto y) { return __builtin_popcount(x) > __builtin_popcount(y); });
    std::optional<QuiverRep> found;
    for (auto m : masks) {
      std::vector<bool> nz(inst_.quiver().arrow_count(), false);
      for (std::size_t k = 0; k < inner.size(); ++k) nz[inner[k]] = (m >> k & 1U) != 0;
      if (detail::block_semistable(inst_, block, nz)) {
        QuiverRep r = zero_of(e);
        for (std::size_t a = 0; a < nz.size(); ++a)
          if (nz[a]) r.maps[a](0, 0) = 1.0;
        found = std::move(r);
        break;
      }
    }
    abelian_[e] = found;
    return found;
  }

  std::optional<Block> certified(const DimVector& e) {
    const bool abelian = std::all_of(e.begin(), e.end(), [](auto x) { return x <= 1; });
    if (abelian) {
      if (auto r = abelian_block(e)) return Block{*r, true};
      return std::nullopt;
    }
    // Direct sum of abelian semistables of the same slope.
    const Rational mu = make_rational(inst_.theta_of(e), inst_.alpha_of(e));
    std::vector<DimVector> pieces;
    std::function<bool(DimVector)> split = [&](DimVector rest) {
      if (std::all_of(rest.begin(), rest.end(), [](auto x) { return x == 0; })) return true;
      const std::size_t n = rest.size();
      // Candidate 0/1 vectors under rest, largest masks first.
      for (detail::VertexMask m = (detail::VertexMask{1} << n) - 1; m > 0; --m) {
        DimVector f = detail::mask_dims(m, n);
        bool fits = true;
        for (std::size_t v = 0; v < n && fits; ++v) fits = f[v] <= rest[v];
        if (!fits || make_rational(inst_.theta_of(f), inst_.alpha_of(f)) != mu || !abelian_block(f)) continue;
        DimVector next = rest;
        for (std::size_t v = 0; v < n; ++v) next[v] -= f[v];
        pieces.push_back(f);
        if (split(next)) return true;
        pieces.pop_back();
      }
      return false;
    };
    if (e.size() > 20 || !split(e)) return std::nullopt;
    QuiverRep r = zero_of(e);
    DimVector off(e.size(), 0);
    for (const auto& f : pieces) {
      const QuiverRep b = *abelian_block(f);
      for (std::size_t a = 0; a < r.maps.size(); ++a) {
        const auto& ar = inst_.quiver().arrow(a);
        if (b.maps[a].size() == 1) r.maps[a](off[ar.head], off[ar.tail]) = b.maps[a](0, 0);
      }
      for (std::size_t v = 0; v < e.size(); ++v) off[v] += f[v];
    }
    return Block{std::move(r), true};
  }

  QuiverInstance inst_;
  std::map<DimVector, std::optional<QuiverRep>> abelian_;
  std::map<DimVector, Block> user_;
};

struct GeneratedInstance {
  HNType tau;
  BlockWeights beta;
  std::vector<QuiverRep> blocks;  ///< semistable block per part
  bool certified = true;          ///< false if any block came from an uncertified source
  QuiverRep y;                    ///< element of Y_tau^ss before the group action
  GroupElement g;
  QuiverRep rep;                  ///< g . y
};

namespace detail {

inline Complex gaussian(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  double re = n(rng);
  double im = n(rng);
  return {re, im};
}

inline double condition_number(const Matrix& m) {
  if (m.size() == 0) return 1.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  return s(s.size() - 1) > 0 ? s(0) / s(s.size() - 1) : std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// Random g in G(Q,d): I + 0.5 * Gaussian per vertex, resampled until the
/// condition number is at most 1e3.
inline GroupElement random_group_element(const QuiverInstance& inst, std::mt19937_64& rng) {
  GroupElement g;
  for (std::size_t v = 0; v < inst.vertex_count(); ++v) {
    const auto n = static_cast<Eigen::Index>(inst.dim(v));
    Matrix m;
    do {
      m = Matrix::Identity(n, n);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) += 0.5 * detail::gaussian(rng);
    } while (detail::condition_number(m) > 1e3);
    g.push_back(std::move(m));
  }
  return g;
}

/// Builds g . y with y in Y_tau^ss: semistable blocks on the diagonal, seeded
/// Gaussian entries in the strictly upper blocks, and a seeded random g.
inline GeneratedInstance generate_hn_instance(const HNType& tau, const QuiverInstance& inst, std::uint64_t seed,
                                              SemistableRegistry* registry = nullptr) {
  std::optional<SemistableRegistry> local;
  if (!registry) registry = &local.emplace(inst);
  GeneratedInstance out;
  out.tau = make_hn_type(tau.parts, inst);
  out.beta = beta_of_type(out.tau, inst);
  for (const auto& p : out.tau.parts) {
    auto b = registry->find(p);
    if (!b) {
      std::string name;
      for (auto x : p) name += (name.empty() ? "(" : ",") + std::to_string(x);
      throw GenerationError("no semistable block available for dimension vector " + name + ")");
    }
    out.certified = out.certified && b->certified;
    out.blocks.push_back(std::move(b->rep));
  }

  std::mt19937_64 rng(seed);
  BlockStructure bs(out.beta, inst);
  out.y = zero_rep(inst);
  // Offsets of each block inside each vertex.
  std::vector<DimVector> off(out.tau.length() + 1, DimVector(inst.vertex_count(), 0));
  for (std::size_t i = 0; i < out.tau.length(); ++i)
    for (std::size_t v = 0; v < inst.vertex_count(); ++v) off[i + 1][v] = off[i][v] + out.tau.parts[i][v];
  for (std::size_t a = 0; a < out.y.maps.size(); ++a) {
    const auto& ar = inst.quiver().arrow(a);
    auto& m = out.y.maps[a];
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        std::size_t i = bs.head_block(a, static_cast<std::size_t>(r));
        std::size_t j = bs.tail_block(a, static_cast<std::size_t>(c));
        if (i < j) {
          m(r, c) = detail::gaussian(rng);
        } else if (i == j) {
          m(r, c) = out.blocks[i].maps[a](r - off[i][ar.head], c - off[i][ar.tail]);
        }
      }
  }
  out.g = random_group_element(inst, rng);
  out.rep = act(out.g, out.y, inst);
  return out;
}

}  // namespace stratakit
