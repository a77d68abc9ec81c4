#pragma once

// Shifted moment map, the norm-square gradient flow, classification of flow
// limits, and the Kempf-Ness function.
//
// Conventions. K = prod U(d_v) with (x, y)_v = -(1/4 pi^2) tr(xy), weighted
// by alpha_v. The Kaehler metric is g = (1/pi) Re H with H(phi, psi) =
// sum_a tr(phi_a psi_a^*). With
//   M_v = sum_{h(a)=v} phi_a phi_a^* - sum_{t(a)=v} phi_a^* phi_a - theta_v I
// the moment map is mu*_v = (2 pi i / alpha_v) M_v, its coordinates in the
// maximal torus are the eigenvalues of M_v / alpha_v, and
//   ||mu||^2 = sum_v tr(M_v^2) / alpha_v,
//   grad_a   = -2i (mu*_h phi_a - phi_a mu*_t) = 4 pi (M_h phi_a / alpha_h - phi_a M_t / alpha_t).

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stratakit/errors.hpp"
#include "stratakit/integrator.hpp"
#include "stratakit/quiver.hpp"
#include "stratakit/ratgeom.hpp"
#include "stratakit/torus.hpp"

namespace stratakit {

inline constexpr double kPi = std::numbers::pi;

/// Per-vertex Hermitian forms M_v; mu*_v = (2 pi i / alpha_v) M_v.
struct MomentValue {
  std::vector<Matrix> M;
  IntVector alpha;

  Matrix mu_star(std::size_t v) const { return Complex(0, 2 * kPi / static_cast<double>(alpha[v])) * M[v]; }

  double norm_sq() const {
    double s = 0;
    for (std::size_t v = 0; v < M.size(); ++v) s += (M[v] * M[v]).trace().real() / static_cast<double>(alpha[v]);
    return s;
  }

  /// Eigenvalues of M_v / alpha_v, decreasing per vertex, concatenated.
  std::vector<double> sorted_coords() const {
    std::vector<double> out;
    for (std::size_t v = 0; v < M.size(); ++v) {
      if (M[v].size() == 0) continue;
      Eigen::SelfAdjointEigenSolver<Matrix> es(M[v], Eigen::EigenvaluesOnly);
      const auto& ev = es.eigenvalues();
      for (Eigen::Index k = ev.size() - 1; k >= 0; --k) out.push_back(ev(k) / static_cast<double>(alpha[v]));
    }
    return out;
  }
};

inline MomentValue moment_star(const QuiverRep& rep, const QuiverInstance& inst) {
  check_rep(rep, inst);
  MomentValue m;
  m.alpha = inst.alpha();
  for (std::size_t v = 0; v < inst.vertex_count(); ++v) {
    const auto n = static_cast<Eigen::Index>(inst.dim(v));
    m.M.push_back(-static_cast<double>(inst.theta()[v]) * Matrix::Identity(n, n));
  }
  for (std::size_t a = 0; a < rep.maps.size(); ++a) {
    const auto& ar = inst.quiver().arrow(a);
    const Matrix& p = rep.maps[a];
    m.M[ar.head] += p * p.adjoint();
    m.M[ar.tail] -= p.adjoint() * p;
  }
  return m;
}

inline double mu_norm_sq(const QuiverRep& rep, const QuiverInstance& inst) { return moment_star(rep, inst).norm_sq(); }

inline QuiverRep grad_from_moment(const QuiverRep& rep, const MomentValue& m, const QuiverInstance& inst) {
  QuiverRep g;
  for (std::size_t a = 0; a < rep.maps.size(); ++a) {
    const auto& ar = inst.quiver().arrow(a);
    const double ah = static_cast<double>(inst.alpha()[ar.head]);
    const double at = static_cast<double>(inst.alpha()[ar.tail]);
    g.maps.push_back(4 * kPi * (m.M[ar.head] * rep.maps[a] / ah - rep.maps[a] * m.M[ar.tail] / at));
  }
  return g;
}

/// Gradient of ||mu||^2 for the metric (1/pi) Re H.
inline QuiverRep grad_norm_sq(const QuiverRep& rep, const QuiverInstance& inst) {
  return grad_from_moment(rep, moment_star(rep, inst), inst);
}

/// The Kaehler metric (1/pi) Re H.
inline double kaehler_metric(const QuiverRep& x, const QuiverRep& y) {
  double s = 0;
  for (std::size_t a = 0; a < x.maps.size(); ++a) s += (x.maps[a].adjoint() * y.maps[a]).trace().real();
  return s / kPi;
}

/// (x, y)_alpha for per-vertex skew-Hermitian x, y.
inline double alpha_pairing(const std::vector<Matrix>& x, const std::vector<Matrix>& y, const QuiverInstance& inst) {
  double s = 0;
  for (std::size_t v = 0; v < x.size(); ++v)
    s += static_cast<double>(inst.alpha()[v]) * (-(x[v] * y[v]).trace().real()) / (4 * kPi * kPi);
  return s;
}

/// diag(alpha_v) on the maximal torus coordinates.
inline InnerProduct alpha_inner_product(const QuiverInstance& inst) {
  IntVector ip;
  for (std::size_t v = 0; v < inst.vertex_count(); ++v)
    for (std::size_t k = 0; k < inst.dim(v); ++k) ip.push_back(inst.alpha()[v]);
  if (ip.empty()) throw DomainError("dimension vector is zero");
  return InnerProduct::diagonal(ip);
}

// ---------------------------------------------------------------------------
// Flow

template <typename Point>
struct FlowResult {
  Point limit;
  std::size_t steps = 0;
  std::size_t rejected = 0;
  double residual = 0;               ///< H-norm of the gradient at the limit
  double mu_norm = 0;                ///< ||mu*(limit)||_alpha
  bool converged = false;
  bool trajectory_monotone = true;   ///< every accepted step within the energy slack
  double max_energy_increase = 0;
  std::vector<double> limit_coords;  ///< torus coordinates of mu at the limit (Weyl sorted)
};

using QuiverFlowResult = FlowResult<QuiverRep>;
using TorusFlowResult = FlowResult<TorusPoint>;

namespace detail {

inline Eigen::VectorXcd pack(const QuiverRep& rep) {
  Eigen::Index n = 0;
  for (const auto& m : rep.maps) n += m.size();
  Eigen::VectorXcd x(n);
  Eigen::Index o = 0;
  for (const auto& m : rep.maps) {
    x.segment(o, m.size()) = m.reshaped();
    o += m.size();
  }
  return x;
}

inline QuiverRep unpack(const Eigen::VectorXcd& x, const QuiverInstance& inst, Eigen::Index offset = 0) {
  QuiverRep r;
  for (const auto& ar : inst.quiver().arrows()) {
    const auto rows = static_cast<Eigen::Index>(inst.dim(ar.head));
    const auto cols = static_cast<Eigen::Index>(inst.dim(ar.tail));
    r.maps.push_back(x.segment(offset, rows * cols).reshaped(rows, cols));
    offset += rows * cols;
  }
  return r;
}

inline double rep_norm(const QuiverRep& r) { return std::sqrt(rep_norm_sq(r)); }

template <typename Point>
void finish(FlowResult<Point>& out, const IntegrationTrace<Eigen::VectorXcd>& tr, const FlowOptions& opts) {
  out.steps = tr.steps;
  out.rejected = tr.rejected;
  out.residual = tr.residual;
  out.converged = tr.converged;
  out.max_energy_increase = tr.max_energy_increase;
  out.trajectory_monotone = tr.max_energy_increase <= opts.energy_slack;
}

}  // namespace detail

/// Negative gradient flow of ||mu||^2 from `rep`.
inline QuiverFlowResult flow(const QuiverRep& rep, const QuiverInstance& inst, const FlowOptions& opts = {}) {
  check_rep(rep, inst);
  auto field = [&](const Eigen::VectorXcd& x) {
    return Eigen::VectorXcd(-detail::pack(grad_norm_sq(detail::unpack(x, inst), inst)));
  };
  auto energy = [&](const Eigen::VectorXcd& x) { return mu_norm_sq(detail::unpack(x, inst), inst); };
  auto residual = [&](const Eigen::VectorXcd& x) { return detail::rep_norm(grad_norm_sq(detail::unpack(x, inst), inst)); };
  auto tr = integrate_gradient_flow(detail::pack(rep), field, energy, residual, [](Eigen::VectorXcd&) {}, opts);
  QuiverFlowResult out;
  detail::finish(out, tr, opts);
  out.limit = detail::unpack(tr.state, inst);
  auto m = moment_star(out.limit, inst);
  out.mu_norm = std::sqrt(m.norm_sq());
  out.limit_coords = m.sorted_coords();
  return out;
}

namespace detail {

// pi(X): block-diagonal part plus twice the strictly upper blocks, for the
// block order of `blocks` (decreasing beta). X - pi(X) is skew-Hermitian.
inline Matrix parabolic_part(const Matrix& x, const std::vector<std::size_t>& blocks) {
  Matrix p = x;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (blocks[i] < blocks[j]) p(i, j) *= 2.0;
      else if (blocks[i] > blocks[j]) p(i, j) = 0;
    }
  return p;
}

inline Matrix unitary_factor(const Matrix& m) {
  if (m.size() == 0) return m;
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the phase so that R has a positive diagonal.
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Complex d = r(i, i);
    if (std::abs(d) > 0) q.col(i) *= d / std::abs(d);
  }
  return q;
}

}  // namespace detail

/// Flow of k . y with y in Y_tau, k in K. The vector field X(phi) = -4 pi M / alpha
/// (acting infinitesimally) splits as pi(X) in Lie(P_beta) plus kappa in Lie(K);
/// y follows pi(X(y)) and stays in Y_tau with exact zero blocks, and k follows
/// kappa. The limit is k . y. With a single block per vertex this is the plain flow.
inline QuiverFlowResult flow_structured(const QuiverRep& y, const GroupElement& k, const BlockStructure& blocks,
                                        const QuiverInstance& inst, const FlowOptions& opts = {}) {
  check_rep(y, inst);
  if (!blocks.in_Y(y)) throw InputError("structured flow needs a start point in Y_tau");
  const auto& block_of = blocks.beta().block_of;
  const std::size_t nv = inst.vertex_count();
  Eigen::Index ylen = detail::pack(y).size();

  auto split = [&](const Eigen::VectorXcd& x) {
    QuiverRep r = detail::unpack(x, inst);
    GroupElement kk;
    Eigen::Index o = ylen;
    for (std::size_t v = 0; v < nv; ++v) {
      const auto n = static_cast<Eigen::Index>(inst.dim(v));
      kk.push_back(x.segment(o, n * n).reshaped(n, n));
      o += n * n;
    }
    return std::make_pair(std::move(r), std::move(kk));
  };
  auto join = [&](const QuiverRep& r, const GroupElement& kk) {
    Eigen::Index total = ylen;
    for (const auto& m : kk) total += m.size();
    Eigen::VectorXcd x(total);
    x.head(ylen) = detail::pack(r);
    Eigen::Index o = ylen;
    for (const auto& m : kk) {
      x.segment(o, m.size()) = m.reshaped();
      o += m.size();
    }
    return x;
  };
  auto field = [&](const Eigen::VectorXcd& x) {
    auto [r, kk] = split(x);
    auto m = moment_star(r, inst);
    QuiverRep dy;
    GroupElement dk;
    std::vector<Matrix> par;
    for (std::size_t v = 0; v < nv; ++v) {
      Matrix X = (-4 * kPi / static_cast<double>(inst.alpha()[v])) * m.M[v];
      Matrix P = detail::parabolic_part(X, block_of[v]);
      dk.push_back(kk[v] * (X - P));
      par.push_back(std::move(P));
    }
    for (std::size_t a = 0; a < r.maps.size(); ++a) {
      const auto& ar = inst.quiver().arrow(a);
      dy.maps.push_back(par[ar.head] * r.maps[a] - r.maps[a] * par[ar.tail]);
    }
    return join(dy, dk);
  };
  auto energy = [&](const Eigen::VectorXcd& x) { return mu_norm_sq(detail::unpack(x, inst), inst); };
  auto residual = [&](const Eigen::VectorXcd& x) { return detail::rep_norm(grad_norm_sq(detail::unpack(x, inst), inst)); };
  auto project = [&](Eigen::VectorXcd& x) {
    auto [r, kk] = split(x);
    for (auto& m : kk) m = detail::unitary_factor(m);
    x = join(blocks.project_Y(r), kk);
  };

  auto tr = integrate_gradient_flow(join(y, k), field, energy, residual, project, opts);
  auto [ylim, klim] = split(tr.state);
  QuiverFlowResult out;
  detail::finish(out, tr, opts);
  auto m = moment_star(ylim, inst);
  out.mu_norm = std::sqrt(m.norm_sq());
  out.limit_coords = m.sorted_coords();
  // k acts unitarily: k . y = k_h y k_t^*.
  for (std::size_t a = 0; a < ylim.maps.size(); ++a) {
    const auto& ar = inst.quiver().arrow(a);
    out.limit.maps.push_back(klim[ar.head] * ylim.maps[a] * klim[ar.tail].adjoint());
  }
  return out;
}

/// Flows a generated instance g . y: writes g = QR per vertex, starts the
/// structured flow at (R . y, Q).
inline QuiverFlowResult flow_generated(const GeneratedInstance& gen, const QuiverInstance& inst,
                                       const FlowOptions& opts = {}) {
  BlockStructure bs(gen.beta, inst);
  GroupElement q, r;
  for (const auto& gv : gen.g) {
    if (gv.size() == 0) {
      q.push_back(gv);
      r.push_back(gv);
      continue;
    }
    Matrix qv = detail::unitary_factor(gv);
    q.push_back(qv);
    Matrix rv = qv.adjoint() * gv;
    rv.triangularView<Eigen::StrictlyLower>().setZero();
    r.push_back(std::move(rv));
  }
  QuiverRep y0 = bs.project_Y(act(r, gen.y, inst));
  return flow_structured(y0, q, bs, inst, opts);
}

// ---------------------------------------------------------------------------
// Classification of limits

struct Classification {
  std::optional<std::size_t> index;  ///< candidate snapped to
  double distance = 0;               ///< to the nearest candidate
  double gap = 0;                    ///< minimal distance between distinct candidates
  std::vector<double> coords;
  std::string message;

  bool ok() const { return index.has_value(); }
};

/// Snaps limit coordinates to the unique candidate closer than gap / 2,
/// distances measured in `ip`. Reports failure otherwise.
inline Classification classify_limit(const std::vector<double>& coords, const std::vector<RationalVector>& candidates,
                                     const InnerProduct& ip) {
  Classification c;
  c.coords = coords;
  if (candidates.empty()) {
    c.message = "no candidates";
    return c;
  }
  std::vector<std::vector<double>> cand;
  for (const auto& b : candidates) {
    ip.check(b);
    cand.push_back(to_double(b));
  }
  if (coords.size() != ip.dim()) throw InputError("limit coordinates have wrong length");
  auto dist = [&](const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
    return std::sqrt(std::max(0.0, ip.dot(d, d)));
  };
  c.gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cand.size(); ++i)
    for (std::size_t j = i + 1; j < cand.size(); ++j)
      if (candidates[i] != candidates[j]) c.gap = std::min(c.gap, dist(cand[i], cand[j]));
  std::size_t best = 0;
  c.distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cand.size(); ++i) {
    double d = dist(coords, cand[i]);
    if (d < c.distance) c.distance = d, best = i;
  }
  if (c.distance < c.gap / 2) {
    c.index = best;
  } else {
    c.message = "limit is " + std::to_string(c.distance) + " from the nearest candidate, gap is " +
                std::to_string(c.gap);
  }
  return c;
}

template <typename Point>
Classification classify_limit(const FlowResult<Point>& fr, const std::vector<RationalVector>& candidates,
                              const InnerProduct& ip) {
  return classify_limit(fr.limit_coords, candidates, ip);
}

// ---------------------------------------------------------------------------
// Kempf-Ness function

/// exp of a per-vertex Hermitian matrix.
inline GroupElement exp_hermitian(const std::vector<Matrix>& a) {
  GroupElement g;
  for (const auto& m : a) {
    if (m.size() == 0) {
      g.push_back(m);
      continue;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    const auto& ev = es.eigenvalues();
    if (ev.maxCoeff() > 700) throw NumericError("matrix exponential overflow");
    Eigen::VectorXcd e = ev.array().exp().cast<Complex>();
    g.push_back(es.eigenvectors() * e.asDiagonal() * es.eigenvectors().adjoint());
  }
  return g;
}

/// p(g) = (1/4 pi) ||g . phi||^2 - (1/2 pi) sum_v theta_v log|det g_v|;
/// invariant under g -> k g for unitary k.
inline double kempf_ness_value_at(const QuiverRep& rep, const QuiverInstance& inst, const GroupElement& g) {
  double logdet = 0;
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (g[v].size() == 0) continue;
    Eigen::PartialPivLU<Matrix> lu(g[v]);
    Matrix u = lu.matrixLU();
    double ld = 0;
    for (Eigen::Index i = 0; i < u.rows(); ++i) ld += std::log(std::abs(u(i, i)));
    logdet += static_cast<double>(inst.theta()[v]) * ld;
  }
  return rep_norm_sq(act(g, rep, inst)) / (4 * kPi) - logdet / (2 * kPi);
}

/// p_phi(A) with A = i a Hermitian per vertex:
/// (1/4 pi) ||exp(A) phi||^2 - (1/2 pi) sum_v theta_v tr A_v.
inline double kempf_ness_value(const QuiverRep& rep, const QuiverInstance& inst, const std::vector<Matrix>& a) {
  double tr = 0;
  for (std::size_t v = 0; v < a.size(); ++v)
    if (a[v].size()) tr += static_cast<double>(inst.theta()[v]) * a[v].trace().real();
  return rep_norm_sq(act(exp_hermitian(a), rep, inst)) / (4 * kPi) - tr / (2 * kPi);
}

/// -mu*(exp(A) phi), per vertex skew-Hermitian. Its alpha-pairing with xi in
/// Lie(K) is the derivative of p along s -> exp(s i xi) exp(A).
inline std::vector<Matrix> kn_gradient(const QuiverRep& rep, const QuiverInstance& inst, const std::vector<Matrix>& a) {
  auto m = moment_star(act(exp_hermitian(a), rep, inst), inst);
  std::vector<Matrix> out;
  for (std::size_t v = 0; v < m.M.size(); ++v) out.push_back(-m.mu_star(v));
  return out;
}

enum class KNStatus { kConverged, kDiverging, kIterationCap };

inline const char* to_string(KNStatus s) {
  switch (s) {
    case KNStatus::kConverged: return "converged";
    case KNStatus::kDiverging: return "diverging";
    case KNStatus::kIterationCap: return "iteration_cap";
  }
  return "?";
}

struct KNOptions {
  double tol = 1e-8;
  std::size_t max_iter = 20000;
  double radius = 30;             ///< |A| beyond which a persistent gradient counts as divergence
  double divergence_floor = 1e-3; ///< gradient norm that counts as bounded away from 0
};

struct KNResult {
  std::vector<Matrix> a;  ///< Hermitian minimizer (or last iterate)
  QuiverRep point;        ///< exp(A) . phi
  double value = 0;
  double grad_norm = 0;   ///< ||mu*(exp(A) phi)||_alpha
  double a_norm = 0;
  std::size_t iterations = 0;
  KNStatus status = KNStatus::kIterationCap;
};

/// Steepest descent for p along the curves s -> exp(sB) g with
/// B_v = -M_v(g phi) / alpha_v. Steps are accepted while the directional
/// derivative at the far end is still nonpositive, which by convexity means
/// p decreased along the whole step.
inline KNResult kn_minimize(const QuiverRep& rep, const QuiverInstance& inst, const KNOptions& opts = {}) {
  check_rep(rep, inst);
  const std::size_t nv = inst.vertex_count();
  GroupElement g = identity_element(inst);
  QuiverRep u = rep;
  double t = 1e-2;
  KNResult res;

  auto log_abs = [&](const GroupElement& gg) {
    // A = (1/2) log(g^* g), the positive part of the polar decomposition g = k exp(A).
    std::vector<Matrix> a;
    double norm2 = 0;
    for (const auto& gv : gg) {
      if (gv.size() == 0) {
        a.push_back(gv);
        continue;
      }
      Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(gv.adjoint() * gv));
      Eigen::VectorXd l = 0.5 * es.eigenvalues().array().log();
      norm2 += l.squaredNorm();
      a.push_back(es.eigenvectors() * l.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint());
    }
    return std::make_pair(a, std::sqrt(norm2));
  };

  for (res.iterations = 0;; ++res.iterations) {
    auto m = moment_star(u, inst);
    res.grad_norm = std::sqrt(m.norm_sq());
    auto [a, anorm] = log_abs(g);
    res.a_norm = anorm;
    if (res.grad_norm < opts.tol) {
      res.status = KNStatus::kConverged;
      break;
    }
    if (anorm > opts.radius && res.grad_norm > opts.divergence_floor) {
      res.status = KNStatus::kDiverging;
      break;
    }
    if (res.iterations >= opts.max_iter) {
      res.status = KNStatus::kIterationCap;
      break;
    }
    std::vector<Matrix> b;
    for (std::size_t v = 0; v < nv; ++v) b.push_back(-m.M[v] / static_cast<double>(inst.alpha()[v]));
    auto deriv_at = [&](const QuiverRep& w) {
      auto mw = moment_star(w, inst);
      double s = 0;
      for (std::size_t v = 0; v < nv; ++v) s += (b[v] * mw.M[v]).trace().real();
      return s / (2 * kPi);
    };
    GroupElement step;
    QuiverRep u_new;
    for (int tries = 0;; ++tries) {
      std::vector<Matrix> tb;
      for (const auto& bv : b) tb.push_back(t * bv);
      step = exp_hermitian(tb);
      u_new = act(step, u, inst);
      if (deriv_at(u_new) <= 0) break;
      t /= 2;
      if (tries > 200) throw NumericError("Kempf-Ness line search failed");
    }
    for (std::size_t v = 0; v < nv; ++v) g[v] = step[v] * g[v];
    u = std::move(u_new);
    t *= 2;
  }
  res.a = log_abs(g).first;
  res.point = act(exp_hermitian(res.a), rep, inst);
  res.value = kempf_ness_value(rep, inst, res.a);
  return res;
}

// ---------------------------------------------------------------------------
// Weight formula

/// mu(phi) . xi for xi = 2 pi i diag(lambda), computed from mu* directly and
/// from the lambda-weight decomposition sum_r r |phi_r|^2 - (rho, lambda).
inline std::pair<double, double> weight_formula_check(const QuiverRep& rep, const QuiverInstance& inst,
                                                      const IntVector& lambda) {
  check_rep(rep, inst);
  if (lambda.size() != inst.total_dim()) throw InputError("1-PS has wrong length");
  auto m = moment_star(rep, inst);
  double direct = 0;
  for (std::size_t v = 0; v < inst.vertex_count(); ++v)
    for (std::size_t k = 0; k < inst.dim(v); ++k)
      direct += static_cast<double>(lambda[inst.offset(v) + k]) * m.M[v](k, k).real();
  double weights = 0;
  for (std::size_t a = 0; a < rep.maps.size(); ++a) {
    const auto& ar = inst.quiver().arrow(a);
    const auto& p = rep.maps[a];
    for (Eigen::Index i = 0; i < p.rows(); ++i)
      for (Eigen::Index j = 0; j < p.cols(); ++j) {
        auto r = lambda[inst.offset(ar.head) + i] - lambda[inst.offset(ar.tail) + j];
        weights += static_cast<double>(r) * std::norm(p(i, j));
      }
  }
  std::int64_t rho_lambda = 0;
  for (std::size_t v = 0; v < inst.vertex_count(); ++v)
    for (std::size_t k = 0; k < inst.dim(v); ++k) rho_lambda += inst.theta()[v] * lambda[inst.offset(v) + k];
  return {direct, weights - static_cast<double>(rho_lambda)};
}

// ---------------------------------------------------------------------------
// General torus actions

/// Torus coordinates x = G^{-1}(sum_c |v_c|^2 chi_c - rho) of the shifted moment map.
inline std::vector<double> torus_moment(const TorusPoint& v, const TorusActionSpec& spec) {
  if (v.size() != spec.coordinate_count()) throw InputError("point has wrong number of coordinates");
  const std::size_t n = spec.rank();
  std::vector<double> dual(n);
  for (std::size_t i = 0; i < n; ++i) dual[i] = -static_cast<double>(spec.rho()[i]);
  for (std::size_t c = 0; c < v.size(); ++c) {
    const double w = std::norm(v[c]);
    if (w == 0) continue;
    for (std::size_t i = 0; i < n; ++i) dual[i] += w * static_cast<double>(spec.coordinate_weights()[c][i]);
  }
  Eigen::MatrixXd g(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g(i, j) = static_cast<double>(spec.ip().gram()[i][j]);
  Eigen::VectorXd x = g.ldlt().solve(Eigen::Map<Eigen::VectorXd>(dual.data(), n));
  return {x.data(), x.data() + n};
}

inline double torus_mu_norm_sq(const TorusPoint& v, const TorusActionSpec& spec) {
  auto x = torus_moment(v, spec);
  return spec.ip().dot(x, x);
}

/// grad_c = 4 pi (chi_c . x) v_c.
inline TorusPoint torus_grad(const TorusPoint& v, const TorusActionSpec& spec) {
  auto x = torus_moment(v, spec);
  TorusPoint g(v.size());
  for (std::size_t c = 0; c < v.size(); ++c) {
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) s += static_cast<double>(spec.coordinate_weights()[c][i]) * x[i];
    g[c] = 4 * kPi * s * v[c];
  }
  return g;
}

inline TorusFlowResult flow(const TorusPoint& v, const TorusActionSpec& spec, const FlowOptions& opts = {}) {
  auto to_vec = [](const TorusPoint& p) {
    Eigen::VectorXcd x(static_cast<Eigen::Index>(p.size()));
    for (std::size_t i = 0; i < p.size(); ++i) x(static_cast<Eigen::Index>(i)) = p[i];
    return x;
  };
  auto to_point = [](const Eigen::VectorXcd& x) { return TorusPoint(x.data(), x.data() + x.size()); };
  auto field = [&](const Eigen::VectorXcd& x) { return Eigen::VectorXcd(-to_vec(torus_grad(to_point(x), spec))); };
  auto energy = [&](const Eigen::VectorXcd& x) { return torus_mu_norm_sq(to_point(x), spec); };
  auto residual = [&](const Eigen::VectorXcd& x) { return to_vec(torus_grad(to_point(x), spec)).norm(); };
  auto tr = integrate_gradient_flow(to_vec(v), field, energy, residual, [](Eigen::VectorXcd&) {}, opts);
  TorusFlowResult out;
  detail::finish(out, tr, opts);
  out.limit = to_point(tr.state);
  out.limit_coords = torus_moment(out.limit, spec);
  out.mu_norm = std::sqrt(std::max(0.0, spec.ip().dot(out.limit_coords, out.limit_coords)));
  return out;
}

struct TorusKNResult {
  std::vector<double> a;
  TorusPoint point;
  double value = 0;
  double grad_norm = 0;
  std::size_t iterations = 0;
  KNStatus status = KNStatus::kIterationCap;
};

/// p(A) = (1/4 pi) sum_c e^{2 chi_c . A} |v_c|^2 - (1/2 pi) rho . A.
inline double kempf_ness_value(const TorusPoint& v, const TorusActionSpec& spec, const std::vector<double>& a) {
  double s = 0;
  for (std::size_t c = 0; c < v.size(); ++c) {
    double e = 0;
    for (std::size_t i = 0; i < a.size(); ++i) e += static_cast<double>(spec.coordinate_weights()[c][i]) * a[i];
    s += std::exp(2 * e) * std::norm(v[c]);
  }
  double r = 0;
  for (std::size_t i = 0; i < a.size(); ++i) r += static_cast<double>(spec.rho()[i]) * a[i];
  return s / (4 * kPi) - r / (2 * kPi);
}

inline TorusKNResult kn_minimize(const TorusPoint& v, const TorusActionSpec& spec, const KNOptions& opts = {}) {
  const std::size_t n = spec.rank();
  TorusKNResult res;
  res.a.assign(n, 0.0);
  auto point_at = [&](const std::vector<double>& a) {
    TorusPoint u = v;
    for (std::size_t c = 0; c < v.size(); ++c) {
      double e = 0;
      for (std::size_t i = 0; i < n; ++i) e += static_cast<double>(spec.coordinate_weights()[c][i]) * a[i];
      if (e > 700) throw NumericError("exponential overflow in Kempf-Ness descent");
      u[c] *= std::exp(e);
    }
    return u;
  };
  double t = 1e-2;
  for (res.iterations = 0;; ++res.iterations) {
    auto x = torus_moment(point_at(res.a), spec);
    res.grad_norm = std::sqrt(std::max(0.0, spec.ip().dot(x, x)));
    const double anorm = std::sqrt(std::max(0.0, spec.ip().dot(res.a, res.a)));
    if (res.grad_norm < opts.tol) {
      res.status = KNStatus::kConverged;
      break;
    }
    if (anorm > opts.radius && res.grad_norm > opts.divergence_floor) {
      res.status = KNStatus::kDiverging;
      break;
    }
    if (res.iterations >= opts.max_iter) {
      res.status = KNStatus::kIterationCap;
      break;
    }
    std::vector<double> next(n);
    for (int tries = 0;; ++tries) {
      for (std::size_t i = 0; i < n; ++i) next[i] = res.a[i] - t * x[i];
      auto xn = torus_moment(point_at(next), spec);
      if (spec.ip().dot(xn, x) >= 0) break;  // derivative along -x still nonpositive
      t /= 2;
      if (tries > 200) throw NumericError("Kempf-Ness line search failed");
    }
    res.a = next;
    t *= 2;
  }
  res.point = point_at(res.a);
  res.value = kempf_ness_value(v, spec, res.a);
  return res;
}

}  // namespace stratakit
