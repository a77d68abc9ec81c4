#pragma once

// Exact GIT for linear torus actions: semistability, adapted one-parameter
// subgroups and the finite index set of the stratification.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stratakit/errors.hpp"
#include "stratakit/parallel.hpp"
#include "stratakit/ratgeom.hpp"
#include "stratakit/rational.hpp"

namespace stratakit {

/// Diagonal action of T = (C^*)^n on C^N. Each coordinate carries an integer
/// weight; several coordinates may share a weight. Characters are stored in
/// dual coordinates (the natural pairing with cocharacters is the dot
/// product) and raised into the Lie algebra through the inverse Gram matrix.
class TorusActionSpec {
 public:
  TorusActionSpec() = default;

  TorusActionSpec(std::size_t n, std::vector<IntVector> coordinate_weights, IntVector rho,
                  InnerProduct ip, std::vector<std::string> labels = {})
      : n_(n),
        coordinate_weights_(std::move(coordinate_weights)),
        labels_(std::move(labels)),
        rho_(std::move(rho)),
        ip_(std::move(ip)) {
    if (n_ == 0) throw InputError("torus rank must be positive", "n");
    if (ip_.dim() != n_) throw InputError("inner product dimension differs from n", "ip");
    if (rho_.size() != n_) throw InputError("rho has wrong length", "rho");
    if (labels_.empty())
      for (std::size_t c = 0; c < coordinate_weights_.size(); ++c) labels_.push_back("x" + std::to_string(c));
    if (labels_.size() != coordinate_weights_.size())
      throw InputError("one label per coordinate required", "labels");
    for (std::size_t c = 0; c < coordinate_weights_.size(); ++c) {
      const auto& w = coordinate_weights_[c];
      if (w.size() != n_) throw InputError("weight has wrong length", "weights[" + std::to_string(c) + "]");
      auto it = std::find(weights_.begin(), weights_.end(), w);
      if (it == weights_.end()) {
        weight_of_.push_back(weights_.size());
        weights_.push_back(w);
      } else {
        weight_of_.push_back(static_cast<std::size_t>(it - weights_.begin()));
      }
      if (label_index_.count(labels_[c])) throw InputError("duplicate label '" + labels_[c] + "'", "labels");
      label_index_[labels_[c]] = c;
    }
    for (const auto& w : weights_) raised_weights_.push_back(ip_.raise(to_rational(w)));
    raised_rho_ = ip_.raise(to_rational(rho_));
  }

  std::size_t rank() const noexcept { return n_; }
  std::size_t coordinate_count() const noexcept { return coordinate_weights_.size(); }
  const std::vector<IntVector>& coordinate_weights() const noexcept { return coordinate_weights_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const IntVector& rho() const noexcept { return rho_; }
  const InnerProduct& ip() const noexcept { return ip_; }

  /// Distinct T-weights, in order of first appearance.
  const std::vector<IntVector>& weights() const noexcept { return weights_; }
  std::size_t weight_of(std::size_t coordinate) const { return weight_of_.at(coordinate); }
  const std::vector<RationalVector>& raised_weights() const noexcept { return raised_weights_; }
  const RationalVector& raised_rho() const noexcept { return raised_rho_; }

  std::size_t coordinate_of(const std::string& label) const {
    auto it = label_index_.find(label);
    if (it == label_index_.end()) throw InputError("unknown coordinate label '" + label + "'");
    return it->second;
  }

 private:
  std::size_t n_ = 0;
  std::vector<IntVector> coordinate_weights_;
  std::vector<std::string> labels_;
  IntVector rho_;
  InnerProduct ip_;
  std::vector<IntVector> weights_;
  std::vector<std::size_t> weight_of_;
  std::vector<RationalVector> raised_weights_;
  RationalVector raised_rho_;
  std::map<std::string, std::size_t> label_index_;
};

using TorusPoint = std::vector<std::complex<double>>;
using SparseTorusPoint = std::map<std::string, std::complex<double>>;

/// Sorted indices into spec.weights().
using WeightSet = std::vector<std::size_t>;

struct StratumIndex {
  RationalVector beta;             ///< in Lie-algebra coordinates
  std::optional<IntVector> lambda; ///< primitive adapted 1-PS, absent when beta = 0
  Rational d_squared;              ///< ||beta||^2 = -M^rho(v)^2
  WeightSet witness;               ///< weight subset producing beta

  bool semistable() const { return !lambda.has_value(); }
  /// -M^rho(v) = ||beta||.
  double depth() const { return std::sqrt(to_double(d_squared)); }
};

inline WeightSet support_weights(const TorusPoint& point, const TorusActionSpec& spec) {
  if (point.size() != spec.coordinate_count())
    throw InputError("point has " + std::to_string(point.size()) + " coordinates, expected " +
                     std::to_string(spec.coordinate_count()));
  std::vector<bool> hit(spec.weights().size(), false);
  for (std::size_t c = 0; c < point.size(); ++c)
    if (point[c] != std::complex<double>(0.0, 0.0)) hit[spec.weight_of(c)] = true;
  WeightSet out;
  for (std::size_t w = 0; w < hit.size(); ++w)
    if (hit[w]) out.push_back(w);
  return out;
}

inline WeightSet support_weights(const SparseTorusPoint& point, const TorusActionSpec& spec) {
  TorusPoint dense(spec.coordinate_count());
  for (const auto& [label, value] : point) dense[spec.coordinate_of(label)] = value;
  return support_weights(dense, spec);
}

inline StratumIndex classify_support(const WeightSet& support, const TorusActionSpec& spec) {
  std::vector<RationalVector> gens;
  gens.reserve(support.size());
  for (std::size_t w : support) gens.push_back(spec.raised_weights().at(w));
  auto proj = project_shifted_cone(gens, spec.raised_rho(), spec.ip());
  StratumIndex idx;
  idx.d_squared = spec.ip().norm_sq(proj.beta);
  if (!is_zero(proj.beta)) idx.lambda = primitive_integer_ray(proj.beta);
  idx.beta = std::move(proj.beta);
  idx.witness = support;
  return idx;
}

/// Hesselink index of a point: beta of its weight support. beta = 0 exactly
/// when the point is rho-semistable; otherwise lambda is the unique
/// indivisible rho-adapted 1-PS and M^rho(v) = -||beta||.
template <typename Point>
StratumIndex classify_point(const Point& point, const TorusActionSpec& spec) {
  return classify_support(support_weights(point, spec), spec);
}

/// Ordering used for index lists: increasing depth, then lexicographic beta.
inline bool index_less(const StratumIndex& a, const StratumIndex& b) {
  if (a.d_squared != b.d_squared) return a.d_squared < b.d_squared;
  return a.beta < b.beta;
}

/// All beta(B) over subsets B of the T-weights, deduplicated and sorted by
/// depth. The witness kept for each index is the first subset in bitmask
/// order producing it.
inline std::vector<StratumIndex> enumerate_indices(const TorusActionSpec& spec, std::size_t bound = 16) {
  const std::size_t m = spec.weights().size();
  if (m > bound)
    throw ResourceError(std::to_string(m) + " distinct weights exceed the subset enumeration bound of " +
                        std::to_string(bound));
  const std::size_t total = std::size_t{1} << m;
  std::vector<StratumIndex> all(total);
  parallel_for(total, [&](std::size_t mask) {
    WeightSet s;
    for (std::size_t w = 0; w < m; ++w)
      if (mask >> w & 1U) s.push_back(w);
    all[mask] = classify_support(s, spec);
  });
  std::vector<StratumIndex> out;
  for (auto& idx : all) {
    bool seen = std::any_of(out.begin(), out.end(), [&](const StratumIndex& o) { return o.beta == idx.beta; });
    if (!seen) out.push_back(std::move(idx));
  }
  std::stable_sort(out.begin(), out.end(), index_less);
  return out;
}

/// Hilbert-Mumford pairing (rho, lambda); independent of the point.
inline std::int64_t hm_pairing(const IntVector& lambda, const TorusActionSpec& spec) {
  if (lambda.size() != spec.rank()) throw InputError("lambda has wrong length");
  if (std::all_of(lambda.begin(), lambda.end(), [](auto x) { return x == 0; }))
    throw DomainError("trivial 1-PS");
  std::int64_t s = 0;
  for (std::size_t i = 0; i < lambda.size(); ++i) s += spec.rho()[i] * lambda[i];
  return s;
}

enum class Stability { kUnstable, kSemistable, kStable, kStronglyStable };

inline const char* to_string(Stability s) {
  switch (s) {
    case Stability::kUnstable: return "unstable";
    case Stability::kSemistable: return "semistable";
    case Stability::kStable: return "stable";
    case Stability::kStronglyStable: return "strongly_stable";
  }
  return "?";
}

inline Stability support_stability(const WeightSet& support, const TorusActionSpec& spec) {
  std::vector<RationalVector> gens;
  for (std::size_t w : support) gens.push_back(spec.raised_weights().at(w));
  if (positively_spans(gens, spec.ip())) return Stability::kStronglyStable;
  switch (halfspace_containment(gens, spec.raised_rho(), spec.ip())) {
    case Containment::kNotContained: return Stability::kUnstable;
    case Containment::kContained: return Stability::kSemistable;
    case Containment::kStrictlyContained: return Stability::kStable;
  }
  return Stability::kUnstable;
}

template <typename Point>
Stability stability_status(const Point& point, const TorusActionSpec& spec) {
  return support_stability(support_weights(point, spec), spec);
}

}  // namespace stratakit
