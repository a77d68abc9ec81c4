#pragma once

// Instance file schema and JSON serialization of results.

#include <nlohmann/json.hpp>

#include <charconv>
#include <map>
#include <string>
#include <variant>

#include "stratakit/errors.hpp"
#include "stratakit/momentmap.hpp"
#include "stratakit/quiver.hpp"
#include "stratakit/rational.hpp"
#include "stratakit/torus.hpp"

namespace stratakit {

using json = nlohmann::json;

struct TorusFile {
  TorusActionSpec spec;
  std::map<std::string, SparseTorusPoint> points;
};

struct QuiverFile {
  QuiverInstance inst;
  std::map<std::string, QuiverRep> reps;
};

using InstanceFile = std::variant<TorusFile, QuiverFile>;

// ---------------------------------------------------------------------------
// Scalars

/// Shortest decimal that reads back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, const std::string& path) {
  double x = 0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (!s.empty() && *b == '+') ++b;
  auto res = std::from_chars(b, e, x);
  if (res.ec != std::errc() || res.ptr != e) throw InputError("malformed number '" + s + "'", path);
  return x;
}

inline json complex_to_json(Complex z) { return json::array({format_double(z.real()), format_double(z.imag())}); }

inline json rational_to_json(const Rational& r) { return to_string(r); }

inline json rationals_to_json(const RationalVector& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(to_string(x));
  return a;
}

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Schema helpers

namespace detail {

inline const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw InputError("expected an object", path);
  auto it = obj.find(key);
  if (it == obj.end()) throw InputError("missing field '" + key + "'", path);
  return *it;
}

inline std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

inline std::string index_path(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

inline std::int64_t as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw InputError("expected an integer", path);
  return j.get<std::int64_t>();
}

inline IntVector as_ints(const json& j, const std::string& path) {
  if (!j.is_array()) throw InputError("expected an array of integers", path);
  IntVector out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_int(j[i], index_path(path, i)));
  return out;
}

inline double as_real(const json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_double(j.get<std::string>(), path);
  throw InputError("expected a number or a decimal string", path);
}

inline Complex as_complex(const json& j, const std::string& path) {
  if (j.is_number() || j.is_string()) return {as_real(j, path), 0.0};
  if (!j.is_array() || j.size() != 2) throw InputError("expected [re, im]", path);
  return {as_real(j[0], index_path(path, 0)), as_real(j[1], index_path(path, 1))};
}

inline Matrix as_matrix(const json& j, Eigen::Index rows, Eigen::Index cols, const std::string& path) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
    throw InputError("expected " + std::to_string(rows) + " rows", path);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    auto rp = index_path(path, static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw InputError("expected " + std::to_string(cols) + " columns", rp);
    for (Eigen::Index k = 0; k < cols; ++k)
      m(i, k) = as_complex(row[static_cast<std::size_t>(k)], index_path(rp, static_cast<std::size_t>(k)));
  }
  return m;
}

inline std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw InputError("expected a string", path);
  return j.get<std::string>();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Documents

inline TorusFile parse_torus(const json& j) {
  using namespace detail;
  const std::int64_t n = as_int(field(j, "n", ""), "n");
  if (n <= 0) throw InputError("torus rank must be positive", "n");
  const json& w = field(j, "weights", "");
  if (!w.is_array()) throw InputError("expected an array of weights", "weights");
  std::vector<IntVector> weights;
  for (std::size_t c = 0; c < w.size(); ++c) {
    auto p = index_path("weights", c);
    auto wc = as_ints(w[c], p);
    if (wc.size() != static_cast<std::size_t>(n)) throw InputError("weight must have n entries", p);
    weights.push_back(std::move(wc));
  }
  auto rho = as_ints(field(j, "rho", ""), "rho");
  if (rho.size() != static_cast<std::size_t>(n)) throw InputError("rho must have n entries", "rho");
  InnerProduct ip = InnerProduct::identity(static_cast<std::size_t>(n));
  if (j.contains("ip")) {
    const json& g = j["ip"];
    if (g.is_array() && !g.empty() && g[0].is_array()) {
      std::vector<IntVector> gram;
      for (std::size_t i = 0; i < g.size(); ++i) gram.push_back(as_ints(g[i], index_path("ip", i)));
      try {
        ip = InnerProduct(gram);
      } catch (const InputError& e) {
        throw InputError(e.what(), "ip");
      }
    } else {
      auto diag = as_ints(g, "ip");
      if (diag.size() != static_cast<std::size_t>(n)) throw InputError("ip must have n entries", "ip");
      try {
        ip = InnerProduct::diagonal(diag);
      } catch (const InputError& e) {
        throw InputError(e.what(), "ip");
      }
    }
  }
  if (ip.dim() != static_cast<std::size_t>(n)) throw InputError("ip dimension must be n", "ip");
  std::vector<std::string> labels;
  if (j.contains("labels")) {
    const json& l = j["labels"];
    if (!l.is_array()) throw InputError("expected an array of strings", "labels");
    for (std::size_t i = 0; i < l.size(); ++i) labels.push_back(as_string(l[i], index_path("labels", i)));
  }
  TorusFile f{TorusActionSpec(static_cast<std::size_t>(n), std::move(weights), std::move(rho), ip, std::move(labels)),
              {}};
  if (j.contains("points")) {
    const json& pts = j["points"];
    if (!pts.is_object()) throw InputError("expected an object of named points", "points");
    for (auto it = pts.begin(); it != pts.end(); ++it) {
      auto pp = join_path("points", it.key());
      if (!it.value().is_object()) throw InputError("expected an object {label: value}", pp);
      SparseTorusPoint p;
      for (auto c = it.value().begin(); c != it.value().end(); ++c) {
        auto cp = join_path(pp, c.key());
        try {
          f.spec.coordinate_of(c.key());
        } catch (const InputError&) {
          throw InputError("unknown coordinate label", cp);
        }
        p[c.key()] = as_complex(c.value(), cp);
      }
      f.points[it.key()] = std::move(p);
    }
  }
  return f;
}

inline QuiverFile parse_quiver(const json& j) {
  using namespace detail;
  const json& vs = field(j, "vertices", "");
  if (!vs.is_array() || vs.empty()) throw InputError("expected a nonempty array of vertex labels", "vertices");
  std::vector<std::string> vertices;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    auto p = index_path("vertices", i);
    if (vs[i].is_number_integer()) vertices.push_back(std::to_string(vs[i].get<std::int64_t>()));
    else vertices.push_back(as_string(vs[i], p));
  }
  Quiver probe(vertices, {});
  auto vertex_ref = [&](const json& x, const std::string& p) -> std::size_t {
    if (x.is_string()) {
      try {
        return probe.vertex_index(x.get<std::string>());
      } catch (const InputError&) {
        throw InputError("unknown vertex '" + x.get<std::string>() + "'", p);
      }
    }
    if (x.is_number_integer()) {
      auto label = std::to_string(x.get<std::int64_t>());
      try {
        return probe.vertex_index(label);
      } catch (const InputError&) {
        throw InputError("unknown vertex " + label, p);
      }
    }
    throw InputError("expected a vertex label", p);
  };
  const json& as = field(j, "arrows", "");
  if (!as.is_array()) throw InputError("expected an array of arrows", "arrows");
  std::vector<Arrow> arrows;
  std::map<std::string, bool> names;
  for (std::size_t a = 0; a < as.size(); ++a) {
    auto p = index_path("arrows", a);
    Arrow ar;
    ar.tail = vertex_ref(field(as[a], "tail", p), join_path(p, "tail"));
    ar.head = vertex_ref(field(as[a], "head", p), join_path(p, "head"));
    ar.name = as[a].contains("name") ? as_string(as[a]["name"], join_path(p, "name")) : "a" + std::to_string(a);
    if (names[ar.name]) throw InputError("duplicate arrow name '" + ar.name + "'", join_path(p, "name"));
    names[ar.name] = true;
    arrows.push_back(std::move(ar));
  }
  Quiver q(std::move(vertices), std::move(arrows));
  auto d = as_ints(field(j, "d", ""), "d");
  auto theta = as_ints(field(j, "theta", ""), "theta");
  IntVector alpha = j.contains("alpha") ? as_ints(j["alpha"], "alpha") : IntVector(q.vertex_count(), 1);
  QuiverFile f{QuiverInstance(q, d, theta, alpha), {}};
  if (j.contains("reps")) {
    const json& reps = j["reps"];
    if (!reps.is_object()) throw InputError("expected an object of named representations", "reps");
    for (auto it = reps.begin(); it != reps.end(); ++it) {
      auto rp = join_path("reps", it.key());
      if (!it.value().is_object()) throw InputError("expected an object {arrow: matrix}", rp);
      QuiverRep r = zero_rep(f.inst);
      for (auto m = it.value().begin(); m != it.value().end(); ++m) {
        auto mp = join_path(rp, m.key());
        std::size_t idx = q.arrow_count();
        for (std::size_t a = 0; a < q.arrow_count(); ++a)
          if (q.arrow(a).name == m.key()) idx = a;
        if (idx == q.arrow_count()) throw InputError("unknown arrow", mp);
        r.maps[idx] = as_matrix(m.value(), r.maps[idx].rows(), r.maps[idx].cols(), mp);
      }
      f.reps[it.key()] = std::move(r);
    }
  }
  return f;
}

inline InstanceFile parse_instance(const json& j) {
  const std::string kind = detail::as_string(detail::field(j, "kind", ""), "kind");
  if (kind == "torus") return parse_torus(j);
  if (kind == "quiver") return parse_quiver(j);
  throw InputError("kind must be 'torus' or 'quiver'", "kind");
}

// ---------------------------------------------------------------------------
// Writers

inline json to_json(const QuiverRep& rep, const QuiverInstance& inst) {
  json o = json::object();
  for (std::size_t a = 0; a < rep.maps.size(); ++a) o[inst.quiver().arrow(a).name] = matrix_to_json(rep.maps[a]);
  return o;
}

inline json to_json(const QuiverInstance& inst) {
  json o;
  o["kind"] = "quiver";
  o["vertices"] = inst.quiver().vertices();
  json arrows = json::array();
  for (const auto& ar : inst.quiver().arrows())
    arrows.push_back({{"tail", inst.quiver().vertices()[ar.tail]},
                      {"head", inst.quiver().vertices()[ar.head]},
                      {"name", ar.name}});
  o["arrows"] = std::move(arrows);
  o["d"] = inst.d();
  o["theta"] = inst.theta();
  o["alpha"] = inst.alpha();
  return o;
}

inline json to_json(const StratumIndex& idx, const TorusActionSpec& spec) {
  json o;
  o["beta"] = rationals_to_json(idx.beta);
  o["lambda"] = idx.lambda ? json(*idx.lambda) : json(nullptr);
  o["d_squared"] = to_string(idx.d_squared);
  o["d"] = format_double(idx.depth());
  json w = json::array();
  for (auto k : idx.witness) w.push_back(spec.weights()[k]);
  o["witness"] = std::move(w);
  return o;
}

inline json to_json(const HNType& t) {
  json o;
  o["tau"] = t.parts;
  json s = json::array();
  for (const auto& x : t.slopes) s.push_back(to_string(x));
  o["slopes"] = std::move(s);
  return o;
}

inline json to_json(const BlockWeights& b) {
  json o = to_json(b.tau);
  json per = json::array();
  for (const auto& v : b.vertex_beta()) per.push_back(rationals_to_json(v));
  o["beta"] = std::move(per);
  json lam = json::array();
  for (const auto& bv : b.block_of) {
    json l = json::array();
    for (auto i : bv) l.push_back(b.block_lambda[i]);
    lam.push_back(std::move(l));
  }
  o["lambda"] = b.is_zero() ? json(nullptr) : std::move(lam);
  o["scale"] = to_string(b.scale);
  o["norm_sq"] = to_string(b.norm_sq);
  o["d"] = format_double(std::sqrt(to_double(b.norm_sq)));
  return o;
}

inline json to_json(const BetaCandidate& c) {
  json o = to_json(c.tau);
  o["beta"] = rationals_to_json(c.beta);
  o["d_squared"] = to_string(c.norm_sq);
  o["d"] = format_double(std::sqrt(to_double(c.norm_sq)));
  return o;
}

template <typename Point>
json flow_summary(const FlowResult<Point>& fr) {
  json o;
  o["converged"] = fr.converged;
  o["steps"] = fr.steps;
  o["rejected"] = fr.rejected;
  o["residual"] = format_double(fr.residual);
  o["mu_norm"] = format_double(fr.mu_norm);
  o["trajectory_monotone"] = fr.trajectory_monotone;
  json c = json::array();
  for (double x : fr.limit_coords) c.push_back(format_double(x));
  o["limit_coords"] = std::move(c);
  return o;
}

inline json to_json(const Classification& c, const std::vector<RationalVector>& candidates) {
  json o;
  o["snapped"] = c.ok();
  o["beta"] = c.ok() ? rationals_to_json(candidates[*c.index]) : json(nullptr);
  o["distance"] = format_double(c.distance);
  o["gap"] = std::isfinite(c.gap) ? json(format_double(c.gap)) : json("inf");
  if (!c.ok()) o["message"] = c.message;
  return o;
}

}  // namespace stratakit
