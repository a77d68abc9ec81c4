#pragma once

// Cross-checks of the Hesselink (exact torus), Harder-Narasimhan (abelian
// oracle or generator certificate) and Morse (flow) classifications.

#include <boost/version.hpp>
#include <nlohmann/json.hpp>

#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "stratakit/errors.hpp"
#include "stratakit/io.hpp"
#include "stratakit/momentmap.hpp"
#include "stratakit/parallel.hpp"
#include "stratakit/quiver.hpp"
#include "stratakit/torus.hpp"

#ifndef STRATAKIT_VERSION
#define STRATAKIT_VERSION "0.0.0"
#endif

namespace stratakit {

struct VerifyOptions {
  FlowOptions flow;
  std::size_t samples_per_pattern = 20;
  std::uint64_t seed = 1;
  /// |mu_norm - ||beta||| <= tol (1 + ||beta||) at converged limits. A small
  /// gradient residual does not bound this at semistable, non-polystable points
  /// where the approach to the limit is only algebraic.
  double norm_rel_tol = 1e-4;
  std::size_t pattern_cap = 16;   ///< max support bits enumerated exhaustively
  bool corrupt_beta = false;      ///< fault injection: perturb the HN-side beta table
};

enum class RecordStatus { kPass, kFail, kWarn };

inline const char* to_string(RecordStatus s) {
  switch (s) {
    case RecordStatus::kPass: return "pass";
    case RecordStatus::kFail: return "fail";
    case RecordStatus::kWarn: return "warn";
  }
  return "?";
}

struct Record {
  std::string instance;
  std::string kind;  ///< abelian | generated | structure | torus
  std::string id;
  RecordStatus status = RecordStatus::kWarn;
  std::map<std::string, bool> agreements;
  std::vector<std::string> warnings;
  json data = json::object();

  /// Fails on any false agreement; warns when there are warnings or no
  /// agreement was checked (single source).
  void finalize() {
    bool all = true;
    for (const auto& [k, v] : agreements) all = all && v;
    if (!all) status = RecordStatus::kFail;
    else if (agreements.empty()) {
      warnings.push_back("single-source");
      status = RecordStatus::kWarn;
    } else status = warnings.empty() ? RecordStatus::kPass : RecordStatus::kWarn;
  }

  json to_json() const {
    json o;
    o["instance"] = instance;
    o["kind"] = kind;
    o["id"] = id;
    o["status"] = to_string(status);
    o["agreements"] = agreements;
    o["warnings"] = warnings;
    o["data"] = data;
    return o;
  }
};

struct VerificationReport {
  std::string instance;
  std::vector<Record> records;
  std::size_t pass = 0, fail = 0, warn = 0;
  json seeds = json::object();

  void add(Record r) {
    switch (r.status) {
      case RecordStatus::kPass: ++pass; break;
      case RecordStatus::kFail: ++fail; break;
      case RecordStatus::kWarn: ++warn; break;
    }
    records.push_back(std::move(r));
  }
  void merge(VerificationReport other) {
    for (auto& r : other.records) add(std::move(r));
  }
  bool ok() const { return fail == 0; }

  json to_json() const {
    json o;
    o["instance"] = instance;
    json recs = json::array();
    for (const auto& r : records) recs.push_back(r.to_json());
    o["records"] = std::move(recs);
    o["summary"] = {{"pass", pass}, {"fail", fail}, {"warn", warn}};
    o["versions"] = {{"stratakit", STRATAKIT_VERSION},
                     {"boost", BOOST_LIB_VERSION},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
    o["seeds"] = seeds;
    return o;
  }
};

namespace detail {

inline std::mt19937_64 task_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  return std::mt19937_64(seq);
}

inline std::string bits(std::uint64_t mask, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += (mask >> i & 1U) ? '1' : '0';
  return s;
}

inline void corrupt(RationalVector& beta) {
  if (!beta.empty()) beta[0] += 1;
}

inline std::vector<RationalVector> candidate_betas(const std::vector<BetaCandidate>& c) {
  std::vector<RationalVector> out;
  for (const auto& x : c) out.push_back(x.beta);
  return out;
}

inline void record_flow(Record& r, const QuiverFlowResult& fr, const Classification& cl,
                        const std::vector<RationalVector>& cands) {
  r.data["flow"] = flow_summary(fr);
  r.data["flow_snap"] = to_json(cl, cands);
  if (!fr.converged) r.warnings.push_back("flow did not converge");
  r.agreements["flow_monotone"] = fr.trajectory_monotone;
}

// Runs tasks in parallel and collects their records in task order.
inline VerificationReport run_tasks(const std::string& name, std::vector<std::function<Record()>>& tasks) {
  std::vector<Record> out(tasks.size());
  parallel_for(tasks.size(), [&](std::size_t i) { out[i] = tasks[i](); });
  VerificationReport rep;
  rep.instance = name;
  for (auto& r : out) rep.add(std::move(r));
  return rep;
}

}  // namespace detail

/// Every support pattern of the nonzero-capable arrows, once with unit entries
/// and `samples_per_pattern` times with Gaussian entries: HN oracle beta
/// versus torus Hesselink beta (exact), and flow snap versus both.
inline VerificationReport verify_abelian_instance(const QuiverInstance& inst, const VerifyOptions& opts,
                                                  const std::string& name = "instance") {
  if (!inst.is_abelian()) throw UnsupportedError("abelian verification needs d_v <= 1");
  VerificationReport empty;
  empty.instance = name;
  if (inst.total_dim() == 0) return empty;
  const auto spec = torus_spec_of(inst);
  const auto cands = detail::candidate_betas(enumerate_hn_candidates(inst));
  const auto ip = alpha_inner_product(inst);
  std::vector<std::size_t> active;
  for (std::size_t a = 0; a < inst.quiver().arrow_count(); ++a) {
    const auto& ar = inst.quiver().arrow(a);
    if (inst.dim(ar.tail) == 1 && inst.dim(ar.head) == 1) active.push_back(a);
  }
  if (active.size() > opts.pattern_cap)
    throw ResourceError(std::to_string(active.size()) + " arrows exceed the pattern cap of " +
                        std::to_string(opts.pattern_cap));
  const std::uint64_t patterns = std::uint64_t{1} << active.size();
  std::vector<std::function<Record()>> tasks;
  for (std::uint64_t p = 0; p < patterns; ++p)
    for (std::size_t s = 0; s <= opts.samples_per_pattern; ++s)
      tasks.push_back([&, p, s] {
        Record r;
        r.instance = name;
        r.kind = "abelian";
        r.id = "pattern " + detail::bits(p, active.size()) + (s == 0 ? " unit" : " sample " + std::to_string(s));
        QuiverRep rep = zero_rep(inst);
        auto rng = detail::task_rng(opts.seed, p, s);
        for (std::size_t k = 0; k < active.size(); ++k)
          if (p >> k & 1U) rep.maps[active[k]](0, 0) = s == 0 ? Complex(1, 0) : detail::gaussian(rng);
        r.data["rep"] = to_json(rep, inst);

        auto tau = hn_filtration_abelian(rep, inst);
        auto beta_hn = beta_of_type(tau, inst).flat_beta();
        if (opts.corrupt_beta) detail::corrupt(beta_hn);
        auto idx = classify_point(flatten(rep, inst), spec);
        r.data["hn"] = to_json(tau);
        r.data["hn_beta"] = rationals_to_json(beta_hn);
        r.data["torus_beta"] = rationals_to_json(idx.beta);
        r.agreements["hn_eq_torus"] = beta_hn == idx.beta;

        auto fr = flow(rep, inst, opts.flow);
        auto cl = classify_limit(fr, cands, ip);
        detail::record_flow(r, fr, cl, cands);
        if (fr.converged) {
          r.agreements["flow_eq_hn"] = cl.ok() && cands[*cl.index] == beta_hn;
          r.agreements["mu_norm_eq_depth"] = std::abs(fr.mu_norm - idx.depth()) <= opts.norm_rel_tol * (1 + idx.depth());
        }
        r.finalize();
        return r;
      });
  return detail::run_tasks(name, tasks);
}

/// Flows generated instances of type tau and compares against the
/// certificate; abelian instances are also run through the exact oracles.
inline VerificationReport verify_generated_instances(const QuiverInstance& inst, const std::vector<HNType>& types,
                                                     std::size_t per_type, const VerifyOptions& opts,
                                                     const std::string& name = "instance") {
  SemistableRegistry registry(inst);
  const auto cands = detail::candidate_betas(enumerate_hn_candidates(inst));
  const auto ip = alpha_inner_product(inst);
  std::vector<GeneratedInstance> gens;
  std::vector<std::function<Record()>> tasks;
  std::vector<Record> skipped;
  std::vector<std::pair<std::size_t, std::uint64_t>> meta;
  for (std::size_t t = 0; t < types.size(); ++t)
    for (std::size_t k = 0; k < per_type; ++k) {
      const std::uint64_t seed = opts.seed * 1000003ULL + t * 1009ULL + k;
      try {
        gens.push_back(generate_hn_instance(types[t], inst, seed, &registry));
        meta.emplace_back(t, seed);
      } catch (const GenerationError& e) {
        Record r;
        r.instance = name;
        r.kind = "generated";
        r.id = "type " + std::to_string(t) + " seed " + std::to_string(seed);
        r.data["tau"] = to_json(types[t]);
        r.warnings.push_back(std::string("skipped: ") + e.what());
        r.status = RecordStatus::kWarn;
        skipped.push_back(std::move(r));
        break;
      }
    }
  const auto spec = inst.is_abelian() && inst.total_dim() > 0 ? std::optional(torus_spec_of(inst)) : std::nullopt;
  for (std::size_t g = 0; g < gens.size(); ++g)
    tasks.push_back([&, g] {
      const auto& gen = gens[g];
      Record r;
      r.instance = name;
      r.kind = "generated";
      r.id = "type " + std::to_string(meta[g].first) + " seed " + std::to_string(meta[g].second);
      r.data["tau"] = to_json(gen.tau);
      auto certified = gen.beta.flat_beta();
      if (opts.corrupt_beta) detail::corrupt(certified);
      r.data["certified_beta"] = rationals_to_json(certified);
      if (!gen.certified) r.warnings.push_back("uncertified block");
      auto fr = flow_generated(gen, inst, opts.flow);
      auto cl = classify_limit(fr, cands, ip);
      detail::record_flow(r, fr, cl, cands);
      const double bn = std::sqrt(to_double(gen.beta.norm_sq));
      r.data["beta_norm"] = format_double(bn);
      if (fr.converged) {
        r.agreements["flow_eq_certified"] = cl.ok() && cands[*cl.index] == certified;
        r.agreements["mu_norm_eq_beta_norm"] = std::abs(fr.mu_norm - bn) <= opts.norm_rel_tol * (1 + bn);
      }
      if (spec) {
        auto tau = hn_filtration_abelian(gen.rep, inst);
        r.data["hn"] = to_json(tau);
        r.agreements["hn_eq_certified"] = beta_of_type(tau, inst).flat_beta() == certified;
        r.agreements["torus_eq_certified"] = classify_point(flatten(gen.rep, inst), *spec).beta == certified;
      }
      r.finalize();
      return r;
    });
  auto rep = detail::run_tasks(name, tasks);
  for (auto& r : skipped) rep.add(std::move(r));
  return rep;
}

inline VerificationReport verify_generated_instance(const QuiverInstance& inst, const HNType& tau, std::uint64_t seed,
                                                    const VerifyOptions& opts, const std::string& name = "instance") {
  VerifyOptions o = opts;
  o.seed = seed;
  return verify_generated_instances(inst, {tau}, 1, o, name);
}

/// Exact lambda_beta-weight signs against the Z_tau / Y_tau block patterns,
/// (rho_lambda, lambda) = 0, and for abelian instances blockwise slope
/// semistability against rho_lambda-semistability on Z_tau.
inline Record verify_structure(const QuiverInstance& inst, const HNType& tau, const VerifyOptions& opts,
                               const std::string& name = "instance") {
  Record r;
  r.instance = name;
  r.kind = "structure";
  std::string id;
  for (const auto& p : tau.parts) {
    id += id.empty() ? "(" : ",";
    for (std::size_t v = 0; v < p.size(); ++v) id += (v ? " " : "") + std::to_string(p[v]);
  }
  r.id = "tau " + id + ")";
  auto bw = beta_of_type(tau, inst);
  BlockStructure bs(bw, inst);
  r.data["beta"] = to_json(bw);
  std::size_t mismatches = 0, entries = 0;
  for (std::size_t a = 0; a < inst.quiver().arrow_count(); ++a) {
    const auto& ar = inst.quiver().arrow(a);
    for (std::size_t i = 0; i < inst.dim(ar.head); ++i)
      for (std::size_t j = 0; j < inst.dim(ar.tail); ++j) {
        ++entries;
        auto w = bs.entry_weight(a, i, j);
        auto hb = bs.head_block(a, i), tb = bs.tail_block(a, j);
        bool in_z = hb == tb, in_y_strict = hb < tb;
        if (bw.is_zero()) {
          if (w != 0) ++mismatches;
        } else if ((w == 0) != in_z || (w > 0) != in_y_strict) {
          ++mismatches;
        }
      }
  }
  r.data["entries"] = entries;
  r.data["weight_mismatches"] = mismatches;
  r.agreements["weights_match_blocks"] = mismatches == 0;
  if (bw.is_zero()) {
    r.warnings.push_back("beta = 0: Z_tau = Y_tau = Rep(Q,d)");
    r.finalize();
    return r;
  }
  auto lambda = bw.flat_lambda();
  auto rl = rho_lambda(lambda, inst);
  r.data["rho_lambda"] = rationals_to_json(rl);
  r.agreements["rho_lambda_orthogonal"] = character_pairing(rl, lambda) == 0;

  if (inst.is_abelian()) {
    // Coordinates of Z_tau and the torus acting on them with character rho_lambda.
    std::vector<std::size_t> z_arrows;
    std::vector<IntVector> weights;
    const std::size_t n = inst.total_dim();
    for (std::size_t a = 0; a < inst.quiver().arrow_count(); ++a) {
      const auto& ar = inst.quiver().arrow(a);
      if (inst.dim(ar.head) == 1 && inst.dim(ar.tail) == 1 && bs.head_block(a, 0) == bs.tail_block(a, 0)) {
        z_arrows.push_back(a);
        IntVector w(n, 0);
        w[inst.offset(ar.head)] += 1;
        w[inst.offset(ar.tail)] -= 1;
        weights.push_back(std::move(w));
      }
    }
    IntVector rho(n), ipd(n);
    for (std::size_t k = 0; k < n; ++k) rho[k] = to_int64(boost::multiprecision::numerator(rl[k]));
    for (std::size_t v = 0; v < inst.vertex_count(); ++v)
      if (inst.dim(v) == 1) ipd[inst.offset(v)] = inst.alpha()[v];
    TorusActionSpec zspec(n, weights, rho, InnerProduct::diagonal(ipd));
    if (z_arrows.size() > opts.pattern_cap) throw ResourceError("too many Z_tau coordinates to enumerate");
    std::size_t disagreements = 0, semistable_count = 0;
    const std::uint64_t patterns = std::uint64_t{1} << z_arrows.size();
    for (std::uint64_t p = 0; p < patterns; ++p) {
      std::vector<bool> nz(inst.quiver().arrow_count(), false);
      TorusPoint pt(z_arrows.size());
      for (std::size_t k = 0; k < z_arrows.size(); ++k)
        if (p >> k & 1U) nz[z_arrows[k]] = true, pt[k] = 1.0;
      bool blockwise = true;
      for (const auto& part : tau.parts) {
        detail::VertexMask m = 0;
        for (std::size_t v = 0; v < part.size(); ++v)
          if (part[v] == 1) m |= detail::VertexMask{1} << v;
        blockwise = blockwise && detail::block_semistable(inst, m, nz);
      }
      bool torus_ss = classify_point(pt, zspec).semistable();
      semistable_count += blockwise;
      if (blockwise != torus_ss) ++disagreements;
    }
    r.data["z_patterns"] = patterns;
    r.data["z_semistable_patterns"] = semistable_count;
    r.agreements["blockwise_ss_eq_rho_lambda_ss"] = disagreements == 0;
  }
  r.finalize();
  return r;
}

/// Exact torus index of every weight-support pattern versus the flow snap.
inline VerificationReport verify_torus_instance(const TorusActionSpec& spec, const VerifyOptions& opts,
                                                const std::string& name = "instance") {
  const std::size_t m = spec.weights().size();
  if (m > opts.pattern_cap) throw ResourceError(std::to_string(m) + " weights exceed the pattern cap");
  auto indices = enumerate_indices(spec);
  std::vector<RationalVector> cands;
  for (const auto& i : indices) cands.push_back(i.beta);
  std::vector<std::function<Record()>> tasks;
  for (std::uint64_t p = 0; p < (std::uint64_t{1} << m); ++p)
    for (std::size_t s = 0; s <= opts.samples_per_pattern; ++s)
      tasks.push_back([&, p, s] {
        Record r;
        r.instance = name;
        r.kind = "torus";
        r.id = "pattern " + detail::bits(p, m) + (s == 0 ? " unit" : " sample " + std::to_string(s));
        auto rng = detail::task_rng(opts.seed, p, s);
        TorusPoint pt(spec.coordinate_count());
        for (std::size_t c = 0; c < pt.size(); ++c)
          if (p >> spec.weight_of(c) & 1U) pt[c] = s == 0 ? Complex(1, 0) : detail::gaussian(rng);
        auto idx = classify_point(pt, spec);
        auto st = stability_status(pt, spec);
        RationalVector exact = idx.beta;
        if (opts.corrupt_beta) detail::corrupt(exact);
        r.data["torus_beta"] = rationals_to_json(exact);
        r.data["stability"] = to_string(st);
        r.agreements["beta_zero_eq_semistable"] = idx.semistable() == (st != Stability::kUnstable);
        auto fr = flow(pt, spec, opts.flow);
        auto cl = classify_limit(fr, cands, spec.ip());
        r.data["flow"] = flow_summary(fr);
        r.data["flow_snap"] = to_json(cl, cands);
        r.agreements["flow_monotone"] = fr.trajectory_monotone;
        if (!fr.converged) r.warnings.push_back("flow did not converge");
        if (fr.converged) {
          r.agreements["flow_eq_exact"] = cl.ok() && cands[*cl.index] == exact;
          r.agreements["mu_norm_eq_depth"] = std::abs(fr.mu_norm - idx.depth()) <= opts.norm_rel_tol * (1 + idx.depth());
        }
        r.finalize();
        return r;
      });
  return detail::run_tasks(name, tasks);
}

// ---------------------------------------------------------------------------
// Suites

struct SuiteEntry {
  std::string name;
  InstanceFile file;
  bool abelian = false;
  bool structure = false;
  bool torus = false;
  std::size_t per_type = 0;
  std::optional<std::vector<HNType>> types;  ///< nullopt: every HN candidate type
};

struct SuiteConfig {
  std::string name = "suite";
  VerifyOptions opts;
  std::vector<SuiteEntry> entries;
};

/// Validates a suite document completely before any work runs. Instances are
/// inline objects or paths resolved through `load`.
inline SuiteConfig parse_suite(const json& j, const std::function<json(const std::string&)>& load) {
  using namespace detail;
  if (!j.is_object()) throw InputError("suite must be an object");
  SuiteConfig cfg;
  if (j.contains("name")) cfg.name = as_string(j["name"], "name");
  if (j.contains("seed")) {
    auto s = as_int(j["seed"], "seed");
    if (s < 0) throw InputError("seed must be nonnegative", "seed");
    cfg.opts.seed = static_cast<std::uint64_t>(s);
  }
  if (j.contains("samples_per_pattern")) {
    auto s = as_int(j["samples_per_pattern"], "samples_per_pattern");
    if (s < 0) throw InputError("must be nonnegative", "samples_per_pattern");
    cfg.opts.samples_per_pattern = static_cast<std::size_t>(s);
  }
  if (j.contains("flow")) {
    const json& f = j["flow"];
    if (!f.is_object()) throw InputError("expected an object", "flow");
    if (f.contains("tol")) cfg.opts.flow.tol = as_real(f["tol"], "flow.tol");
    if (f.contains("max_steps")) cfg.opts.flow.max_steps = static_cast<std::size_t>(as_int(f["max_steps"], "flow.max_steps"));
    if (f.contains("dt_init")) cfg.opts.flow.dt_init = as_real(f["dt_init"], "flow.dt_init");
    if (!(cfg.opts.flow.tol > 0)) throw InputError("must be positive", "flow.tol");
    if (!(cfg.opts.flow.dt_init > 0)) throw InputError("must be positive", "flow.dt_init");
  }
  if (j.contains("inject")) {
    const json& in = j["inject"];
    if (in.contains("corrupt_beta")) {
      if (!in["corrupt_beta"].is_boolean()) throw InputError("expected a boolean", "inject.corrupt_beta");
      cfg.opts.corrupt_beta = in["corrupt_beta"].get<bool>();
    }
  }
  if (!j.contains("instances")) return cfg;
  const json& list = j["instances"];
  if (!list.is_array()) throw InputError("expected an array", "instances");
  for (std::size_t i = 0; i < list.size(); ++i) {
    auto p = index_path("instances", i);
    const json& e = list[i];
    SuiteEntry entry;
    entry.name = e.contains("name") ? as_string(e["name"], join_path(p, "name")) : "instance" + std::to_string(i);
    json doc;
    if (e.contains("instance")) doc = e["instance"];
    else if (e.contains("file")) doc = load(as_string(e["file"], join_path(p, "file")));
    else throw InputError("needs 'instance' or 'file'", p);
    try {
      entry.file = parse_instance(doc);
    } catch (const InputError& err) {
      throw InputError(err.what(), join_path(p, "instance"));
    }
    auto flag = [&](const char* key) {
      if (!e.contains(key)) return false;
      if (!e[key].is_boolean()) throw InputError("expected a boolean", join_path(p, key));
      return e[key].get<bool>();
    };
    entry.abelian = flag("abelian");
    entry.structure = flag("structure");
    entry.torus = flag("torus");
    const bool is_quiver = std::holds_alternative<QuiverFile>(entry.file);
    if ((entry.abelian || entry.structure) && !is_quiver)
      throw InputError("abelian/structure checks need a quiver instance", p);
    if (entry.torus && is_quiver) throw InputError("torus checks need a torus instance", p);
    if (entry.abelian && !std::get<QuiverFile>(entry.file).inst.is_abelian())
      throw InputError("abelian checks need d_v <= 1", join_path(p, "abelian"));
    if (e.contains("generated")) {
      if (!is_quiver) throw InputError("generated checks need a quiver instance", join_path(p, "generated"));
      const json& g = e["generated"];
      auto gp = join_path(p, "generated");
      auto per = as_int(field(g, "per_type", gp), join_path(gp, "per_type"));
      if (per < 0) throw InputError("must be nonnegative", join_path(gp, "per_type"));
      entry.per_type = static_cast<std::size_t>(per);
      if (g.contains("types") && !(g["types"].is_string() && g["types"] == "all")) {
        const auto& inst = std::get<QuiverFile>(entry.file).inst;
        const json& ts = g["types"];
        auto tp = join_path(gp, "types");
        if (!ts.is_array()) throw InputError("expected \"all\" or an array of types", tp);
        std::vector<HNType> types;
        for (std::size_t t = 0; t < ts.size(); ++t) {
          auto ttp = index_path(tp, t);
          if (!ts[t].is_array()) throw InputError("expected an array of dimension vectors", ttp);
          std::vector<DimVector> parts;
          for (std::size_t q = 0; q < ts[t].size(); ++q) parts.push_back(as_ints(ts[t][q], index_path(ttp, q)));
          try {
            types.push_back(make_hn_type(std::move(parts), inst));
          } catch (const Error& err) {
            throw InputError(err.what(), ttp);
          }
        }
        entry.types = std::move(types);
      }
    }
    cfg.entries.push_back(std::move(entry));
  }
  return cfg;
}

inline VerificationReport run_suite(const SuiteConfig& cfg) {
  VerificationReport report;
  report.instance = cfg.name;
  report.seeds = {{"base", cfg.opts.seed}, {"samples_per_pattern", cfg.opts.samples_per_pattern}};
  for (std::size_t i = 0; i < cfg.entries.size(); ++i) {
    const auto& e = cfg.entries[i];
    VerifyOptions opts = cfg.opts;
    opts.seed = cfg.opts.seed + 7919ULL * i;
    if (auto* tf = std::get_if<TorusFile>(&e.file)) {
      if (e.torus) report.merge(verify_torus_instance(tf->spec, opts, e.name));
      continue;
    }
    const auto& inst = std::get<QuiverFile>(e.file).inst;
    if (e.abelian) report.merge(verify_abelian_instance(inst, opts, e.name));
    std::vector<HNType> types;
    if (e.structure || (e.per_type > 0 && !e.types))
      for (const auto& c : enumerate_hn_candidates(inst)) types.push_back(c.tau);
    if (e.structure)
      for (const auto& t : types) report.add(verify_structure(inst, t, opts, e.name));
    if (e.per_type > 0) report.merge(verify_generated_instances(inst, e.types ? *e.types : types, e.per_type, opts, e.name));
  }
  return report;
}

}  // namespace stratakit
