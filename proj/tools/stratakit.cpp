// Command-line front end: index sets, classification, flows, HN types,
// verification suites and instance generation.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "stratakit/document.hpp"
#include "stratakit/io.hpp"
#include "stratakit/momentmap.hpp"
#include "stratakit/quiver.hpp"
#include "stratakit/stratcheck.hpp"
#include "stratakit/torus.hpp"

using namespace stratakit;

namespace {

struct Common {
  double tol = 1e-8;
  std::size_t max_steps = 200000;
  double dt_init = 1e-3;
  std::uint64_t seed = 1;
  std::string format = "json";
  std::string out;
  // Options given explicitly on the command line override suite settings.
  CLI::Option* tol_opt = nullptr;
  CLI::Option* steps_opt = nullptr;
  CLI::Option* dt_opt = nullptr;
  CLI::Option* seed_opt = nullptr;

  FlowOptions flow() const {
    FlowOptions o;
    o.tol = tol;
    o.max_steps = max_steps;
    o.dt_init = dt_init;
    return o;
  }
};

void add_common(CLI::App* sub, Common& c) {
  c.tol_opt = sub->add_option("--tol", c.tol, "gradient-norm stopping tolerance")->check(CLI::PositiveNumber);
  c.steps_opt = sub->add_option("--max-steps", c.max_steps, "accepted-step cap for flows");
  c.dt_opt = sub->add_option("--dt-init", c.dt_init, "initial flow step")->check(CLI::PositiveNumber);
  c.seed_opt = sub->add_option("--seed", c.seed, "random seed");
  sub->add_option("--format", c.format, "output format")->check(CLI::IsMember({"json", "text"}));
  sub->add_option("--out", c.out, "write output to this path");
}

void emit(const Common& c, const json& doc, const std::string& text) {
  std::string body = c.format == "json" ? doc.dump(2) + "\n" : text;
  if (c.out.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream f(c.out);
  if (!f) throw InputError("cannot write '" + c.out + "'", "--out");
  f << body;
}

std::string beta_text(const RationalVector& b) {
  std::string s = "(";
  for (std::size_t i = 0; i < b.size(); ++i) s += (i ? ", " : "") + to_string(b[i]);
  return s + ")";
}

std::string tau_text(const HNType& t) {
  std::string s = "(";
  for (std::size_t i = 0; i < t.parts.size(); ++i) {
    s += i ? ", (" : "(";
    for (std::size_t v = 0; v < t.parts[i].size(); ++v) s += (v ? "," : "") + std::to_string(t.parts[i][v]);
    s += ")";
  }
  return s + ")";
}

template <typename Map>
const typename Map::mapped_type& pick(const Map& m, const std::string& name, const char* what) {
  if (name.empty()) {
    if (m.size() == 1) return m.begin()->second;
    throw InputError(std::string("choose one of the file's ") + what + " with --point", what);
  }
  auto it = m.find(name);
  if (it == m.end()) throw InputError("no " + std::string(what) + " named '" + name + "'", std::string(what) + "." + name);
  return it->second;
}

std::vector<RationalVector> betas_of(const std::vector<BetaCandidate>& c) {
  std::vector<RationalVector> out;
  for (const auto& x : c) out.push_back(x.beta);
  return out;
}

std::vector<RationalVector> betas_of(const std::vector<StratumIndex>& c) {
  std::vector<RationalVector> out;
  for (const auto& x : c) out.push_back(x.beta);
  return out;
}

TorusPoint dense(const SparseTorusPoint& p, const TorusActionSpec& spec) {
  TorusPoint out(spec.coordinate_count());
  for (const auto& [label, v] : p) out[spec.coordinate_of(label)] = v;
  return out;
}

json lambda_of(const RationalVector& beta) {
  if (is_zero(beta)) return nullptr;
  return primitive_integer_ray(beta);
}

// ---------------------------------------------------------------------------

int cmd_indices(const std::string& path, const Common& c) {
  auto file = parse_instance(load_document(path));
  json doc;
  std::ostringstream text;
  if (auto* tf = std::get_if<TorusFile>(&file)) {
    auto idx = enumerate_indices(tf->spec);
    doc["kind"] = "torus";
    doc["indices"] = json::array();
    for (const auto& i : idx) {
      doc["indices"].push_back(to_json(i, tf->spec));
      text << "beta " << beta_text(i.beta) << "  d^2 " << to_string(i.d_squared) << "\n";
    }
  } else {
    const auto& inst = std::get<QuiverFile>(file).inst;
    doc["kind"] = "quiver";
    doc["indices"] = json::array();
    for (const auto& cand : enumerate_hn_candidates(inst)) {
      json j = to_json(cand);
      j["lambda"] = lambda_of(cand.beta);
      doc["indices"].push_back(std::move(j));
      text << "tau " << tau_text(cand.tau) << "  beta " << beta_text(cand.beta) << "  d^2 " << to_string(cand.norm_sq)
           << "\n";
    }
  }
  emit(c, doc, text.str());
  return 0;
}

int cmd_classify(const std::string& path, const std::string& point, const std::string& method, const Common& c) {
  auto file = parse_instance(load_document(path));
  const bool want_exact = method != "flow";
  const bool want_flow = method != "exact";
  json doc;
  doc["method"] = method;
  std::optional<RationalVector> exact_beta, flow_beta;
  bool ok = true;
  std::ostringstream text;

  if (auto* tf = std::get_if<TorusFile>(&file)) {
    auto pt = dense(pick(tf->points, point, "points"), tf->spec);
    if (want_exact) {
      auto idx = classify_point(pt, tf->spec);
      doc["exact"] = to_json(idx, tf->spec);
      doc["exact"]["stability"] = to_string(stability_status(pt, tf->spec));
      exact_beta = idx.beta;
    }
    if (want_flow) {
      auto cands = betas_of(enumerate_indices(tf->spec));
      auto fr = flow(pt, tf->spec, c.flow());
      auto cl = classify_limit(fr, cands, tf->spec.ip());
      doc["flow"] = flow_summary(fr);
      doc["flow"]["classification"] = to_json(cl, cands);
      if (cl.ok() && fr.converged) flow_beta = cands[*cl.index];
      else ok = false;
    }
  } else {
    const auto& qf = std::get<QuiverFile>(file);
    const auto& rep = pick(qf.reps, point, "reps");
    if (want_exact) {
      if (!qf.inst.is_abelian())
        throw UnsupportedError("exact classification needs d_v <= 1; use --method flow");
      auto tau = hn_filtration_abelian(rep, qf.inst);
      auto hn_beta = beta_of_type(tau, qf.inst).flat_beta();
      RationalVector torus_beta;
      if (qf.inst.total_dim() > 0) torus_beta = classify_point(flatten(rep, qf.inst), torus_spec_of(qf.inst)).beta;
      doc["exact"] = to_json(beta_of_type(tau, qf.inst));
      doc["exact"]["torus_beta"] = rationals_to_json(torus_beta);
      doc["exact"]["hn_beta"] = rationals_to_json(hn_beta);
      if (hn_beta != torus_beta) ok = false;
      exact_beta = hn_beta;
    }
    if (want_flow) {
      auto cands = betas_of(enumerate_hn_candidates(qf.inst));
      auto fr = flow(rep, qf.inst, c.flow());
      auto cl = classify_limit(fr, cands, alpha_inner_product(qf.inst));
      doc["flow"] = flow_summary(fr);
      doc["flow"]["classification"] = to_json(cl, cands);
      if (cl.ok() && fr.converged) flow_beta = cands[*cl.index];
      else ok = false;
    }
  }
  if (exact_beta && flow_beta && *exact_beta != *flow_beta) ok = false;
  const auto& beta = exact_beta ? exact_beta : flow_beta;
  doc["beta"] = beta ? rationals_to_json(*beta) : json(nullptr);
  doc["lambda"] = beta ? lambda_of(*beta) : json(nullptr);
  doc["agree"] = ok;
  if (beta) text << "beta " << beta_text(*beta) << (is_zero(*beta) ? "  semistable" : "") << "\n";
  if (!ok) text << "classifications disagree or the flow did not settle\n";
  emit(c, doc, text.str());
  return ok ? 0 : static_cast<int>(ExitCode::kDisagreement);
}

int cmd_flow(const std::string& path, const std::string& point, const Common& c) {
  auto file = parse_instance(load_document(path));
  json doc;
  std::ostringstream text;
  bool ok = true;
  if (auto* tf = std::get_if<TorusFile>(&file)) {
    auto pt = dense(pick(tf->points, point, "points"), tf->spec);
    auto fr = flow(pt, tf->spec, c.flow());
    auto cands = betas_of(enumerate_indices(tf->spec));
    auto cl = classify_limit(fr, cands, tf->spec.ip());
    doc = flow_summary(fr);
    json lim = json::object();
    for (std::size_t i = 0; i < fr.limit.size(); ++i) lim[tf->spec.labels()[i]] = complex_to_json(fr.limit[i]);
    doc["limit"] = std::move(lim);
    doc["classification"] = to_json(cl, cands);
    ok = fr.converged;
    text << "mu_norm " << format_double(fr.mu_norm) << "  steps " << fr.steps << (fr.converged ? "" : "  (not converged)")
         << "\n";
  } else {
    const auto& qf = std::get<QuiverFile>(file);
    auto fr = flow(pick(qf.reps, point, "reps"), qf.inst, c.flow());
    auto cands = betas_of(enumerate_hn_candidates(qf.inst));
    auto cl = classify_limit(fr, cands, alpha_inner_product(qf.inst));
    doc = flow_summary(fr);
    doc["limit"] = to_json(fr.limit, qf.inst);
    doc["classification"] = to_json(cl, cands);
    ok = fr.converged;
    text << "mu_norm " << format_double(fr.mu_norm) << "  steps " << fr.steps << (fr.converged ? "" : "  (not converged)")
         << "\n";
  }
  emit(c, doc, text.str());
  return ok ? 0 : static_cast<int>(ExitCode::kDisagreement);
}

int cmd_hn(const std::string& path, const std::string& point, const Common& c) {
  auto file = parse_instance(load_document(path));
  auto* qf = std::get_if<QuiverFile>(&file);
  if (!qf) throw UnsupportedError("hn needs a quiver instance");
  auto tau = hn_filtration_abelian(pick(qf->reps, point, "reps"), qf->inst);
  auto bw = beta_of_type(tau, qf->inst);
  emit(c, to_json(bw), "tau " + tau_text(tau) + "  beta " + beta_text(bw.flat_beta()) + "\n");
  return 0;
}

int cmd_verify(const std::string& path, bool inject, const Common& c) {
  namespace fs = std::filesystem;
  const fs::path base = fs::path(path).parent_path();
  auto cfg = parse_suite(load_document(path), [&](const std::string& rel) {
    fs::path p(rel);
    return load_document((p.is_absolute() ? p : base / p).string());
  });
  if (c.tol_opt->count()) cfg.opts.flow.tol = c.tol;
  if (c.steps_opt->count()) cfg.opts.flow.max_steps = c.max_steps;
  if (c.dt_opt->count()) cfg.opts.flow.dt_init = c.dt_init;
  if (c.seed_opt->count()) cfg.opts.seed = c.seed;
  if (inject) cfg.opts.corrupt_beta = true;
  auto report = run_suite(cfg);
  std::ostringstream text;
  text << report.instance << ": " << report.pass << " pass, " << report.fail << " fail, " << report.warn << " warn\n";
  for (const auto& r : report.records)
    if (r.status == RecordStatus::kFail) text << "FAIL " << r.instance << " " << r.kind << " " << r.id << "\n";
  emit(c, report.to_json(), text.str());
  return report.ok() ? 0 : static_cast<int>(ExitCode::kDisagreement);
}

int cmd_gen(const std::string& path, const std::string& tau_text_in, const std::string& name, const Common& c) {
  auto file = parse_instance(load_document(path));
  auto* qf = std::get_if<QuiverFile>(&file);
  if (!qf) throw UnsupportedError("gen needs a quiver instance");
  json tj;
  try {
    tj = json::parse(tau_text_in);
  } catch (const json::parse_error&) {
    throw InputError("expected a JSON array of dimension vectors", "--tau");
  }
  if (!tj.is_array()) throw InputError("expected a JSON array of dimension vectors", "--tau");
  std::vector<DimVector> parts;
  for (std::size_t i = 0; i < tj.size(); ++i) parts.push_back(detail::as_ints(tj[i], "--tau[" + std::to_string(i) + "]"));
  auto tau = make_hn_type(std::move(parts), qf->inst);
  auto gen = generate_hn_instance(tau, qf->inst, c.seed);
  json doc = to_json(qf->inst);
  doc["reps"] = {{name, to_json(gen.rep, qf->inst)}};
  json cert = to_json(gen.beta);
  cert["certified"] = gen.certified;
  cert["seed"] = c.seed;
  cert["y"] = to_json(gen.y, qf->inst);
  json g = json::object();
  for (std::size_t v = 0; v < gen.g.size(); ++v) g[qf->inst.quiver().vertices()[v]] = matrix_to_json(gen.g[v]);
  cert["g"] = std::move(g);
  doc["certificate"] = std::move(cert);
  emit(c, doc, "generated '" + name + "' of type " + tau_text(tau) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stratifications of linear torus and quiver actions"};
  app.require_subcommand(1);
  app.set_version_flag("--version", STRATAKIT_VERSION);

  Common common;
  std::string file, point, method = "both", tau, name = "generated";
  bool inject = false;

  auto* indices = app.add_subcommand("indices", "list the stratum indices of an instance");
  indices->add_option("file", file, "instance file (JSON or TOML)")->required();
  add_common(indices, common);

  auto* classify = app.add_subcommand("classify", "classify a point or representation");
  classify->add_option("file", file)->required();
  classify->add_option("--point,--rep", point, "named point or representation in the file");
  classify->add_option("--method", method)->check(CLI::IsMember({"exact", "flow", "both"}));
  add_common(classify, common);

  auto* flowc = app.add_subcommand("flow", "run the negative gradient flow of |mu|^2");
  flowc->add_option("file", file)->required();
  flowc->add_option("--point,--rep", point);
  add_common(flowc, common);

  auto* hn = app.add_subcommand("hn", "Harder-Narasimhan type of an abelian representation");
  hn->add_option("file", file)->required();
  hn->add_option("--point,--rep", point);
  add_common(hn, common);

  auto* verify = app.add_subcommand("verify", "run a verification suite");
  verify->add_option("suite", file)->required();
  verify->add_flag("--inject-fault", inject, "perturb the HN beta table to exercise failure reporting");
  add_common(verify, common);

  auto* gen = app.add_subcommand("gen", "generate a representation of a given HN type");
  gen->add_option("file", file)->required();
  gen->add_option("--tau", tau, "JSON list of dimension vectors, e.g. [[1,0],[0,1]]")->required();
  gen->add_option("--name", name, "name of the generated representation");
  add_common(gen, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::kSchema);
  }

  try {
    if (*indices) return cmd_indices(file, common);
    if (*classify) return cmd_classify(file, point, method, common);
    if (*flowc) return cmd_flow(file, point, common);
    if (*hn) return cmd_hn(file, point, common);
    if (*verify) return cmd_verify(file, inject, common);
    if (*gen) return cmd_gen(file, tau, name, common);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kDisagreement);
  }
  return 0;
}
