// Numerical layers: moment map, gradient flow, Kempf-Ness descent and the
// verification harness.

#include <gtest/gtest.h>

#include <random>

#include "stratakit/io.hpp"
#include "stratakit/momentmap.hpp"
#include "stratakit/stratcheck.hpp"

using namespace stratakit;

namespace {

QuiverInstance kronecker(IntVector d = {1, 1}, IntVector theta = {-1, 1}, int arrows = 2) {
  std::vector<Arrow> as;
  for (int i = 0; i < arrows; ++i) as.push_back({0, 1, std::string(1, static_cast<char>('a' + i))});
  return QuiverInstance(Quiver({"1", "2"}, as), d, theta, {1, 1});
}

QuiverInstance triangle() {
  return QuiverInstance(Quiver({"1", "2", "3"}, {{0, 1, "a"}, {0, 1, "b"}, {1, 2, "c"}, {0, 2, "e"}}), {1, 1, 1},
                        {-3, 1, 2}, {1, 1, 2});
}

// Three vertices, unequal dimensions and weights.
QuiverInstance mixed() {
  return QuiverInstance(Quiver({"u", "v", "w"}, {{0, 1, "a"}, {1, 2, "b"}, {0, 2, "c"}}), {2, 1, 2}, {-1, 4, -1},
                        {2, 1, 3});
}

QuiverRep random_rep(const QuiverInstance& inst, std::mt19937_64& rng, double scale = 1) {
  QuiverRep r = zero_rep(inst);
  for (auto& m : r.maps)
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = scale * detail::gaussian(rng);
  return r;
}

std::vector<Matrix> random_hermitian(const QuiverInstance& inst, std::mt19937_64& rng, double scale = 1) {
  std::vector<Matrix> out;
  for (std::size_t v = 0; v < inst.vertex_count(); ++v) {
    const auto n = static_cast<Eigen::Index>(inst.dim(v));
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = detail::gaussian(rng);
    out.push_back(scale * (m + m.adjoint()) / 2.0);
  }
  return out;
}

QuiverRep axpy(const QuiverRep& x, double s, const QuiverRep& y) {
  QuiverRep out = x;
  for (std::size_t a = 0; a < x.maps.size(); ++a) out.maps[a] += s * y.maps[a];
  return out;
}

// M_v computed entrywise from the definition, independent of the library.
std::vector<Matrix> moment_oracle(const QuiverRep& rep, const QuiverInstance& inst) {
  std::vector<Matrix> m;
  for (std::size_t v = 0; v < inst.vertex_count(); ++v) {
    const auto n = static_cast<Eigen::Index>(inst.dim(v));
    m.push_back(Matrix::Zero(n, n));
    for (Eigen::Index i = 0; i < n; ++i) m[v](i, i) = -static_cast<double>(inst.theta()[v]);
  }
  for (std::size_t a = 0; a < rep.maps.size(); ++a) {
    const auto& ar = inst.quiver().arrow(a);
    const Matrix& p = rep.maps[a];
    for (Eigen::Index i = 0; i < p.rows(); ++i)
      for (Eigen::Index j = 0; j < p.rows(); ++j)
        for (Eigen::Index k = 0; k < p.cols(); ++k) m[ar.head](i, j) += p(i, k) * std::conj(p(j, k));
    for (Eigen::Index i = 0; i < p.cols(); ++i)
      for (Eigen::Index j = 0; j < p.cols(); ++j)
        for (Eigen::Index k = 0; k < p.rows(); ++k) m[ar.tail](i, j) -= std::conj(p(k, i)) * p(k, j);
  }
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// Moment map

TEST(Moment, KroneckerClosedForm) {
  auto k = kronecker();
  QuiverRep r = zero_rep(k);
  r.maps[0](0, 0) = Complex(0.3, -0.4);
  r.maps[1](0, 0) = Complex(1.2, 0);
  const double s = 0.25 + 1.44;
  auto m = moment_star(r, k);
  EXPECT_NEAR(m.M[0](0, 0).real(), 1 - s, 1e-15);
  EXPECT_NEAR(m.M[1](0, 0).real(), s - 1, 1e-15);
  EXPECT_NEAR(m.norm_sq(), 2 * (s - 1) * (s - 1), 1e-14);
  EXPECT_NEAR(std::abs(m.mu_star(1)(0, 0) - Complex(0, 2 * kPi * (s - 1))), 0, 1e-13);
}

TEST(Moment, MatchesEntrywiseOracle) {
  std::mt19937_64 rng(1);
  for (auto inst : {mixed(), kronecker({2, 3}, {-3, 2}, 3)}) {
    auto r = random_rep(inst, rng);
    auto m = moment_star(r, inst);
    auto o = moment_oracle(r, inst);
    for (std::size_t v = 0; v < o.size(); ++v) {
      EXPECT_LT((m.M[v] - o[v]).norm(), 1e-12);
      EXPECT_LT((m.M[v] - m.M[v].adjoint()).norm(), 1e-14);
    }
  }
}

// mu* is characterised by d/ds (1/4 pi) |exp(s H) phi|^2 = (1/2 pi) Re tr(H (M + theta))
// i.e. the derivative of the unshifted part of the Kempf-Ness function.
TEST(Moment, DefiningPropertyByFiniteDifferences) {
  std::mt19937_64 rng(2);
  auto inst = mixed();
  for (int t = 0; t < 20; ++t) {
    auto r = random_rep(inst, rng);
    auto h = random_hermitian(inst, rng);
    auto m = moment_star(r, inst);
    double expected = 0;
    for (std::size_t v = 0; v < h.size(); ++v)
      expected += (h[v] * (m.M[v] + static_cast<double>(inst.theta()[v]) * Matrix::Identity(h[v].rows(), h[v].rows())))
                      .trace()
                      .real();
    expected /= 2 * kPi;
    const double e = 1e-5;
    std::vector<Matrix> hp, hm;
    for (const auto& x : h) hp.push_back(e * x), hm.push_back(-e * x);
    const double fd =
        (rep_norm_sq(act(exp_hermitian(hp), r, inst)) - rep_norm_sq(act(exp_hermitian(hm), r, inst))) / (2 * e) /
        (4 * kPi);
    EXPECT_NEAR(fd, expected, 1e-7 * (1 + std::abs(expected)));
  }
}

TEST(Moment, UnitaryEquivariance) {
  std::mt19937_64 rng(3);
  auto inst = mixed();
  auto r = random_rep(inst, rng);
  GroupElement k;
  for (std::size_t v = 0; v < inst.vertex_count(); ++v) {
    const auto n = static_cast<Eigen::Index>(inst.dim(v));
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = detail::gaussian(rng);
    k.push_back(Eigen::HouseholderQR<Matrix>(m).householderQ());
  }
  auto m0 = moment_star(r, inst);
  auto m1 = moment_star(act(k, r, inst), inst);
  for (std::size_t v = 0; v < k.size(); ++v) EXPECT_LT((m1.M[v] - k[v] * m0.M[v] * k[v].adjoint()).norm(), 1e-12);
  EXPECT_NEAR(m0.norm_sq(), m1.norm_sq(), 1e-11);
}

TEST(Moment, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  for (auto inst : {mixed(), triangle()}) {
    for (int t = 0; t < 10; ++t) {
      auto r = random_rep(inst, rng);
      auto x = random_rep(inst, rng);
      const double e = 1e-6;
      const double fd = (mu_norm_sq(axpy(r, e, x), inst) - mu_norm_sq(axpy(r, -e, x), inst)) / (2 * e);
      const double an = kaehler_metric(grad_norm_sq(r, inst), x);
      EXPECT_NEAR(fd, an, 1e-6 * (1 + std::abs(an)));
    }
  }
}

TEST(Moment, AlphaInnerProductAndCoordinates) {
  auto inst = mixed();
  auto ip = alpha_inner_product(inst);
  EXPECT_EQ(ip.gram()[0][0], 2);
  EXPECT_EQ(ip.gram()[2][2], 1);
  EXPECT_EQ(ip.gram()[4][4], 3);
  // at phi = 0 the coordinates are -theta_v / alpha_v
  auto c = moment_star(zero_rep(inst), inst).sorted_coords();
  EXPECT_EQ(c, (std::vector<double>{0.5, 0.5, -4, 1.0 / 3, 1.0 / 3}));
}

// ---------------------------------------------------------------------------
// Flow

TEST(Flow, KroneckerConvergesToUnitSphere) {
  auto k = kronecker();
  QuiverRep r = zero_rep(k);
  r.maps[0](0, 0) = 0.6;
  r.maps[1](0, 0) = Complex(-0.3, 1.1);
  auto fr = flow(r, k);
  EXPECT_TRUE(fr.converged);
  EXPECT_TRUE(fr.trajectory_monotone);
  EXPECT_LT(fr.mu_norm, 1e-6);
  EXPECT_NEAR(rep_norm_sq(fr.limit), 1, 1e-6);
  // the flow stays on the complex line through phi
  auto ratio = fr.limit.maps[1](0, 0) / fr.limit.maps[0](0, 0);
  EXPECT_LT(std::abs(ratio - r.maps[1](0, 0) / r.maps[0](0, 0)), 1e-9);
}

TEST(Flow, KroneckerLineStaysInvariant) {
  auto k = kronecker();
  QuiverRep r = zero_rep(k);
  r.maps[0](0, 0) = 3.0;
  auto fr = flow(r, k);
  EXPECT_EQ(fr.limit.maps[1](0, 0), Complex(0, 0));
  EXPECT_NEAR(std::abs(fr.limit.maps[0](0, 0)), 1, 1e-6);
}

TEST(Flow, CriticalPointsDoNotMove) {
  auto k = kronecker();
  QuiverRep r = zero_rep(k);
  r.maps[0](0, 0) = Complex(0.6, 0);
  r.maps[1](0, 0) = Complex(0, 0.8);
  auto fr = flow(r, k);
  EXPECT_EQ(fr.steps, 0U);
  EXPECT_LT(fr.mu_norm, 1e-12);

  auto z = flow(zero_rep(k), k);
  EXPECT_EQ(z.steps, 0U);
  EXPECT_NEAR(z.mu_norm * z.mu_norm, 2, 1e-14);
  auto cands = std::vector<RationalVector>{{0, 0}, {1, -1}};
  auto cl = classify_limit(z, cands, alpha_inner_product(k));
  ASSERT_TRUE(cl.ok());
  EXPECT_EQ(*cl.index, 1U);
}

TEST(Flow, ClassifyLimitRefusesAmbiguousPoints) {
  auto ip = InnerProduct::identity(2);
  std::vector<RationalVector> c = {{0, 0}, {1, -1}};
  EXPECT_FALSE(classify_limit(std::vector<double>{0.5, -0.5}, c, ip).ok());
  EXPECT_TRUE(classify_limit(std::vector<double>{0.9, -0.9}, c, ip).ok());
  EXPECT_THROW(classify_limit(std::vector<double>{0.9}, c, ip), InputError);
}

TEST(Flow, MixedInstanceLandsOnCandidate) {
  std::mt19937_64 rng(7);
  auto inst = mixed();
  std::vector<RationalVector> cands;
  for (const auto& c : enumerate_hn_candidates(inst)) cands.push_back(c.beta);
  for (int t = 0; t < 5; ++t) {
    auto fr = flow(random_rep(inst, rng), inst);
    ASSERT_TRUE(fr.converged);
    EXPECT_TRUE(fr.trajectory_monotone);
    auto cl = classify_limit(fr, cands, alpha_inner_product(inst));
    ASSERT_TRUE(cl.ok()) << cl.message;
    EXPECT_NEAR(fr.mu_norm, std::sqrt(to_double(alpha_inner_product(inst).norm_sq(cands[*cl.index]))), 1e-6);
  }
}

TEST(Flow, GeneratedKroneckerInstances) {
  auto k = kronecker({3, 3}, {-1, 1}, 3);
  SemistableRegistry reg(k);
  auto t = make_hn_type({{1, 0}, {2, 2}, {0, 1}}, k);
  auto g = generate_hn_instance(t, k, 12, &reg);
  // beta = (1, 0, 0 | 0, 0, -1)
  auto fr = flow_generated(g, k);
  EXPECT_TRUE(fr.converged);
  EXPECT_NEAR(fr.mu_norm, std::sqrt(2.0), 1e-6);
  auto plain = flow(g.rep, k);
  EXPECT_NEAR(plain.mu_norm, std::sqrt(2.0), 1e-6);
}

TEST(Integrator, QuadraticAndFailure) {
  using V = Eigen::VectorXcd;
  V x0(2);
  x0 << 1.0, Complex(0, 2);
  auto field = [](const V& x) { return V(-x); };
  auto energy = [](const V& x) { return x.squaredNorm(); };
  auto residual = [](const V& x) { return x.norm(); };
  FlowOptions o;
  auto tr = integrate_gradient_flow(x0, field, energy, residual, [](V&) {}, o);
  EXPECT_LT(tr.state.norm(), o.tol);
  EXPECT_LE(tr.max_energy_increase, o.energy_slack);
  auto bad = [](const V& x) { return V(x * std::nan("")); };
  EXPECT_THROW(integrate_gradient_flow(x0, bad, energy, [](const V& x) { return x.norm() * std::nan(""); },
                                       [](V&) {}, o),
               NumericError);
}

// ---------------------------------------------------------------------------
// Kempf-Ness

TEST(KempfNess, GradientMatchesGeodesicDerivative) {
  std::mt19937_64 rng(8);
  auto inst = mixed();
  for (int t = 0; t < 15; ++t) {
    auto r = random_rep(inst, rng);
    auto a = random_hermitian(inst, rng, 0.3);
    auto h = random_hermitian(inst, rng);
    auto g0 = exp_hermitian(a);
    auto along = [&](double s) {
      std::vector<Matrix> sh;
      for (const auto& x : h) sh.push_back(s * x);
      auto e = exp_hermitian(sh);
      GroupElement g;
      for (std::size_t v = 0; v < e.size(); ++v) g.push_back(e[v] * g0[v]);
      return kempf_ness_value_at(r, inst, g);
    };
    const double eps = 1e-5;
    const double fd = (along(eps) - along(-eps)) / (2 * eps);
    // oracle: (1/2 pi) sum Re tr(H M) at exp(A) phi
    auto mo = moment_oracle(act(g0, r, inst), inst);
    double oracle = 0;
    for (std::size_t v = 0; v < h.size(); ++v) oracle += (h[v] * mo[v]).trace().real();
    oracle /= 2 * kPi;
    std::vector<Matrix> xi;
    for (const auto& x : h) xi.push_back(Complex(0, -1) * x);
    const double lib = alpha_pairing(kn_gradient(r, inst, a), xi, inst);
    EXPECT_NEAR(fd, oracle, 1e-7 * (1 + std::abs(oracle)));
    EXPECT_NEAR(lib, oracle, 1e-10 * (1 + std::abs(oracle)));
    EXPECT_NEAR(kempf_ness_value(r, inst, a), along(0), 1e-12 * (1 + std::abs(along(0))));
  }
}

TEST(KempfNess, ConvexAlongGeodesics) {
  std::mt19937_64 rng(9);
  auto inst = triangle();
  for (int t = 0; t < 20; ++t) {
    auto r = random_rep(inst, rng);
    auto h = random_hermitian(inst, rng);
    auto a = random_hermitian(inst, rng, 0.5);
    auto g0 = exp_hermitian(a);
    auto along = [&](double s) {
      std::vector<Matrix> sh;
      for (const auto& x : h) sh.push_back(s * x);
      auto e = exp_hermitian(sh);
      GroupElement g;
      for (std::size_t v = 0; v < e.size(); ++v) g.push_back(e[v] * g0[v]);
      return kempf_ness_value_at(r, inst, g);
    };
    for (double s = -1; s <= 1; s += 0.25) {
      const double e = 1e-2;
      EXPECT_GE(along(s + e) - 2 * along(s) + along(s - e), -1e-8);
    }
  }
}

TEST(KempfNess, KroneckerMinimum) {
  auto k = kronecker();
  QuiverRep r = zero_rep(k);
  r.maps[0](0, 0) = 1.0;
  auto res = kn_minimize(r, k);
  EXPECT_EQ(res.status, KNStatus::kConverged);
  EXPECT_LT(res.grad_norm, 1e-8);
  EXPECT_NEAR(rep_norm_sq(res.point), 1, 1e-9);
  EXPECT_LT(mu_norm_sq(res.point, k), 1e-16);

  auto z = kn_minimize(zero_rep(k), k);
  EXPECT_EQ(z.status, KNStatus::kDiverging);
  EXPECT_NEAR(z.grad_norm, std::sqrt(2.0), 1e-12);
}

TEST(KempfNess, NonAbelianStableRep) {
  auto k = kronecker({2, 2}, {-1, 1}, 3);
  std::mt19937_64 rng(10);
  auto res = kn_minimize(random_rep(k, rng), k);
  EXPECT_EQ(res.status, KNStatus::kConverged);
  EXPECT_LT(std::sqrt(mu_norm_sq(res.point, k)), 1e-6);
}

TEST(KempfNess, TorusModel) {
  TorusActionSpec s(2, {{-1, 1}, {-1, 1}}, {-1, 1}, InnerProduct::identity(2));
  auto res = kn_minimize(TorusPoint{Complex(2, 0), Complex(0, 1)}, s);
  EXPECT_EQ(res.status, KNStatus::kConverged);
  EXPECT_LT(std::sqrt(torus_mu_norm_sq(res.point, s)), 1e-8);
  EXPECT_EQ(kn_minimize(TorusPoint(2), s).status, KNStatus::kDiverging);
  // value at the start matches the closed form
  EXPECT_NEAR(kempf_ness_value(TorusPoint{1.0, 0.0}, s, {0.5, 0.0}), std::exp(-1.0) / (4 * kPi) - 0.5 / (2 * kPi) * -1,
              1e-15);
}

TEST(TorusFlow, ConvergesToDepth) {
  TorusActionSpec s(2, {{1, 0}, {0, 1}, {-1, 0}, {1, 1}}, {1, 0}, InnerProduct::diagonal({1, 2}));
  std::mt19937_64 rng(12);
  for (std::uint64_t mask = 0; mask < 16; ++mask) {
    TorusPoint p(4);
    for (std::size_t c = 0; c < 4; ++c)
      if (mask >> c & 1U) p[c] = detail::gaussian(rng);
    auto idx = classify_point(p, s);
    FlowOptions o;
    o.max_steps = 20000;  // boundary points approach their limit slowly
    auto fr = flow(p, s, o);
    if (!fr.converged) continue;
    EXPECT_NEAR(fr.mu_norm, idx.depth(), 1e-4 * (1 + idx.depth())) << mask;
  }
}

// ---------------------------------------------------------------------------
// Weight formula

TEST(WeightFormula, KroneckerValue) {
  auto k = kronecker();
  QuiverRep r = zero_rep(k);
  r.maps[0](0, 0) = Complex(0.5, 0.5);
  r.maps[1](0, 0) = 2.0;
  const double m = 0.5 + 4;
  auto [direct, sum] = weight_formula_check(r, k, {1, -1});
  EXPECT_NEAR(direct, -2 * m + 2, 1e-13);
  EXPECT_NEAR(sum, -2 * m + 2, 1e-13);
}

TEST(WeightFormula, AgreesOnBlockOneParameterSubgroups) {
  std::mt19937_64 rng(13);
  auto inst = mixed();
  auto cands = enumerate_hn_candidates(inst);
  for (const auto& c : cands) {
    auto lam = beta_of_type(c.tau, inst).flat_lambda();
    auto r = random_rep(inst, rng);
    auto [direct, sum] = weight_formula_check(r, inst, lam);
    EXPECT_NEAR(direct, sum, 1e-10 * (1 + std::abs(direct)));
  }
}

// ---------------------------------------------------------------------------
// Verification harness

TEST(Stratcheck, KroneckerAbelianAllPass) {
  VerifyOptions o;
  o.samples_per_pattern = 3;
  o.flow.tol = 1e-6;
  auto rep = verify_abelian_instance(kronecker(), o, "kronecker");
  EXPECT_EQ(rep.fail, 0U);
  EXPECT_EQ(rep.records.size(), 4U * 4U);
  for (const auto& r : rep.records) EXPECT_EQ(r.agreements.count("hn_eq_torus"), 1U) << r.id;
}

TEST(Stratcheck, InjectedFaultIsCaught) {
  VerifyOptions o;
  o.samples_per_pattern = 1;
  o.corrupt_beta = true;
  auto rep = verify_abelian_instance(kronecker(), o, "kronecker");
  EXPECT_EQ(rep.pass, 0U);
  EXPECT_EQ(rep.fail, rep.records.size());
}

TEST(Stratcheck, SingleSourceRecordsOnlyWarn) {
  Record r;
  r.finalize();
  EXPECT_EQ(r.status, RecordStatus::kWarn);
  Record f;
  f.agreements["x"] = true;
  f.agreements["y"] = false;
  f.finalize();
  EXPECT_EQ(f.status, RecordStatus::kFail);
}

TEST(Stratcheck, StructureRecords) {
  VerifyOptions o;
  auto k = kronecker({2, 2}, {-1, 1}, 3);
  for (const auto& c : enumerate_hn_candidates(k)) {
    auto r = verify_structure(k, c.tau, o, "k3");
    EXPECT_NE(r.status, RecordStatus::kFail) << r.to_json().dump();
  }
}

TEST(Stratcheck, ReportIsDeterministic) {
  VerifyOptions o;
  o.samples_per_pattern = 2;
  o.flow.tol = 1e-6;
  auto k = kronecker({2, 2}, {-1, 1});
  std::vector<HNType> types;
  for (const auto& c : enumerate_hn_candidates(k)) types.push_back(c.tau);
  auto a = verify_generated_instances(k, types, 2, o, "k22").to_json().dump();
  auto b = verify_generated_instances(k, types, 2, o, "k22").to_json().dump();
  EXPECT_EQ(a, b);
}

TEST(Stratcheck, SuiteSchemaErrors) {
  auto load = [](const std::string&) -> json { throw InputError("no files here"); };
  auto expect_path = [&](const json& j, const std::string& path) {
    try {
      parse_suite(j, load);
      ADD_FAILURE() << path;
    } catch (const InputError& e) {
      EXPECT_EQ(e.path(), path) << e.what();
    }
  };
  json inst = {{"kind", "quiver"},
               {"vertices", {"1", "2"}},
               {"arrows", {{{"tail", "1"}, {"head", "2"}}}},
               {"d", {1, 1}},
               {"theta", {-1, 1}}};
  expect_path({{"instances", {{{"instance", inst}, {"generated", {{"per_type", -1}}}}}}},
              "instances[0].generated.per_type");
  expect_path({{"instances", {{{"instance", inst}, {"torus", true}}}}}, "instances[0]");
  expect_path({{"flow", {{"tol", 0}}}}, "flow.tol");
  expect_path({{"instances", {{{"instance", inst}, {"generated", {{"per_type", 1}, {"types", {{{0, 1}, {1, 0}}}}}}}}}},
              "instances[0].generated.types[0]");
  auto cfg = parse_suite({{"seed", 4}, {"instances", {{{"instance", inst}, {"abelian", true}}}}}, load);
  EXPECT_EQ(cfg.opts.seed, 4U);
  EXPECT_TRUE(run_suite(cfg).ok());
}
