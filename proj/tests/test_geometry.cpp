// Exact layers: rational cone geometry, torus indices, quiver HN data, file IO.

#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "stratakit/document.hpp"
#include "stratakit/io.hpp"
#include "stratakit/quiver.hpp"
#include "stratakit/torus.hpp"

using namespace stratakit;

namespace {

Quiver kronecker_quiver(int arrows = 2) {
  std::vector<Arrow> as;
  for (int i = 0; i < arrows; ++i) as.push_back({0, 1, std::string(1, static_cast<char>('a' + i))});
  return Quiver({"1", "2"}, as);
}

QuiverInstance kronecker(IntVector d = {1, 1}, IntVector theta = {-1, 1}, int arrows = 2) {
  return QuiverInstance(kronecker_quiver(arrows), d, theta, {1, 1});
}

QuiverRep scalar_rep(const QuiverInstance& inst, std::vector<Complex> entries) {
  QuiverRep r = zero_rep(inst);
  for (std::size_t a = 0; a < entries.size(); ++a) r.maps[a](0, 0) = entries[a];
  return r;
}

RationalVector rv(std::initializer_list<std::int64_t> xs) {
  RationalVector out;
  for (auto x : xs) out.push_back(x);
  return out;
}

// KKT certificate of the closest point of cone(gens) - rho to the origin,
// checked directly from the definition.
void expect_moreau(const std::vector<RationalVector>& gens, const RationalVector& rho, const InnerProduct& ip,
                   const ConeProjection& p) {
  ASSERT_EQ(p.coefficients.size(), gens.size());
  RationalVector point(rho.size());
  for (std::size_t i = 0; i < gens.size(); ++i) {
    EXPECT_GE(p.coefficients[i], 0);
    for (std::size_t r = 0; r < rho.size(); ++r) point[r] += p.coefficients[i] * gens[i][r];
  }
  for (std::size_t r = 0; r < rho.size(); ++r) EXPECT_EQ(p.beta[r], point[r] - rho[r]);
  EXPECT_EQ(ip.dot(rho, p.beta), -ip.norm_sq(p.beta));
  EXPECT_EQ(ip.dot(point, p.beta), 0);
  for (const auto& g : gens) EXPECT_GE(ip.dot(g, p.beta), 0);
}

}  // namespace

// ---------------------------------------------------------------------------
// Rationals and inner products

TEST(Rational, StringRoundTrip) {
  for (auto s : {"0", "3", "-7/4", "123456789012/7"}) EXPECT_EQ(to_string(parse_rational(s)), s);
  EXPECT_EQ(to_string(make_rational(6, -4)), "-3/2");
  EXPECT_EQ(parse_rational("3/-6"), make_rational(-1, 2));
  EXPECT_THROW(parse_rational("1/0"), InputError);
  EXPECT_THROW(parse_rational("1.5"), InputError);
}

TEST(InnerProduct, RejectsIndefiniteGram) {
  EXPECT_THROW(InnerProduct({{1, 2}, {2, 1}}), InputError);
  EXPECT_THROW(InnerProduct({{1, 0}, {1, 1}}), InputError);
  EXPECT_THROW(InnerProduct::diagonal({1, 0}), InputError);
}

TEST(InnerProduct, RaiseInvertsGram) {
  InnerProduct ip({{2, 1}, {1, 3}});
  RationalVector chi = rv({4, -1});
  auto x = ip.raise(chi);
  // G x == chi
  EXPECT_EQ(2 * x[0] + x[1], chi[0]);
  EXPECT_EQ(x[0] + 3 * x[1], chi[1]);
  EXPECT_EQ(ip.dot(x, rv({1, 0})), 4);
}

// ---------------------------------------------------------------------------
// Cone projection

TEST(ConeProjection, EmptyConeGivesMinusRho) {
  auto ip = InnerProduct::identity(2);
  auto p = project_shifted_cone({}, rv({-1, 1}), ip);
  EXPECT_EQ(p.beta, rv({1, -1}));
  EXPECT_TRUE(p.active.empty());
  EXPECT_EQ(ip.norm_sq(p.beta), 2);
}

TEST(ConeProjection, RhoInsideCone) {
  auto ip = InnerProduct::identity(2);
  std::vector<RationalVector> g = {rv({-1, 1})};
  auto p = project_shifted_cone(g, rv({-1, 1}), ip);
  EXPECT_TRUE(is_zero(p.beta));
  expect_moreau(g, rv({-1, 1}), ip, p);
}

TEST(ConeProjection, RandomInstancesSatisfyKkt) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> e(-2, 2), dgen(1, 3), ng(1, 3), mg(0, 5);
  for (int t = 0; t < 150; ++t) {
    std::size_t n = static_cast<std::size_t>(ng(rng));
    IntVector diag(n);
    for (auto& x : diag) x = dgen(rng);
    auto ip = InnerProduct::diagonal(diag);
    std::vector<RationalVector> gens(static_cast<std::size_t>(mg(rng)), RationalVector(n));
    for (auto& g : gens)
      for (auto& x : g) x = e(rng);
    RationalVector rho(n);
    for (auto& x : rho) x = e(rng);
    expect_moreau(gens, rho, ip, project_shifted_cone(gens, rho, ip));
  }
}

TEST(ConeProjection, NonDiagonalGram) {
  InnerProduct ip({{2, 1}, {1, 2}});
  std::vector<RationalVector> g = {rv({1, 0}), rv({0, 1})};
  RationalVector rho = rv({-1, -1});
  auto p = project_shifted_cone(g, rho, ip);
  expect_moreau(g, rho, ip, p);
  EXPECT_EQ(p.beta, rv({1, 1}));
}

TEST(PrimitiveRay, ScalesToCoprimeIntegers) {
  EXPECT_EQ(primitive_integer_ray({make_rational(2, 3), make_rational(-4, 3)}), (IntVector{1, -2}));
  EXPECT_EQ(primitive_integer_ray({make_rational(0), make_rational(-5, 7)}), (IntVector{0, -1}));
  EXPECT_THROW(primitive_integer_ray(rv({0, 0})), DomainError);
}

TEST(Halfspace, KroneckerBoundaryIsSemistableNotStable) {
  auto ip = InnerProduct::identity(2);
  std::vector<RationalVector> w = {rv({-1, 1})};
  EXPECT_EQ(halfspace_containment(w, rv({-1, 1}), ip), Containment::kContained);
  EXPECT_EQ(halfspace_containment({}, rv({-1, 1}), ip), Containment::kNotContained);
  EXPECT_TRUE(positively_spans({rv({1, 0}), rv({-1, 0}), rv({0, 1}), rv({0, -1})}, ip));
  EXPECT_FALSE(positively_spans(w, ip));
  EXPECT_TRUE(dual_cone_contains(w, rv({1, 1}), ip));
  EXPECT_FALSE(dual_cone_contains(w, rv({1, -1}), ip));
}

// ---------------------------------------------------------------------------
// Torus actions

namespace {
TorusActionSpec kronecker_torus() {
  return TorusActionSpec(2, {{-1, 1}, {-1, 1}}, {-1, 1}, InnerProduct::identity(2), {"a", "b"});
}
}  // namespace

TEST(Torus, DeduplicatesWeights) {
  auto s = kronecker_torus();
  EXPECT_EQ(s.weights().size(), 1U);
  EXPECT_EQ(s.weight_of(1), 0U);
  EXPECT_EQ(s.coordinate_of("b"), 1U);
  EXPECT_THROW(s.coordinate_of("c"), InputError);
}

TEST(Torus, KroneckerOriginIsMaximallyUnstable) {
  auto s = kronecker_torus();
  auto idx = classify_point(TorusPoint(2), s);
  EXPECT_EQ(idx.beta, rv({1, -1}));
  ASSERT_TRUE(idx.lambda);
  EXPECT_EQ(*idx.lambda, (IntVector{1, -1}));
  EXPECT_EQ(idx.d_squared, 2);
  EXPECT_NEAR(idx.depth(), std::sqrt(2.0), 1e-15);
  EXPECT_EQ(hm_pairing(*idx.lambda, s), -2);
}

TEST(Torus, KroneckerNonzeroIsSemistableNotStable) {
  auto s = kronecker_torus();
  TorusPoint p{1.0, 0.0};
  EXPECT_TRUE(classify_point(p, s).semistable());
  EXPECT_EQ(stability_status(p, s), Stability::kSemistable);
  EXPECT_EQ(stability_status(TorusPoint(2), s), Stability::kUnstable);
  EXPECT_EQ(support_weights(SparseTorusPoint{{"b", 2.0}}, s), (WeightSet{0}));
}

TEST(Torus, KroneckerIndexSet) {
  auto idx = enumerate_indices(kronecker_torus());
  ASSERT_EQ(idx.size(), 2U);
  EXPECT_TRUE(is_zero(idx[0].beta));
  EXPECT_EQ(idx[0].witness, (WeightSet{0}));
  EXPECT_EQ(idx[1].beta, rv({1, -1}));
  EXPECT_EQ(idx[1].d_squared, 2);
}

TEST(Torus, TrivialCharacterHasSingleIndex) {
  TorusActionSpec s(2, {{1, 0}, {0, 1}, {-1, -1}}, {0, 0}, InnerProduct::identity(2));
  auto idx = enumerate_indices(s);
  ASSERT_EQ(idx.size(), 1U);
  EXPECT_TRUE(idx[0].semistable());
}

TEST(Torus, EnumerationBound) {
  std::vector<IntVector> w;
  for (int i = 0; i < 18; ++i) w.push_back({i - 9});
  TorusActionSpec s(1, w, {1}, InnerProduct::identity(1));
  EXPECT_THROW(enumerate_indices(s), ResourceError);
}

TEST(Torus, StronglyStableWhenWeightsSpan) {
  TorusActionSpec s(1, {{1}, {-1}}, {1}, InnerProduct::identity(1));
  EXPECT_EQ(stability_status(TorusPoint{1.0, 1.0}, s), Stability::kStronglyStable);
  EXPECT_EQ(stability_status(TorusPoint{1.0, 0.0}, s), Stability::kStable);
  EXPECT_EQ(stability_status(TorusPoint{0.0, 1.0}, s), Stability::kUnstable);
}

// Adapted 1-PS against a brute-force search over a box of cocharacters.
TEST(Torus, AdaptedOneParameterSubgroupMatchesBruteForce) {
  TorusActionSpec s(2, {{1, 0}, {0, 1}, {-1, 0}, {1, 1}}, {1, 0}, InnerProduct::diagonal({1, 2}));
  for (std::uint64_t mask = 0; mask < 16; ++mask) {
    WeightSet sup;
    for (std::size_t w = 0; w < 4; ++w)
      if (mask >> w & 1U) sup.push_back(w);
    auto idx = classify_support(sup, s);
    // minimize (rho, l) / |l| over l in C_v; compare squared ratios exactly
    std::optional<IntVector> best;
    std::int64_t bn = 0, bd = 1;
    for (std::int64_t x = -12; x <= 12; ++x)
      for (std::int64_t y = -12; y <= 12; ++y) {
        if (!x && !y) continue;
        bool in = true;
        for (auto w : sup) in = in && s.weights()[w][0] * x + s.weights()[w][1] * y >= 0;
        const std::int64_t r = x;  // rho = (1, 0)
        if (!in || r >= 0) continue;
        const std::int64_t n2 = r * r, d2 = x * x + 2 * y * y;
        if (!best || n2 * bd > bn * d2) best = IntVector{x, y}, bn = n2, bd = d2;
      }
    if (!best) {
      EXPECT_TRUE(idx.semistable()) << mask;
      continue;
    }
    ASSERT_TRUE(idx.lambda) << mask;
    auto g = std::gcd((*best)[0], (*best)[1]);
    EXPECT_EQ((IntVector{(*best)[0] / g, (*best)[1] / g}), *idx.lambda) << mask;
  }
}

// ---------------------------------------------------------------------------
// Quivers

TEST(Quiver, InstanceValidation) {
  EXPECT_THROW(QuiverInstance(kronecker_quiver(), {1, 1}, {1, 1}, {1, 1}), InputError);
  EXPECT_THROW(QuiverInstance(kronecker_quiver(), {1, 1}, {-1, 1}, {0, 1}), InputError);
  auto k = kronecker({2, 3}, {-3, 2});
  EXPECT_EQ(k.total_dim(), 5U);
  EXPECT_EQ(k.offset(1), 2U);
  EXPECT_FALSE(k.is_abelian());
}

TEST(Quiver, Slope) {
  auto k = kronecker();
  EXPECT_EQ(slope({1, 0}, k), -1);
  EXPECT_EQ(slope({1, 1}, k), 0);
  EXPECT_THROW(slope({0, 0}, k), DomainError);
}

TEST(Quiver, ActionAndShapes) {
  auto k = kronecker({2, 3}, {-3, 2});
  QuiverRep bad = zero_rep(k);
  bad.maps[1] = Matrix::Zero(2, 3);
  EXPECT_THROW(check_rep(bad, k), InputError);
  std::mt19937_64 rng(3);
  auto g = random_group_element(k, rng);
  auto r = zero_rep(k);
  r.maps[0].setOnes();
  auto u = act(g, r, k);
  EXPECT_LT((u.maps[0] - g[1] * r.maps[0] * g[0].inverse()).norm(), 1e-12);
}

TEST(Quiver, KroneckerSubrepresentations) {
  auto k = kronecker();
  auto subs = subrep_candidates_abelian(scalar_rep(k, {1.0, 0.0}), k);
  std::sort(subs.begin(), subs.end());
  EXPECT_EQ(subs, (std::vector<DimVector>{{0, 0}, {0, 1}, {1, 1}}));
}

TEST(Quiver, HarderNarasimhanExamples) {
  auto k = kronecker();
  auto t = hn_filtration_abelian(zero_rep(k), k);
  EXPECT_EQ(t.parts, (std::vector<DimVector>{{1, 0}, {0, 1}}));
  EXPECT_EQ(t.slopes, (std::vector<Rational>{-1, 1}));
  EXPECT_TRUE(is_semistable_abelian(scalar_rep(k, {0.0, 2.0}), k));

  QuiverInstance a2(Quiver({"1", "2"}, {{0, 1, "a"}}), {1, 1}, {1, -1}, {1, 1});
  EXPECT_EQ(hn_filtration_abelian(zero_rep(a2), a2).parts, (std::vector<DimVector>{{0, 1}, {1, 0}}));
}

namespace {

// Independent HN check: prefixes are subrepresentations, slopes increase
// strictly and every subquotient is semistable.
void expect_hn_properties(const QuiverRep& rep, const QuiverInstance& inst, const HNType& t) {
  const std::size_t n = inst.vertex_count();
  auto closed = [&](std::uint32_t s) {
    for (std::size_t a = 0; a < rep.maps.size(); ++a) {
      const auto& ar = inst.quiver().arrow(a);
      if (rep.maps[a].size() && rep.maps[a](0, 0) != Complex(0, 0) && (s >> ar.tail & 1U) && !(s >> ar.head & 1U))
        return false;
    }
    return true;
  };
  auto dims = [&](std::uint32_t s) {
    DimVector e(n, 0);
    for (std::size_t v = 0; v < n; ++v) e[v] = (s >> v & 1U) ? inst.d()[v] : 0;
    return e;
  };
  auto mask_of = [&](const DimVector& e) {
    std::uint32_t m = 0;
    for (std::size_t v = 0; v < n; ++v)
      if (e[v]) m |= 1U << v;
    return m;
  };
  std::uint32_t prev = 0;
  DimVector total(n, 0);
  for (std::size_t i = 0; i < t.parts.size(); ++i) {
    const std::uint32_t part = mask_of(t.parts[i]);
    ASSERT_NE(part, 0U);
    ASSERT_EQ(part & prev, 0U);
    const std::uint32_t cur = prev | part;
    EXPECT_TRUE(closed(cur));
    const Rational mu = slope(t.parts[i], inst);
    EXPECT_EQ(mu, t.slopes[i]);
    if (i) EXPECT_LT(t.slopes[i - 1], mu);
    for (std::uint32_t sub = part; sub; sub = (sub - 1) & part)
      if (closed(prev | sub)) EXPECT_GE(slope(dims(sub), inst), mu);
    for (std::size_t v = 0; v < n; ++v) total[v] += t.parts[i][v];
    prev = cur;
  }
  EXPECT_EQ(total, inst.d());
}

}  // namespace

TEST(Quiver, HarderNarasimhanPropertiesOnRandomAbelianReps) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> th(-3, 3), al(1, 3), coin(0, 1);
  for (int t = 0; t < 120; ++t) {
    const std::size_t n = 2 + static_cast<std::size_t>(t % 3);
    std::vector<Arrow> arrows;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && coin(rng)) arrows.push_back({i, j, "a" + std::to_string(arrows.size())});
    IntVector theta(n), alpha(n);
    std::int64_t s = 0;
    for (std::size_t v = 0; v + 1 < n; ++v) s += theta[v] = th(rng);
    theta[n - 1] = -s;
    for (auto& a : alpha) a = al(rng);
    QuiverInstance inst(Quiver([&] {
                          std::vector<std::string> vs;
                          for (std::size_t v = 0; v < n; ++v) vs.push_back(std::to_string(v));
                          return vs;
                        }(),
                               arrows),
                        IntVector(n, 1), theta, alpha);
    auto rep = zero_rep(inst);
    for (auto& m : rep.maps)
      if (coin(rng)) m(0, 0) = detail::gaussian(rng);
    expect_hn_properties(rep, inst, hn_filtration_abelian(rep, inst));
  }
}

TEST(Quiver, BetaOfKroneckerSimples) {
  auto k = kronecker();
  auto b = beta_of_type(make_hn_type({{1, 0}, {0, 1}}, k), k);
  EXPECT_EQ(b.flat_beta(), rv({1, -1}));
  EXPECT_EQ(b.flat_lambda(), (IntVector{1, -1}));
  EXPECT_EQ(b.scale, 1);
  EXPECT_EQ(b.norm_sq, 2);
}

TEST(Quiver, HNTypeInvariants) {
  auto k3 = kronecker({2, 2}, {-1, 1}, 3);
  EXPECT_THROW(make_hn_type({{1, 1}, {1, 1}}, k3), DomainError);
  EXPECT_THROW(make_hn_type({{0, 1}, {2, 1}}, k3), DomainError);
  EXPECT_NO_THROW(make_hn_type({{2, 1}, {0, 1}}, k3));
}

TEST(Quiver, RhoLambdaKronecker) {
  auto k = kronecker();
  EXPECT_EQ(rho_lambda({1, -1}, k), rv({0, 0}));
  EXPECT_THROW(rho_lambda({0, 0}, k), DomainError);
  // orthogonal to lambda under the natural pairing
  auto k23 = kronecker({2, 3}, {-3, 2});
  IntVector l{3, 1, 0, -2, 5};
  EXPECT_EQ(character_pairing(rho_lambda(l, k23), l), 0);
}

TEST(Quiver, KroneckerBlockStructure) {
  auto k = kronecker();
  BlockStructure bs(beta_of_type(make_hn_type({{1, 0}, {0, 1}}, k), k), k);
  EXPECT_EQ(bs.entry_weight(0, 0, 0), -2);
  EXPECT_EQ(bs.entry_weight(1, 0, 0), -2);
  EXPECT_TRUE(bs.in_Z(zero_rep(k)));
  EXPECT_FALSE(bs.in_Y(scalar_rep(k, {1.0, 0.0})));
  EXPECT_THROW(bs.p_tau(scalar_rep(k, {1.0, 0.0})), InputError);
}

TEST(Quiver, BlockPatternsMatchWeightSigns) {
  auto k = kronecker({3, 3}, {-1, 1}, 3);
  for (const auto& c : enumerate_hn_candidates(k)) {
    auto bw = beta_of_type(c.tau, k);
    BlockStructure bs(bw, k);
    auto lam = bw.flat_lambda();
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
          const auto w = lam[k.offset(1) + i] - lam[k.offset(0) + j];
          EXPECT_EQ(w, bs.entry_weight(a, i, j));
          EXPECT_EQ(w == 0, bs.head_block(a, i) == bs.tail_block(a, j));
          EXPECT_EQ(w >= 0, bs.head_block(a, i) <= bs.tail_block(a, j));
        }
  }
}

TEST(Quiver, ParabolicMembership) {
  auto k = kronecker({2, 2}, {-1, 1});
  auto bw = beta_of_type(make_hn_type({{1, 0}, {1, 2}}, k), k);  // vertex 1 blocks: beta 1, -1/3
  auto g = identity_element(k);
  EXPECT_TRUE(parabolic_membership(g, bw, k));
  g[0](0, 1) = 2.0;  // beta_0 > beta_1: allowed
  EXPECT_TRUE(parabolic_membership(g, bw, k));
  g[0](1, 0) = 1.0;  // beta_1 < beta_0: forbidden
  EXPECT_FALSE(parabolic_membership(g, bw, k));
}

TEST(Quiver, CandidateTypesAreSortedAndDistinct) {
  auto k = kronecker({3, 3}, {-1, 1}, 3);
  auto c = enumerate_hn_candidates(k);
  EXPECT_EQ(c.size(), 13U);
  EXPECT_TRUE(is_zero(c.front().beta));
  for (std::size_t i = 1; i < c.size(); ++i) {
    EXPECT_LE(c[i - 1].norm_sq, c[i].norm_sq);
    EXPECT_NE(c[i - 1].beta, c[i].beta);
    EXPECT_EQ(beta_of_type(c[i].tau, k).norm_sq, c[i].norm_sq);
  }
}

TEST(Generator, KroneckerTypes) {
  auto k = kronecker();
  auto g = generate_hn_instance(make_hn_type({{1, 1}}, k), k, 4);
  EXPECT_TRUE(g.certified);
  EXPECT_TRUE(is_semistable_abelian(g.rep, k));
  auto gy = act(g.g, g.y, k);
  for (std::size_t a = 0; a < 2; ++a) EXPECT_LT((g.rep.maps[a] - gy.maps[a]).norm(), 1e-12);

  auto z = generate_hn_instance(make_hn_type({{1, 0}, {0, 1}}, k), k, 4);
  EXPECT_EQ(rep_norm_sq(z.rep), 0);
  EXPECT_EQ(hn_filtration_abelian(z.rep, k).parts, (std::vector<DimVector>{{1, 0}, {0, 1}}));
}

TEST(Generator, RecoversTypeOnAbelianQuiver) {
  QuiverInstance tri(Quiver({"1", "2", "3"}, {{0, 1, "a"}, {0, 1, "b"}, {1, 2, "c"}, {0, 2, "e"}}), {1, 1, 1},
                     {-3, 1, 2}, {1, 1, 2});
  SemistableRegistry reg(tri);
  for (const auto& c : enumerate_hn_candidates(tri))
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      auto g = generate_hn_instance(c.tau, tri, seed, &reg);
      BlockStructure bs(g.beta, tri);
      EXPECT_TRUE(bs.in_Y(g.y));
      EXPECT_EQ(hn_filtration_abelian(g.rep, tri), c.tau);
    }
}

TEST(Generator, NoBlockForUnrealizableDimension) {
  auto k = kronecker({1, 2}, {-2, 1});
  // Semistable (1,2) representations exist, but they are neither abelian nor
  // sums of equal-slope abelian blocks, so the registry cannot supply one.
  EXPECT_THROW(generate_hn_instance(make_hn_type({{1, 2}}, k), k, 1), GenerationError);
}

// ---------------------------------------------------------------------------
// IO

TEST(Io, ShortestDoubleRoundTrip) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng) * std::pow(10.0, i % 20 - 10);
    EXPECT_EQ(parse_double(format_double(x), "x"), x);
  }
  EXPECT_THROW(parse_double("1.5x", "p"), InputError);
}

TEST(Io, QuiverRoundTrip) {
  auto k = kronecker({2, 3}, {-3, 2}, 3);
  std::mt19937_64 rng(2);
  QuiverRep r = zero_rep(k);
  for (auto& m : r.maps)
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = detail::gaussian(rng);
  json doc = to_json(k);
  doc["reps"] = {{"r", to_json(r, k)}};
  auto back = std::get<QuiverFile>(parse_instance(json::parse(doc.dump())));
  EXPECT_EQ(back.inst.d(), k.d());
  EXPECT_EQ(back.inst.theta(), k.theta());
  for (std::size_t a = 0; a < 3; ++a) EXPECT_EQ(back.reps.at("r").maps[a], r.maps[a]);
}

TEST(Io, RationalsAreStrings) {
  TorusActionSpec s(2, {{1, 0}, {0, 1}, {-1, 0}, {1, 1}}, {1, 0}, InnerProduct::diagonal({1, 2}));
  for (const auto& idx : enumerate_indices(s)) {
    json j = to_json(idx, s);
    RationalVector back;
    for (const auto& x : j.at("beta")) back.push_back(parse_rational(x.get<std::string>()));
    EXPECT_EQ(back, idx.beta);
  }
}

TEST(Io, SchemaErrorsCarryPaths) {
  auto expect_path = [](const json& j, const std::string& path) {
    try {
      parse_instance(j);
      ADD_FAILURE() << "no error for " << path;
    } catch (const InputError& e) {
      EXPECT_EQ(e.path(), path) << e.what();
      EXPECT_EQ(e.exit_code(), ExitCode::kSchema);
    }
  };
  json k = {{"kind", "quiver"},
            {"vertices", {"1", "2"}},
            {"arrows", {{{"tail", "1"}, {"head", "2"}, {"name", "a"}}}},
            {"d", {1, 1}},
            {"theta", {1, -1}}};
  json bad = k;
  bad["reps"] = {{"r", {{"a", {{1, 2}}}}}};
  expect_path(bad, "reps.r.a[0]");
  bad = k;
  bad["arrows"][0]["head"] = "3";
  expect_path(bad, "arrows[0].head");
  bad = k;
  bad["kind"] = "cone";
  expect_path(bad, "kind");
  json t = {{"kind", "torus"}, {"n", 1}, {"weights", {{1}}}, {"rho", {1}}, {"points", {{"p", {{"zz", 1}}}}}};
  expect_path(t, "points.p.zz");
}

TEST(Io, TomlMatchesJson) {
  const std::string dir = STRATAKIT_DATA_DIR;
  auto toml_file = std::get<TorusFile>(parse_instance(load_document(dir + "/plane.toml")));
  EXPECT_EQ(toml_file.spec.coordinate_count(), 4U);
  EXPECT_EQ(toml_file.spec.ip().gram()[1][1], 2);
  EXPECT_EQ(toml_file.points.at("xy").at("y"), Complex(0.5, 0));
  auto kron = std::get<QuiverFile>(parse_instance(load_document(dir + "/kronecker.json")));
  EXPECT_EQ(kron.reps.at("generic").maps[1](0, 0), Complex(-0.3, 1.1));
  EXPECT_THROW(load_document(dir + "/missing.json"), InputError);
}
