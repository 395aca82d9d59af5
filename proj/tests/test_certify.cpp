#include <gtest/gtest.h>

#include <complex>

#include "reflekt/certify.hpp"
#include "test_support.hpp"

using namespace reflekt;
using reflekt::testing::qm;
using reflekt::testing::spec;

namespace {

using cplx = std::complex<double>;

std::vector<cplx> numeric_f(const ReflectionMapSpec& s, const std::vector<CycloNum>& x) {
  std::vector<cplx> out;
  for (std::size_t i = 0; i < s.p(); ++i) {
    cplx acc = 0;
    for (std::size_t j = 0; j < s.n(); ++j) acc += s.A(i, j).to_double() * x[j].numeric();
    out.push_back(std::pow(acc, static_cast<double>(s.group.modulus(i))));
  }
  return out;
}

double dist(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

/// Floating-point re-check of a NOT witness, independent of the exact arithmetic.
void expect_sound(const ReflectionMapSpec& s, const Verdict& v) {
  ASSERT_EQ(v.status, Status::CertifiedNotAFinite);
  ASSERT_TRUE(v.witness.has_value());
  const auto& w = *v.witness;
  if (w.kind == "normal_crossings") {
    EXPECT_FALSE(w.tuple.empty());
    return;
  }
  double norm = 0;
  for (const auto& c : w.x0) norm = std::max(norm, std::abs(c.numeric()));
  ASSERT_GT(norm, 1e-9);
  if (w.kind == "singular_family") {
    // A x0 fixed by g: coordinates moved by g vanish
    for (std::size_t i = 0; i < s.p(); ++i) {
      if (w.g[i] == 0) continue;
      cplx acc = 0;
      for (std::size_t j = 0; j < s.n(); ++j) acc += s.A(i, j).to_double() * w.x0[j].numeric();
      EXPECT_LT(std::abs(acc), 1e-9);
    }
    return;
  }
  ASSERT_FALSE(w.partners.empty());
  const auto fx = numeric_f(s, w.x0);
  for (const auto& q : w.partners) {
    EXPECT_LT(dist(numeric_f(s, q), fx), 1e-6 * (1 + norm));
    double sep = 0;
    for (std::size_t j = 0; j < s.n(); ++j) sep = std::max(sep, std::abs(q[j].numeric() - w.x0[j].numeric()));
    EXPECT_GT(sep, 1e-9);
  }
}

std::size_t row_space_rank(const Matrix<CycloNum>& a, const Matrix<CycloNum>& b) {
  Matrix<CycloNum> m = a;
  for (std::size_t i = 0; i < b.rows(); ++i) m.append_row(b.row(i));
  return rank(m);
}

}  // namespace

TEST(Certify, Classify) {
  EXPECT_EQ(classify(2, 0, 0), BranchClass::Empty);
  EXPECT_EQ(classify(1, 0, 1), BranchClass::StrictLine);
  EXPECT_EQ(classify(2, 0, 1), BranchClass::Fat);
  EXPECT_EQ(classify(1, 1, 1), BranchClass::SingularCurve);
  EXPECT_EQ(classify(0, 0, 1), BranchClass::OriginOnly);
  EXPECT_EQ(to_string(Status::CertifiedAFinite), "CERTIFIED_AFINITE");
}

TEST(Certify, CuspBranch) {
  RefMap rm(spec({2, 3}, {{1}, {1}}));
  auto b = branch_matrices(rm, {1, 1});
  ASSERT_EQ(b.M.rows(), 1u);
  ASSERT_EQ(b.M.cols(), 1u);
  // N = [1, -1] (up to sign), D_g = diag(-1, zeta_3): M = -1 - zeta_3 up to sign
  const auto f = b.M(0, 0).field();
  const auto z3 = CycloNum::root_of_unity(f, 3, 1);
  const auto expect = -CycloNum(f, Rational(1)) - z3;
  EXPECT_TRUE(b.M(0, 0) == expect || b.M(0, 0) == -expect);
  EXPECT_EQ(b.rank_M, 1u);
  EXPECT_TRUE(b.V.is_zero());
  // no row is fixed by g, so S_g is empty and its kernel is everything
  EXPECT_EQ(b.kerS.dim(), 1u);
  EXPECT_TRUE(branch_in_origin_fiber(b));
  EXPECT_THROW(branch_matrices(rm, {0, 0}), std::invalid_argument);
}

TEST(Certify, DegenerateElementGivesZeroBranchMatrix) {
  RefMap rm(spec({1, 1, 3}, {{1, 0}, {0, 1}, {0, 0}}));
  auto b = branch_matrices(rm, {0, 0, 1});
  for (std::size_t i = 0; i < b.M.rows(); ++i)
    for (std::size_t j = 0; j < b.M.cols(); ++j) EXPECT_TRUE(b.M(i, j).is_zero());
  EXPECT_EQ(b.rank_M, 0u);
}

TEST(Certify, GraphBranchMatrixMatchesDividedDifferences) {
  // A = [I; H], xi on the first n coordinates, eta on the rest: M_g ~ (H_ij (eta_i - xi_j))
  struct Case {
    std::vector<unsigned long> m;
    std::vector<std::vector<long>> H;
  };
  for (const auto& c : std::vector<Case>{{{2, 3, 5, 7}, {{1, 1}, {1, -1}}},
                                         {{3, 5, 7}, {{1, 1}}},
                                         {{2, 2, 3}, {{1, 2}}},
                                         {{2, 3, 2, 3}, {{1, 0}, {2, 1}}}}) {
    auto s = ReflectionMapSpec::graph(c.m, qm(c.H));
    RefMap rm(s);
    const auto& G = s.group;
    const std::size_t n = s.n();
    for (std::uint64_t k = 1; k < G.order(); ++k) {
      const auto a = G.element(k);
      auto b = branch_matrices(rm, a);
      const auto f = CycloField::get(G.conductor());
      auto root = [&](std::size_t i) { return CycloNum::root_of_unity(f, G.modulus(i), static_cast<long>(a[i])); };
      Matrix<CycloNum> D(s.p() - n, n, CycloNum(f));
      for (std::size_t i = 0; i < s.p() - n; ++i)
        for (std::size_t j = 0; j < n; ++j) D(i, j) = CycloNum(f, Rational(c.H[i][j])) * (root(n + i) - root(j));
      Matrix<CycloNum> M(b.M.rows(), n, CycloNum(f));
      for (std::size_t i = 0; i < M.rows(); ++i)
        for (std::size_t j = 0; j < n; ++j) M(i, j) = b.M(i, j).lift(f);
      const auto r = rank(D);
      EXPECT_EQ(rank(M), r) << to_string(a);
      EXPECT_EQ(row_space_rank(M, D), r) << to_string(a);
    }
  }
}

TEST(Certify, VInsideKerMEverywhere) {
  std::mt19937 rng(11);
  for (int t = 0; t < 40; ++t) {
    auto s = reflekt::testing::random_spec(rng, 2, 4, 3, 3);
    RefMap rm(s);
    for (std::uint64_t k = 1; k < s.group.order(); ++k) {
      auto b = branch_matrices(rm, s.group.element(k));
      EXPECT_TRUE(lift(b.V, b.kerM.basis().zero()).is_subspace_of(b.kerM));
      auto sm = summarize(rm, b.g);
      EXPECT_EQ(sm.rank_M, b.rank_M);
      EXPECT_EQ(sm.cls, b.cls);
    }
  }
}

TEST(Certify, OriginFiberRule) {
  RefMap bad(ReflectionMapSpec::graph({2, 2, 2, 2}, qm({{1, 1}, {1, -1}})));
  auto b = branch_matrices(bad, {1, 1, 1, 1});
  EXPECT_EQ(b.rank_M, 0u);
  EXPECT_TRUE(b.V.is_zero());
  EXPECT_EQ(b.kerM.dim(), 2u);
  EXPECT_FALSE(branch_in_origin_fiber(b));
  // ker S_g = 0 means the branch is empty
  RefMap rm(ReflectionMapSpec::graph({2, 3, 5, 7}, qm({{1, 1}, {1, -1}})));
  for (std::uint64_t k = 1; k < rm.group().order(); ++k) {
    auto br = branch_matrices(rm, rm.group().element(k));
    if (br.kerS.is_zero()) EXPECT_TRUE(branch_in_origin_fiber(br));
  }
}

TEST(Certify, Examples) {
  {
    auto s = ReflectionMapSpec::graph({2, 3, 5, 7}, qm({{1, 1}, {1, -1}}));
    auto v = certify_afinite(RefMap(s));
    EXPECT_EQ(v.status, Status::CertifiedAFinite);
    EXPECT_EQ(v.branches.size(), 209u);
  }
  EXPECT_EQ(certify_afinite(RefMap(ReflectionMapSpec::graph({3, 5, 7}, qm({{1, 1}})))).status,
            Status::CertifiedAFinite);
  EXPECT_EQ(certify_afinite(RefMap(ReflectionMapSpec::graph({2, 3, 5}, qm({{1, 1}})))).status,
            Status::CertifiedAFinite);
  {
    auto s = spec({2, 2, 2}, {{1, 0}, {0, 1}, {1, 1}});
    auto v = certify_afinite(RefMap(s));
    expect_sound(s, v);
    EXPECT_EQ(v.witness->g, (GroupElement{1, 1, 1}));
    EXPECT_EQ(v.witness->family_dim, 2u);
  }
  {
    auto s = ReflectionMapSpec::graph({2, 2, 2, 2}, qm({{1, 1}, {1, -1}}));
    auto v = certify_afinite(RefMap(s));
    expect_sound(s, v);
    EXPECT_EQ(v.witness->g, (GroupElement{1, 1, 1, 1}));
  }
  auto one = certify_afinite(RefMap(spec({5}, {{1}})));
  EXPECT_EQ(one.status, Status::CertifiedAFinite);
  EXPECT_EQ(one.reason, "one_variable_germ");
  EXPECT_EQ(certify_afinite(RefMap(spec({2, 3}, {{1}, {1}}))).status, Status::CertifiedAFinite);
}

TEST(Certify, LowCodimension) {
  // corank 2 into p < 2n - 1
  auto s = spec({2, 2, 2, 1}, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}});
  ASSERT_EQ(corank_at(s), 2u);
  auto v = certify_afinite(RefMap(s));
  EXPECT_EQ(v.status, Status::CertifiedNotAFinite);
  EXPECT_EQ(v.route, "theorem");
  // fold: corank 1, p = n + 1 < 2n - 1 with n = 3
  auto fold = spec({2, 1, 1, 1}, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, 1, 1}});
  ASSERT_EQ(corank_at(fold), 1u);
  EXPECT_EQ(certify_afinite(RefMap(fold)).status, Status::Inconclusive);
}

TEST(Certify, PairwiseDisjointness) {
  RefMap rm(ReflectionMapSpec::graph({3, 5, 7}, qm({{1, 1}})));
  std::vector<GroupElement> lines;
  for (std::uint64_t k = 1; k < rm.group().order(); ++k) {
    const auto s = summarize(rm, rm.group().element(k));
    if (s.cls == BranchClass::StrictLine) lines.push_back(s.g);
  }
  // 104 nontrivial elements; the 2 + 4 + 6 with two trivial coordinates have ker S_g = 0
  EXPECT_EQ(lines.size(), 104u - 12u);
  for (std::size_t i = 0; i < lines.size(); ++i)
    for (std::size_t j = i + 1; j < lines.size(); ++j)
      EXPECT_TRUE(pairwise_disjointness_check(rm, lines[i], lines[j]).ok);

  RefMap dup(spec({2, 2, 5}, {{1, 0}, {0, 1}, {1, 1}}));
  EXPECT_TRUE(pairwise_disjointness_check(dup, {1, 0, 0}, {0, 1, 0}).ok);

  RefMap shared(spec({2, 2, 3}, {{1, 0}, {0, 1}, {1, 1}}));
  auto r = pairwise_disjointness_check(shared, {1, 1, 0}, {1, 1, 1});
  ASSERT_FALSE(r.ok);
  EXPECT_EQ(r.witness->kind, "shared_line");
  EXPECT_TRUE(verify_witness(shared, *r.witness));
}

TEST(Certify, TriplePoints) {
  // f = (x, y^3, (x + y)^3): the line x = 0 is covered three times
  auto s = spec({1, 3, 3}, {{1, 0}, {0, 1}, {1, 1}});
  RefMap rm(s);
  const auto f = CycloField::get(1);
  std::vector<CycloNum> x0{CycloNum(f, Rational(0)), CycloNum(f, Rational(1))};
  auto r = triple_point_check(rm, {0, 1, 1}, {0, 2, 2}, x0);
  ASSERT_FALSE(r.ok);
  EXPECT_EQ(r.witness->kind, "triple_line");
  EXPECT_EQ(r.witness->partners.size(), 2u);
  EXPECT_TRUE(verify_witness(rm, *r.witness));
  auto v = certify_afinite(rm);
  expect_sound(s, v);
  EXPECT_EQ(v.witness->kind, "triple_line");
  // x0 in V_g is filtered out
  std::vector<CycloNum> y0{CycloNum(f, Rational(1)), CycloNum(f, Rational(-1))};
  EXPECT_TRUE(triple_point_check(rm, {0, 0, 1}, {0, 0, 2}, y0).ok);
  // no shared lines at all in the odd coprime case
  EXPECT_EQ(certify_afinite(RefMap(ReflectionMapSpec::graph({3, 5, 7}, qm({{1, 1}})))).reason,
            "branches_are_disjoint_lines");
}

TEST(Certify, NormalCrossingsRoute) {
  auto good = RefMap(ReflectionMapSpec::graph({2, 3, 5, 7}, qm({{1, 1}, {1, -1}})));
  auto v = certify_via_normal_crossings(good);
  EXPECT_EQ(v.status, Status::CertifiedAFinite);
  auto bad = RefMap(ReflectionMapSpec::graph({2, 2, 2, 2}, qm({{1, 1}, {1, -1}})));
  EXPECT_EQ(certify_via_normal_crossings(bad).status, Status::CertifiedNotAFinite);
  EXPECT_EQ(certify_via_normal_crossings(RefMap(spec({1, 1}, {{1}, {2}}))).status, Status::CertifiedAFinite);
  EXPECT_THROW(certify_via_normal_crossings(RefMap(spec({2, 3, 5}, {{1, 0}, {0, 1}, {1, 1}}))),
               std::invalid_argument);
}

TEST(Certify, RouteAgreement) {
  std::mt19937 rng(2024);
  int done = 0, nots = 0;
  while (done < 100) {
    std::uniform_int_distribution<std::size_t> nd(1, 2);
    const std::size_t n = nd(rng), p = 2 * n;
    std::uniform_int_distribution<unsigned long> md(1, p == 2 ? 6 : 4);
    std::vector<unsigned long> m(p);
    for (auto& x : m) x = md(rng);
    auto A = reflekt::testing::random_matrix(p, n, 2, rng);
    if (rank(A) < n) continue;
    RefMap rm(ReflectionMapSpec(GroupSpec(m), A));
    auto a = certify_afinite(rm);
    auto b = certify_via_normal_crossings(rm);
    EXPECT_EQ(a.status, b.status) << rm.spec().group.order();
    if (a.status == Status::CertifiedNotAFinite) {
      ++nots;
      expect_sound(rm.spec(), a);
    }
    ++done;
  }
  EXPECT_GT(nots, 10);
  EXPECT_LT(nots, 100);
}

TEST(Certify, WitnessSoundnessRandom) {
  std::mt19937 rng(77);
  int nots = 0;
  for (int t = 0; t < 120; ++t) {
    auto s = reflekt::testing::random_spec(rng, 2, 5, 3, 3);
    RefMap rm(s);
    auto v = certify_afinite(rm);
    if (v.status != Status::CertifiedNotAFinite) continue;
    ++nots;
    if (v.witness) expect_sound(s, v);
  }
  EXPECT_GT(nots, 10);
}

TEST(Certify, DeterministicAcrossWorkers) {
  for (auto s : {ReflectionMapSpec::graph({2, 3, 5, 7}, qm({{1, 1}, {1, -1}})),
                 ReflectionMapSpec::graph({2, 2, 2, 2}, qm({{1, 1}, {1, -1}})),
                 spec({1, 3, 3}, {{1, 0}, {0, 1}, {1, 1}}), spec({2, 2, 3}, {{1, 0}, {0, 1}, {1, 1}})}) {
    RefMap rm(s);
    RunOptions one, four;
    one.jobs = 1;
    four.jobs = 4;
    auto a = certify_afinite(rm, one), b = certify_afinite(rm, four);
    EXPECT_EQ(a.status, b.status);
    EXPECT_EQ(a.reason, b.reason);
    ASSERT_EQ(a.witness.has_value(), b.witness.has_value());
    if (a.witness) {
      EXPECT_EQ(a.witness->g, b.witness->g);
      EXPECT_EQ(a.witness->x0, b.witness->x0);
    }
    ASSERT_EQ(a.branches.size(), b.branches.size());
    for (std::size_t i = 0; i < a.branches.size(); ++i) EXPECT_EQ(a.branches[i].cls, b.branches[i].cls);
    RunOptions early = four;
    early.early_exit = true;
    EXPECT_EQ(certify_afinite(rm, early).status, a.status);
  }
}

TEST(Certify, BudgetIsEnforced) {
  RunOptions tiny;
  tiny.budget = 10;
  EXPECT_THROW(certify_afinite(RefMap(ReflectionMapSpec::graph({2, 3, 5, 7}, qm({{1, 1}, {1, -1}}))), tiny),
               BudgetExceeded);
}

TEST(Certify, StabilityScreen) {
  EXPECT_TRUE(stability_screen(RefMap(spec({2, 1}, {{1, 0}, {0, 1}}))));
  EXPECT_FALSE(stability_screen(RefMap(spec({2, 2}, {{1, 0}, {0, 1}}))));
  EXPECT_FALSE(stability_screen(RefMap(spec({3, 1}, {{1, 0}, {0, 1}}))));
}
