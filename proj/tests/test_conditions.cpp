#include <gtest/gtest.h>

#include <random>

#include "reflekt/certify.hpp"
#include "reflekt/conditions.hpp"
#include "test_support.hpp"

using namespace reflekt;
using reflekt::testing::qm;

namespace {

/// det(H_ij(eta_i - xi_j)) in floating point, by Laplace-free Gaussian elimination with pivoting.
std::complex<double> numeric_det(const Matrix<Rational>& H, const std::vector<unsigned long>& m,
                                 const std::vector<unsigned long>& xi, const std::vector<unsigned long>& eta) {
  const std::size_t n = H.cols();
  auto root = [](unsigned long mod, unsigned long a) { return std::polar(1.0, 2 * M_PI * double(a) / double(mod)); };
  std::vector<std::vector<std::complex<double>>> a(n, std::vector<std::complex<double>>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i][j] = H(i, j).to_double() * (root(m[n + i], eta[i]) - root(m[j], xi[j]));
  std::complex<double> det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (std::abs(a[piv][c]) < 1e-12) return 0;
    if (piv != c) {
      std::swap(a[piv], a[c]);
      det = -det;
    }
    det *= a[c][c];
    for (std::size_t r = c + 1; r < n; ++r) {
      const auto f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
    }
  }
  return det;
}

Matrix<Rational> random_c1(std::mt19937& rng, std::size_t r, std::size_t c) {
  while (true) {
    auto H = reflekt::testing::random_matrix(r, c, 4, rng);
    if (has_c1(H)) return H;
  }
}

}  // namespace

TEST(Conditions, C2Examples) {
  auto H = qm({{1, 1}, {1, -1}});
  auto ok = check_C2(H, {2, 3, 5, 7});
  EXPECT_TRUE(ok.holds);
  EXPECT_EQ(ok.tuples, 210u);
  auto bad = check_C2(H, {2, 2, 2, 2});
  ASSERT_FALSE(bad.holds);
  // first violation in enumeration order: xi = (1, -1), eta = (-1, -1)
  EXPECT_EQ(bad.violation->xi, (std::vector<unsigned long>{0, 1}));
  EXPECT_EQ(bad.violation->eta, (std::vector<unsigned long>{1, 1}));
  EXPECT_LT(std::abs(numeric_det(H, {2, 2, 2, 2}, bad.violation->xi, bad.violation->eta)), 1e-12);
  // all roots -1: M = 0
  EXPECT_LT(std::abs(numeric_det(H, {2, 2, 2, 2}, {1, 1}, {1, 1})), 1e-12);
  EXPECT_THROW(check_C2(H, {2, 3, 5}), std::invalid_argument);
  EXPECT_THROW(check_C2(qm({{1, 1}}), {2, 3, 5}), std::invalid_argument);
}

TEST(Conditions, C3C4Examples) {
  auto H = qm({{1, 1}});
  auto c3 = check_C3(H, {3, 5, 7});
  EXPECT_TRUE(c3.holds);
  EXPECT_EQ(c3.tuples, 105u);
  auto c4 = check_C4(H, {3, 5, 7});
  EXPECT_TRUE(c4.holds);
  EXPECT_EQ(c4.divergences, 0u);
  // xi = (1, 1), xi' = (1, 1): the first column survives, eta != eta' needed
  auto c4bad = check_C4(qm({{1, 0}}), {1, 1, 3});
  EXPECT_TRUE(c4bad.holds);
  auto c4fail = check_C4(qm({{1, 1}}), {2, 2, 2});
  ASSERT_FALSE(c4fail.holds);
  EXPECT_EQ(c4fail.divergences, 0u);
}

TEST(Conditions, C3C4DoNotSeeTriplePoints) {
  // f = (x, y^3, (x + y)^3): C3 and C4 hold, but x = 0 is a line of strict triple points,
  // which only the explicit triple check reports.
  auto H = qm({{1, 1}});
  EXPECT_TRUE(check_C3(H, {1, 3, 3}).holds);
  EXPECT_TRUE(check_C4(H, {1, 3, 3}).holds);
  auto v = certify_afinite(RefMap(ReflectionMapSpec::graph({1, 3, 3}, H)));
  EXPECT_EQ(v.status, Status::CertifiedNotAFinite);
  EXPECT_EQ(v.witness->kind, "triple_line");
}

TEST(Conditions, C4AgreesWithPairEnumeration) {
  // literal definition over all (xi, eta, xi', eta') for tiny moduli
  std::mt19937 rng(5);
  int seen[2] = {0, 0};
  for (int t = 0; t < 12; ++t) {
    auto H = random_c1(rng, 1, 2);
    std::uniform_int_distribution<unsigned long> md(1, 4);
    std::vector<unsigned long> m{md(rng), md(rng), md(rng)};
    bool brute = true;
    const unsigned long N = std::lcm(std::lcm(m[0], m[1]), m[2]);
    for (unsigned long a0 = 0; a0 < m[0]; ++a0)
      for (unsigned long a1 = 0; a1 < m[1]; ++a1)
        for (unsigned long e = 0; e < m[2]; ++e)
          for (unsigned long b0 = 0; b0 < m[0]; ++b0)
            for (unsigned long b1 = 0; b1 < m[1]; ++b1)
              for (unsigned long f = 0; f < m[2]; ++f) {
                if (a0 == b0 && a1 == b1 && e == f) continue;
                const ExactRing R(N);
                auto z = [&](unsigned long mod, unsigned long a) { return R.zeta(N / mod * a); };
                Matrix<CycloNum> M(4, 2, R.zero());
                M(0, 0) = z(m[0], a0) - z(m[0], b0);
                M(1, 1) = z(m[1], a1) - z(m[1], b1);
                M(2, 0) = R.from(H(0, 0)) * (z(m[2], e) - z(m[0], a0));
                M(2, 1) = R.from(H(0, 1)) * (z(m[2], e) - z(m[1], a1));
                M(3, 0) = R.from(H(0, 0)) * (z(m[2], f) - z(m[0], b0));
                M(3, 1) = R.from(H(0, 1)) * (z(m[2], f) - z(m[1], b1));
                if (rank(M) == 2) continue;
                const int cnt = (e == 0 || f == 0) + (a0 == 0 || b0 == 0) + (a1 == 0 || b1 == 0);
                if (cnt < 2) brute = false;
              }
    EXPECT_EQ(check_C4(H, m).holds, brute) << m[0] << m[1] << m[2];
    ++seen[brute];
  }
  EXPECT_GT(seen[0], 0);
  EXPECT_GT(seen[1], 0);
}

TEST(Conditions, C2AgreesWithFloatingPoint) {
  std::mt19937 rng(8);
  int seen[2] = {0, 0};
  for (int t = 0; t < 10; ++t) {
    auto H = random_c1(rng, 2, 2);
    std::uniform_int_distribution<unsigned long> md(1, 4);
    std::vector<unsigned long> m{md(rng), md(rng), md(rng), md(rng)};
    bool brute = true;
    std::vector<unsigned long> xi(2, 0), eta(2, 0);
    for (xi[0] = 0; xi[0] < m[0]; ++xi[0])
      for (xi[1] = 0; xi[1] < m[1]; ++xi[1])
        for (eta[0] = 0; eta[0] < m[2]; ++eta[0])
          for (eta[1] = 0; eta[1] < m[3]; ++eta[1]) {
            const int ones = (xi[0] == 0) + (xi[1] == 0) + (eta[0] == 0) + (eta[1] == 0);
            if (std::abs(numeric_det(H, m, xi, eta)) < 1e-9 && ones < 2) brute = false;
          }
    EXPECT_EQ(check_C2(H, m).holds, brute);
    ++seen[brute];
  }
  EXPECT_GT(seen[0], 0);
  EXPECT_GT(seen[1], 0);
}

TEST(Conditions, CoprimeLemmas) {
  auto r = verify_coprime_lemmas(qm({{1, 1}, {1, -1}}), {2, 3, 5, 7});
  EXPECT_TRUE(r.all_pass());
  auto r2 = verify_coprime_lemmas(qm({{1, 2}, {3, 1}}), {3, 5, 7, 11});
  EXPECT_TRUE(r2.all_pass());
  EXPECT_EQ(r2.c2.tuples, 1155u);
  EXPECT_TRUE(verify_coprime_lemmas(qm({{1, 1}}), {3, 5, 7}).all_pass());
  EXPECT_TRUE(verify_coprime_lemmas(qm({{1, 1}, {1, -1}}), {1, 1, 1, 1}).all_pass());
  try {
    verify_coprime_lemmas(qm({{1, 0}, {1, 1}}), {2, 3, 5, 7});
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("rows (0)"), std::string::npos) << e.what();
  }
  EXPECT_THROW(verify_coprime_lemmas(qm({{1, 1}, {1, -1}}), {2, 4, 5, 7}), std::invalid_argument);
  EXPECT_THROW(verify_coprime_lemmas(qm({{1, 1}}), {3, 5, 4}), std::invalid_argument);
  EXPECT_THROW(check_C2(qm({{1, 1}, {1, -1}}), {2, 3, 5, 7}, 100), BudgetExceeded);
}

TEST(Conditions, IndexConditionImpliesOriginFiber) {
  // Whenever a root tuple passes the C2 index test, the branch of g = (xi, eta) lies over 0.
  std::mt19937 rng(21);
  for (int t = 0; t < 6; ++t) {
    auto H = random_c1(rng, 2, 2);
    std::uniform_int_distribution<unsigned long> md(1, 3);
    std::vector<unsigned long> m{md(rng), md(rng), md(rng), md(rng)};
    auto spec = ReflectionMapSpec::graph(m, H);
    RefMap rm(spec);
    for (std::uint64_t k = 1; k < spec.group.order(); ++k) {
      const auto g = spec.group.element(k);
      const std::vector<unsigned long> xi{g[0], g[1]}, eta{g[2], g[3]};
      const bool singular = std::abs(numeric_det(H, m, xi, eta)) < 1e-9;
      const int ones = (g[0] == 0) + (g[1] == 0) + (g[2] == 0) + (g[3] == 0);
      if (!singular || ones >= 2) EXPECT_TRUE(branch_in_origin_fiber(branch_matrices(rm, g))) << to_string(g);
    }
  }
}
