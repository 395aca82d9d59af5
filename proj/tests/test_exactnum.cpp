#include <gtest/gtest.h>

#include <complex>
#include <random>

#include "reflekt/cyclotomic.hpp"
#include "reflekt/modular.hpp"
#include "reflekt/rational.hpp"

using namespace reflekt;

namespace {

using ZPoly = std::vector<mpz_class>;

// Oracle: Phi_N by dividing x^N - 1 by Phi_d for each proper divisor d, recursively.
ZPoly oracle_phi(unsigned long n) {
  ZPoly p(n + 1, 0);
  p[0] = -1;
  p[n] = 1;
  for (unsigned long d = 1; d < n; ++d) {
    if (n % d) continue;
    ZPoly q = oracle_phi(d);
    // long division by monic q
    ZPoly quot(p.size() - q.size() + 1, 0);
    for (std::size_t k = p.size(); k-- >= q.size();) {
      mpz_class c = p[k];
      quot[k - (q.size() - 1)] = c;
      for (std::size_t j = 0; j < q.size(); ++j) p[k - (q.size() - 1) + j] -= c * q[j];
      if (k == q.size() - 1) break;
    }
    for (std::size_t k = 0; k + 1 < q.size(); ++k) EXPECT_EQ(p[k], 0) << "non-exact division";
    p = quot;
  }
  return p;
}

CycloNum random_cyclo(const FieldPtr& f, std::mt19937& rng) {
  std::uniform_int_distribution<int> num(-5, 5), den(1, 4);
  std::vector<mpq_class> c(f->degree());
  for (auto& x : c) {
    x = mpq_class(num(rng), den(rng));
    x.canonicalize();
  }
  return CycloNum(f, c);
}

}  // namespace

TEST(Rational, LowestTermsAndParse) {
  Rational r(6, -4);
  EXPECT_EQ(r.str(), "-3/2");
  EXPECT_EQ(Rational(0, 7).str(), "0");
  EXPECT_EQ(Rational::parse("10/4"), Rational(5, 2));
  EXPECT_EQ(Rational::parse("-7"), Rational(-7));
  EXPECT_THROW(Rational::parse("1/0"), std::invalid_argument);
  EXPECT_THROW(Rational::parse("abc"), std::invalid_argument);
  EXPECT_THROW(Rational(0).inverse(), std::domain_error);
}

TEST(Cyclotomic, SmallPolynomials) {
  EXPECT_EQ(cyclotomic_polynomial(1), (ZPoly{-1, 1}));
  EXPECT_EQ(cyclotomic_polynomial(2), (ZPoly{1, 1}));
  EXPECT_EQ(cyclotomic_polynomial(6), (ZPoly{1, -1, 1}));
  EXPECT_THROW(cyclotomic_polynomial(0), std::invalid_argument);
}

TEST(Cyclotomic, AgreesWithDivisionOracle) {
  for (unsigned long n = 1; n <= 60; ++n) {
    const auto p = cyclotomic_polynomial(n);
    EXPECT_EQ(p, oracle_phi(n)) << "N=" << n;
    EXPECT_EQ(p.size() - 1, euler_phi(n));
  }
  for (unsigned long n : {105UL, 210UL, 330UL, 2310UL}) EXPECT_EQ(cyclotomic_polynomial(n), oracle_phi(n)) << n;
  // Phi_105 has a coefficient -2
  const auto p105 = cyclotomic_polynomial(105);
  EXPECT_NE(std::find(p105.begin(), p105.end(), mpz_class(-2)), p105.end());
}

TEST(Cyclotomic, EmbedRootOfUnity) {
  auto f = CycloField::get(6);
  EXPECT_EQ(CycloNum::root_of_unity(f, 2, 1), CycloNum(f, Rational(-1)));
  auto z3 = CycloNum::root_of_unity(f, 3, 1);
  EXPECT_EQ(z3.coeffs(), (std::vector<mpq_class>{-1, 1}));  // zeta_6 - 1
  EXPECT_TRUE(CycloNum::root_of_unity(f, 3, 3).is_one());
  EXPECT_THROW(CycloNum::root_of_unity(f, 4, 1), std::invalid_argument);
}

TEST(Cyclotomic, FieldArithmeticExamples) {
  auto f4 = CycloField::get(4);
  auto i = CycloNum::root_of_unity(f4, 4, 1);
  EXPECT_EQ(i * i, CycloNum(f4, Rational(-1)));

  auto f3 = CycloField::get(3);
  auto one = CycloNum(f3, Rational(1));
  auto z = CycloNum::root_of_unity(f3, 3, 1);
  EXPECT_TRUE(((one + z) * (one + z * z)).is_one());

  auto f6 = CycloField::get(6);
  EXPECT_EQ(CycloNum::root_of_unity(f6, 6, 1).inverse(), CycloNum::root_of_unity(f6, 6, 5));
  EXPECT_THROW(CycloNum(f6).inverse(), std::domain_error);
  EXPECT_THROW(z + CycloNum(f6, Rational(1)), std::invalid_argument);
}

TEST(Cyclotomic, RootOfUnityProperties) {
  for (unsigned long n : {1UL, 2UL, 6UL, 12UL, 30UL, 36UL}) {
    auto f = CycloField::get(n);
    for (unsigned long m : divisors(n))
      for (long a = -2 * static_cast<long>(m); a <= 2 * static_cast<long>(m); ++a) {
        auto z = CycloNum::root_of_unity(f, m, a);
        EXPECT_TRUE(z.pow(m).is_one());
        EXPECT_EQ(z.is_one(), a % static_cast<long>(m) == 0);
      }
  }
}

TEST(Cyclotomic, RandomInverseAndRingAxioms) {
  std::mt19937 rng(7);
  for (unsigned long n : {3UL, 5UL, 8UL, 12UL, 15UL, 21UL}) {
    auto f = CycloField::get(n);
    for (int t = 0; t < 20; ++t) {
      auto a = random_cyclo(f, rng), b = random_cyclo(f, rng), c = random_cyclo(f, rng);
      if (!a.is_zero()) EXPECT_TRUE((a * a.inverse()).is_one());
      EXPECT_EQ((a * b) * c, a * (b * c));
      EXPECT_EQ(a * (b + c), a * b + a * c);
      EXPECT_EQ(a + b, b + a);
      EXPECT_EQ(a * b, b * a);
    }
  }
}

TEST(Cyclotomic, NumericShadow) {
  std::mt19937 rng(11);
  for (unsigned long n : {5UL, 7UL, 12UL, 30UL}) {
    auto f = CycloField::get(n);
    for (int t = 0; t < 10; ++t) {
      auto x = random_cyclo(f, rng);
      std::complex<double> xd = x.numeric();
      std::uniform_int_distribution<int> op(0, 3);
      for (int depth = 0; depth < 10; ++depth) {
        auto y = random_cyclo(f, rng);
        const auto yd = y.numeric();
        switch (op(rng)) {
          case 0: x = x + y; xd += yd; break;
          case 1: x = x - y; xd -= yd; break;
          case 2: x = x * y; xd *= yd; break;
          default:
            if (y.is_zero()) break;
            x = x / y; xd /= yd;
        }
      }
      const auto got = x.numeric();
      EXPECT_LT(std::abs(got - xd), 1e-9 * std::max(1.0, std::abs(xd))) << "N=" << n;
    }
  }
}

TEST(Cyclotomic, LiftPreservesValue) {
  auto f3 = CycloField::get(3), f12 = CycloField::get(12);
  auto z = CycloNum::root_of_unity(f3, 3, 1);
  EXPECT_EQ(z.lift(f12), CycloNum::root_of_unity(f12, 3, 1));
  EXPECT_LT(std::abs(z.lift(f12).numeric() - z.numeric()), 1e-12);
}

TEST(Modular, RingHomomorphism) {
  std::mt19937 rng(3);
  for (unsigned long n : {1UL, 4UL, 15UL, 30UL, 210UL}) {
    auto img = ModularImage::get(n, 1);
    EXPECT_EQ((img->prime() - 1) % n, 0u);
    EXPECT_GT(img->prime(), 1ULL << 61);
    auto f = CycloField::get(n);
    for (unsigned long m : divisors(n)) {
      auto w = img->root_of_unity(m, 1);
      Fq acc = one_like(w);
      for (unsigned long k = 1; k <= m; ++k) {
        acc = acc * w;
        if (k < m) EXPECT_FALSE(acc.is_one());
      }
      EXPECT_TRUE(acc.is_one());
    }
    for (int t = 0; t < 10; ++t) {
      auto a = random_cyclo(f, rng), b = random_cyclo(f, rng);
      EXPECT_EQ(img->from_cyclo(a * b), img->from_cyclo(a) * img->from_cyclo(b));
      EXPECT_EQ(img->from_cyclo(a + b), img->from_cyclo(a) + img->from_cyclo(b));
    }
  }
  EXPECT_NE(ModularImage::get(30, 1)->prime(), ModularImage::get(30, 2)->prime());
}
