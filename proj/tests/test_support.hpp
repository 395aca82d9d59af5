#pragma once

#include <random>
#include <vector>

#include "reflekt/refmap.hpp"

namespace reflekt::testing {

inline Matrix<Rational> qm(std::vector<std::vector<long>> rows) {
  std::vector<std::vector<Rational>> r;
  for (auto& row : rows) r.emplace_back(row.begin(), row.end());
  return Matrix<Rational>::from_rows(r, Rational(0));
}

inline Matrix<Rational> random_matrix(std::size_t r, std::size_t c, int range, std::mt19937& rng) {
  std::uniform_int_distribution<int> d(-range, range);
  Matrix<Rational> m(r, c, Rational(0));
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = Rational(d(rng));
  return m;
}

inline ReflectionMapSpec spec(std::vector<unsigned long> m, std::vector<std::vector<long>> A) {
  return ReflectionMapSpec(GroupSpec(std::move(m)), qm(std::move(A)));
}

/// Random full-rank spec with p in [pmin, pmax], n <= p, moduli in [1, mmax].
inline ReflectionMapSpec random_spec(std::mt19937& rng, std::size_t pmin, std::size_t pmax, unsigned long mmax,
                                     std::size_t nmax = 8) {
  std::uniform_int_distribution<std::size_t> pd(pmin, pmax);
  const std::size_t p = pd(rng);
  std::uniform_int_distribution<std::size_t> nd(1, std::min(p, nmax));
  const std::size_t n = nd(rng);
  std::uniform_int_distribution<unsigned long> md(1, mmax);
  std::vector<unsigned long> m(p);
  for (auto& x : m) x = md(rng);
  while (true) {
    auto A = random_matrix(p, n, 2, rng);
    if (rank(A) == n) return ReflectionMapSpec(GroupSpec(m), A);
  }
}

}  // namespace reflekt::testing
