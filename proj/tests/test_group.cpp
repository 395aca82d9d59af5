#include <gtest/gtest.h>

#include <random>

#include "reflekt/group.hpp"

using namespace reflekt;

namespace {

Point rational_point(const GroupSpec& g, std::vector<long> v, unsigned long extra = 1) {
  auto f = CycloField::get(std::lcm(g.conductor(), extra));
  Point y;
  for (long x : v) y.emplace_back(f, Rational(x));
  return y;
}

}  // namespace

TEST(Group, Stats) {
  GroupSpec z22({2, 2});
  EXPECT_EQ(z22.order(), 4u);
  EXPECT_EQ(z22.reflection_count(), 2u);
  EXPECT_EQ(count_reflections(z22), 2u);
  GroupSpec z23({2, 3});
  EXPECT_EQ(z23.order(), 6u);
  EXPECT_EQ(z23.reflection_count(), 3u);
  EXPECT_EQ(count_reflections(z23), 3u);
  GroupSpec z1({1});
  EXPECT_EQ(z1.order(), 1u);
  EXPECT_EQ(z1.reflection_count(), 0u);
  EXPECT_EQ(z1.rank(), 0u);
  EXPECT_THROW(GroupSpec(std::vector<unsigned long>{}), std::invalid_argument);
  EXPECT_THROW(GroupSpec({2, 0}), std::invalid_argument);
}

TEST(Group, EnumerationOrder) {
  GroupSpec z22({2, 2});
  EXPECT_EQ(z22.elements(), (std::vector<GroupElement>{{0, 0}, {0, 1}, {1, 0}, {1, 1}}));
  EXPECT_TRUE(is_reflection({1, 0}));
  EXPECT_FALSE(is_reflection({1, 1}));
  EXPECT_EQ(GroupSpec({2, 3}).elements().size(), 6u);
  GroupSpec g({3, 4, 5});
  for (std::uint64_t k = 0; k < g.order(); ++k) EXPECT_EQ(g.index_of(g.element(k)), k);
}

TEST(Group, FixedSpaces) {
  GroupSpec z22({2, 2});
  EXPECT_EQ(fixed_space(z22, {1, 0}), Subspace<Rational>::coordinate(2, {1}, Rational(0)));
  auto a = element_fixing_facet(z22, Facet{{0, 1}});
  EXPECT_EQ(a, (GroupElement{1, 1}));
  EXPECT_TRUE(fixed_space(z22, a).is_zero());
  EXPECT_EQ(fixed_space(z22, {0, 0}).dim(), 2u);
  EXPECT_THROW(element_fixing_facet(GroupSpec({2, 1}), Facet{{1}}), std::invalid_argument);
}

TEST(Group, FixedSpaceOfFacetElementRoundTrip) {
  for (std::size_t p = 1; p <= 8; ++p) {
    std::vector<unsigned long> m(p);
    for (std::size_t i = 0; i < p; ++i) m[i] = 2 + i % 3;
    GroupSpec g(m);
    for (unsigned mask = 0; mask < (1u << p); ++mask) {
      Facet f;
      for (std::size_t i = 0; i < p; ++i)
        if (mask >> i & 1) f.support.push_back(i);
      EXPECT_EQ(fixed_space(g, element_fixing_facet(g, f)), f.closure(p));
    }
  }
}

TEST(Group, FacetsAndStabilizers) {
  GroupSpec z22({2, 2});
  auto y = rational_point(z22, {0, 1});
  EXPECT_EQ(facet_of(z22, y).support, std::vector<std::size_t>{0});
  EXPECT_EQ(stabilizer_order(z22, y), 2u);
  EXPECT_TRUE(facet_of(z22, rational_point(z22, {1, 1})).support.empty());
  EXPECT_EQ(stabilizer_order(z22, rational_point(z22, {1, 1})), 1u);
  EXPECT_EQ(facet_of(z22, rational_point(z22, {0, 0})).support, (std::vector<std::size_t>{0, 1}));
  // trivial factors never carry a hyperplane
  EXPECT_TRUE(facet_of(GroupSpec({1, 2}), rational_point(GroupSpec({1, 2}), {0, 1})).support.empty());
}

TEST(Group, OrbitsAndOrbitMap) {
  GroupSpec z22({2, 2});
  auto y = rational_point(z22, {1, 1});
  auto o = orbit(z22, y);
  EXPECT_EQ(o.size(), 4u);
  for (const auto& pt : o) EXPECT_EQ(orbit_map_eval(z22, pt), orbit_map_eval(z22, y));
  GroupSpec z23({2, 3});
  auto w = orbit_map_eval(z23, rational_point(z23, {2, 1}));
  EXPECT_EQ(w[0], CycloNum(w[0].field(), Rational(4)));
  EXPECT_TRUE(w[1].is_one());
  EXPECT_EQ(orbit(z22, rational_point(z22, {0, 1})).size(), 2u);
}

TEST(Group, FiberIsOrbit) {
  GroupSpec z22({2, 2});
  EXPECT_TRUE(verify_fiber_is_orbit(z22, rational_point(z22, {1, 1})));
  GroupSpec z3({3});
  auto y = rational_point(z3, {1});
  EXPECT_TRUE(verify_fiber_is_orbit(z3, y));
  EXPECT_EQ(orbit(z3, y).size(), 3u);
  auto zero = rational_point(z3, {0});
  EXPECT_TRUE(verify_fiber_is_orbit(z3, zero));
  EXPECT_EQ(orbit(z3, zero).size(), 1u);
}

TEST(Group, JacobianAndKernel) {
  GroupSpec z22({2, 2});
  auto y = rational_point(z22, {0, 1});
  EXPECT_TRUE(jacobian_check(z22, y));
  EXPECT_EQ(kernel_at(z22, y), lift(Subspace<Rational>::coordinate(2, {0}, Rational(0)), y[0]));
  auto g = rational_point(z22, {1, 1});
  EXPECT_TRUE(jacobian_check(z22, g));
  EXPECT_TRUE(det(orbit_map_differential(z22, g)) == CycloNum(g[0].field(), Rational(4)));
  EXPECT_TRUE(kernel_at(z22, g).is_zero());
  EXPECT_EQ(kernel_at(z22, rational_point(z22, {0, 0})).dim(), 2u);
  std::uint64_t deg = 0;
  for (auto e : jacobian_exponents(GroupSpec({2, 3, 5}))) deg += e;
  EXPECT_EQ(deg, GroupSpec({2, 3, 5}).reflection_count());
}

TEST(Group, RandomPointProperties) {
  std::mt19937 rng(21);
  std::uniform_int_distribution<int> mod(1, 5), coord(-3, 3), zero(0, 3);
  for (int t = 0; t < 15; ++t) {
    std::vector<unsigned long> m(1 + t % 3);
    for (auto& x : m) x = mod(rng);
    GroupSpec g(m);
    auto f = CycloField::get(g.conductor());
    Point y;
    for (std::size_t i = 0; i < g.p(); ++i) {
      if (zero(rng) == 0) {
        y.emplace_back(f);
        continue;
      }
      std::uniform_int_distribution<unsigned long> e(0, g.conductor() - 1);
      y.push_back(CycloNum::zeta_power(f, e(rng)).scaled(Rational(coord(rng) | 1)));
    }
    EXPECT_EQ(orbit(g, y).size() * stabilizer_order(g, y), g.order());
    EXPECT_TRUE(verify_fiber_is_orbit(g, y));
    EXPECT_TRUE(jacobian_check(g, y));
    EXPECT_NO_THROW(kernel_at(g, y));
  }
}
