#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "reflekt/cyclotomic.hpp"
#include "reflekt/linalg.hpp"
#include "reflekt/rational.hpp"

namespace reflekt {

/// Exponent vector a of the element i_a; acts by diag(zeta_{m_i}^{a_i}).
using GroupElement = std::vector<unsigned long>;

/// A point of C^p with coordinates in a cyclotomic field.
using Point = std::vector<CycloNum>;

/// The diagonal group Z_{m_1,...,m_p}.
class GroupSpec {
 public:
  GroupSpec() = default;
  explicit GroupSpec(std::vector<unsigned long> moduli) : moduli_(std::move(moduli)) {
    if (moduli_.empty()) throw std::invalid_argument("group needs at least one modulus");
    for (auto m : moduli_)
      if (m == 0) throw std::invalid_argument("moduli must be positive");
    conductor_ = lcm_all(moduli_);
    order_ = 1;
    for (auto m : moduli_) {
      if (order_ > UINT64_MAX / m) throw std::invalid_argument("group order overflows 64 bits");
      order_ *= m;
    }
  }

  [[nodiscard]] const std::vector<unsigned long>& moduli() const { return moduli_; }
  [[nodiscard]] std::size_t p() const { return moduli_.size(); }
  [[nodiscard]] unsigned long modulus(std::size_t i) const { return moduli_.at(i); }
  [[nodiscard]] unsigned long conductor() const { return conductor_; }
  [[nodiscard]] std::uint64_t order() const { return order_; }

  /// Indices i with m_i >= 2, i.e. the reflecting hyperplanes y_i = 0.
  [[nodiscard]] std::vector<std::size_t> hyperplanes() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < p(); ++i)
      if (moduli_[i] >= 2) out.push_back(i);
    return out;
  }
  [[nodiscard]] std::size_t rank() const { return hyperplanes().size(); }

  /// Degrees of the basic invariants y_i^{m_i}, sorted.
  [[nodiscard]] std::vector<unsigned long> degrees() const {
    auto d = moduli_;
    std::sort(d.begin(), d.end());
    return d;
  }

  [[nodiscard]] std::uint64_t reflection_count() const {
    std::uint64_t s = 0;
    for (auto m : moduli_) s += m - 1;
    return s;
  }

  /// Lexicographic rank of an element (last coordinate fastest).
  [[nodiscard]] std::uint64_t index_of(const GroupElement& a) const {
    check(a);
    std::uint64_t idx = 0;
    for (std::size_t i = 0; i < p(); ++i) idx = idx * moduli_[i] + a[i];
    return idx;
  }

  [[nodiscard]] GroupElement element(std::uint64_t idx) const {
    if (idx >= order_) throw std::out_of_range("element index out of range");
    GroupElement a(p());
    for (std::size_t i = p(); i-- > 0;) {
      a[i] = idx % moduli_[i];
      idx /= moduli_[i];
    }
    return a;
  }

  [[nodiscard]] std::vector<GroupElement> elements() const {
    std::vector<GroupElement> out;
    out.reserve(order_);
    for (std::uint64_t k = 0; k < order_; ++k) out.push_back(element(k));
    return out;
  }

  [[nodiscard]] GroupElement inverse(const GroupElement& a) const {
    check(a);
    GroupElement b(p());
    for (std::size_t i = 0; i < p(); ++i) b[i] = (moduli_[i] - a[i]) % moduli_[i];
    return b;
  }

  /// Exponent e with xi_i = zeta_N^e.
  [[nodiscard]] unsigned long zeta_exponent(const GroupElement& a, std::size_t i) const {
    return (conductor_ / moduli_[i]) * a[i] % conductor_;
  }

  void check(const GroupElement& a) const {
    if (a.size() != p()) throw std::invalid_argument("element has wrong length");
    for (std::size_t i = 0; i < p(); ++i)
      if (a[i] >= moduli_[i]) throw std::invalid_argument("exponent out of range");
  }

  friend bool operator==(const GroupSpec& x, const GroupSpec& y) { return x.moduli_ == y.moduli_; }

 private:
  std::vector<unsigned long> moduli_;
  unsigned long conductor_ = 1;
  std::uint64_t order_ = 1;
};

inline bool pairwise_coprime(const std::vector<unsigned long>& m) {
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = i + 1; j < m.size(); ++j)
      if (std::gcd(m[i], m[j]) != 1) return false;
  return true;
}

inline bool is_identity(const GroupElement& a) {
  return std::all_of(a.begin(), a.end(), [](unsigned long x) { return x == 0; });
}

inline bool is_reflection(const GroupElement& a) {
  return std::count_if(a.begin(), a.end(), [](unsigned long x) { return x != 0; }) == 1;
}

/// Reflections counted by walking the whole group; cross-check for reflection_count().
inline std::uint64_t count_reflections(const GroupSpec& g) {
  std::uint64_t c = 0;
  for (std::uint64_t k = 0; k < g.order(); ++k)
    if (is_reflection(g.element(k))) ++c;
  return c;
}

inline std::string to_string(const GroupElement& a) {
  std::string s = "(";
  for (std::size_t i = 0; i < a.size(); ++i) s += (i ? "," : "") + std::to_string(a[i]);
  return s + ")";
}

/// Facet C_B, indexed by its support B (sorted hyperplane indices).
struct Facet {
  std::vector<std::size_t> support;

  /// <C_B> = {y_i = 0 for i in B}.
  [[nodiscard]] Subspace<Rational> closure(std::size_t p) const {
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < p; ++i)
      if (!std::binary_search(support.begin(), support.end(), i)) free.push_back(i);
    return Subspace<Rational>::coordinate(p, free, Rational(0));
  }
  /// C_B^perp = span{e_i : i in B}.
  [[nodiscard]] Subspace<Rational> perp(std::size_t p) const {
    return Subspace<Rational>::coordinate(p, support, Rational(0));
  }
  friend bool operator==(const Facet&, const Facet&) = default;
};

/// Fix i_a = span{e_i : a_i = 0}.
inline Subspace<Rational> fixed_space(const GroupSpec& g, const GroupElement& a) {
  g.check(a);
  std::vector<std::size_t> axes;
  for (std::size_t i = 0; i < g.p(); ++i)
    if (a[i] == 0) axes.push_back(i);
  return Subspace<Rational>::coordinate(g.p(), axes, Rational(0));
}

/// Element whose fixed space is <C_B>.
inline GroupElement element_fixing_facet(const GroupSpec& g, const Facet& f) {
  GroupElement a(g.p(), 0);
  for (auto i : f.support) {
    if (i >= g.p()) throw std::invalid_argument("facet index out of range");
    if (g.modulus(i) < 2) throw std::invalid_argument("facet support contains a trivial-modulus index");
    a[i] = 1;
  }
  return a;
}

inline void check_point(const GroupSpec& g, const Point& y) {
  if (y.size() != g.p()) throw std::invalid_argument("point has wrong dimension");
  for (const auto& c : y)
    if (c.conductor() % g.conductor() != 0)
      throw std::invalid_argument("point field must contain the N-th roots of unity");
}

inline Facet facet_of(const GroupSpec& g, const Point& y) {
  if (y.size() != g.p()) throw std::invalid_argument("point has wrong dimension");
  Facet f;
  for (std::size_t i = 0; i < g.p(); ++i)
    if (g.modulus(i) >= 2 && y[i].is_zero()) f.support.push_back(i);
  return f;
}

inline std::uint64_t stabilizer_order(const GroupSpec& g, const Point& y) {
  std::uint64_t s = 1;
  for (auto i : facet_of(g, y).support) s *= g.modulus(i);
  return s;
}

inline Point act(const GroupSpec& g, const GroupElement& a, const Point& y) {
  check_point(g, y);
  g.check(a);
  Point out = y;
  for (std::size_t i = 0; i < g.p(); ++i)
    if (a[i] != 0 && !y[i].is_zero()) out[i] = y[i] * CycloNum::root_of_unity(y[i].field(), g.modulus(i), static_cast<long>(a[i]));
  return out;
}

namespace detail {
struct PointLess {
  bool operator()(const Point& a, const Point& b) const {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  }
};
}  // namespace detail

using PointSet = std::set<Point, detail::PointLess>;

/// G y with exact deduplication.
inline PointSet orbit(const GroupSpec& g, const Point& y) {
  PointSet out;
  for (std::uint64_t k = 0; k < g.order(); ++k) out.insert(act(g, g.element(k), y));
  return out;
}

/// omega(y) = (y_i^{m_i}).
inline Point orbit_map_eval(const GroupSpec& g, const Point& y) {
  if (y.size() != g.p()) throw std::invalid_argument("point has wrong dimension");
  Point out;
  for (std::size_t i = 0; i < g.p(); ++i) out.push_back(y[i].pow(g.modulus(i)));
  return out;
}

/// Builds omega^{-1}(omega(y)) coordinatewise from the roots of unity of the point field
/// and compares it with the orbit. Each coordinate must yield exactly m_i roots (or the
/// single root 0), which certifies that the constructed fiber is complete.
inline bool verify_fiber_is_orbit(const GroupSpec& g, const Point& y) {
  check_point(g, y);
  std::vector<std::vector<CycloNum>> roots(g.p());
  for (std::size_t i = 0; i < g.p(); ++i) {
    const auto& field = y[i].field();
    if (y[i].is_zero()) {
      roots[i].push_back(y[i]);
      continue;
    }
    const CycloNum target = y[i].pow(g.modulus(i));
    std::set<CycloNum> found;
    const unsigned long L = field->conductor();
    // The roots of unity in Q(zeta_L) are +-zeta_L^j.
    for (unsigned long j = 0; j < L; ++j)
      for (int s : {1, -1}) {
        CycloNum z = CycloNum::zeta_power(field, j).scaled(Rational(s)) * y[i];
        if (z.pow(g.modulus(i)) == target) found.insert(z);
      }
    if (found.size() != g.modulus(i)) return false;
    roots[i].assign(found.begin(), found.end());
  }
  PointSet fiber;
  Point cur(g.p());
  std::vector<std::size_t> idx(g.p(), 0);
  while (true) {
    for (std::size_t i = 0; i < g.p(); ++i) cur[i] = roots[i][idx[i]];
    fiber.insert(cur);
    std::size_t k = g.p();
    while (k-- > 0) {
      if (++idx[k] < roots[k].size()) break;
      idx[k] = 0;
    }
    if (k == static_cast<std::size_t>(-1)) break;
  }
  return fiber == orbit(g, y);
}

/// d omega_y = diag(m_i y_i^{m_i - 1}).
inline Matrix<CycloNum> orbit_map_differential(const GroupSpec& g, const Point& y) {
  check_point(g, y);
  Matrix<CycloNum> d(g.p(), g.p(), zero_like(y[0]));
  for (std::size_t i = 0; i < g.p(); ++i)
    d(i, i) = y[i].pow(g.modulus(i) - 1).scaled(Rational(static_cast<long>(g.modulus(i))));
  return d;
}

/// Exponents of the Jacobian monomial prod_i m_i y_i^{m_i-1}; their sum is the degree.
inline std::vector<unsigned long> jacobian_exponents(const GroupSpec& g) {
  std::vector<unsigned long> e;
  for (auto m : g.moduli()) e.push_back(m - 1);
  return e;
}

/// det d omega_y equals prod m_i y_i^{m_i-1} and vanishes exactly on the arrangement.
inline bool jacobian_check(const GroupSpec& g, const Point& y) {
  const CycloNum d = det(orbit_map_differential(g, y));
  CycloNum expected = one_like(y[0]);
  for (std::size_t i = 0; i < g.p(); ++i)
    expected = expected * y[i].pow(g.modulus(i) - 1).scaled(Rational(static_cast<long>(g.modulus(i))));
  if (d != expected) return false;
  return d.is_zero() == !facet_of(g, y).support.empty();
}

inline Subspace<CycloNum> lift(const Subspace<Rational>& s, const CycloNum& zero) {
  return Subspace<CycloNum>::span(s.basis().map([&](const Rational& r) { return CycloNum(zero.field(), r); }, zero));
}

/// ker d omega_y; throws if it differs from C^perp for the facet of y.
inline Subspace<CycloNum> kernel_at(const GroupSpec& g, const Point& y) {
  auto k = kernel_basis(orbit_map_differential(g, y));
  if (!(k == lift(facet_of(g, y).perp(g.p()), zero_like(y[0]))))
    throw std::logic_error("kernel of d omega differs from the facet normal space");
  return k;
}

}  // namespace reflekt
