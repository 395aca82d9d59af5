#pragma once

#include <algorithm>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "reflekt/rational.hpp"

namespace reflekt {

namespace detail {

/// Dense integer polynomial, lowest degree first.
using ZPoly = std::vector<mpz_class>;
/// Dense rational polynomial, lowest degree first.
using QPoly = std::vector<mpq_class>;

inline void trim(QPoly& p) {
  while (!p.empty() && sgn(p.back()) == 0) p.pop_back();
}

inline void trim(ZPoly& p) {
  while (!p.empty() && sgn(p.back()) == 0) p.pop_back();
}

/// Exact division of p by the monic polynomial d; throws if the remainder is nonzero.
inline ZPoly exact_divide(ZPoly p, const ZPoly& d) {
  trim(p);
  const std::size_t dd = d.size() - 1;
  if (d.back() != 1) throw std::logic_error("exact_divide expects a monic divisor");
  if (p.size() < d.size()) {
    if (p.empty()) return {};
    throw std::logic_error("inexact polynomial division");
  }
  ZPoly q(p.size() - dd, 0);
  for (std::size_t k = p.size(); k-- > dd;) {
    const mpz_class c = p[k];
    if (c == 0) continue;
    q[k - dd] = c;
    for (std::size_t j = 0; j <= dd; ++j) p[k - dd + j] -= c * d[j];
  }
  trim(p);
  if (!p.empty()) throw std::logic_error("inexact polynomial division");
  return q;
}

/// Divides p in place by (x^d - 1), which must divide exactly.
inline void divide_by_binomial(ZPoly& p, std::size_t d) {
  // p = (x^d - 1) q  =>  q_k = q_{k-d} - p_k, solved from the bottom.
  const std::size_t deg = p.size() - 1;
  ZPoly q(deg - d + 1, 0);
  for (std::size_t k = 0; k <= deg - d; ++k) {
    q[k] = -p[k];
    if (k >= d) q[k] += q[k - d];
  }
  // Verify the top coefficients: p_k = q_{k-d} for k > deg - d.
  for (std::size_t k = deg - d + 1; k <= deg; ++k) {
    mpz_class expect = (k >= d) ? q[k - d] : mpz_class(0);
    if (k <= deg - d) expect -= q[k];
    if (p[k] != expect) throw std::logic_error("inexact binomial division");
  }
  p = std::move(q);
}

inline void multiply_by_binomial(ZPoly& p, std::size_t d) {
  ZPoly r(p.size() + d, 0);
  for (std::size_t k = 0; k < p.size(); ++k) {
    r[k + d] += p[k];
    r[k] -= p[k];
  }
  p = std::move(r);
}

inline int moebius(unsigned long n) {
  int mu = 1;
  for (unsigned long f = 2; f * f <= n; ++f) {
    if (n % f == 0) {
      n /= f;
      if (n % f == 0) return 0;
      mu = -mu;
    }
  }
  if (n > 1) mu = -mu;
  return mu;
}

inline QPoly poly_mod(QPoly a, const QPoly& b) {
  trim(a);
  const std::size_t db = b.size() - 1;
  while (a.size() >= b.size()) {
    const mpq_class c = a.back() / b.back();
    const std::size_t shift = a.size() - b.size();
    for (std::size_t j = 0; j <= db; ++j) a[shift + j] -= c * b[j];
    a.pop_back();
    trim(a);
  }
  return a;
}

inline std::pair<QPoly, QPoly> poly_divmod(QPoly a, const QPoly& b) {
  trim(a);
  QPoly q;
  if (a.size() >= b.size()) q.assign(a.size() - b.size() + 1, 0);
  const std::size_t db = b.size() - 1;
  while (a.size() >= b.size()) {
    const mpq_class c = a.back() / b.back();
    const std::size_t shift = a.size() - b.size();
    q[shift] = c;
    for (std::size_t j = 0; j <= db; ++j) a[shift + j] -= c * b[j];
    a.pop_back();
    trim(a);
  }
  trim(q);
  return {q, a};
}

inline QPoly poly_sub_mul(const QPoly& a, const QPoly& q, const QPoly& b) {
  // a - q*b
  QPoly r(std::max(a.size(), q.empty() || b.empty() ? 0 : q.size() + b.size() - 1), 0);
  for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (sgn(q[i]) == 0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] -= q[i] * b[j];
  }
  trim(r);
  return r;
}

}  // namespace detail

inline unsigned long euler_phi(unsigned long n) {
  if (n == 0) throw std::invalid_argument("euler_phi(0)");
  unsigned long result = n;
  for (unsigned long f = 2; f * f <= n; ++f) {
    if (n % f == 0) {
      while (n % f == 0) n /= f;
      result -= result / f;
    }
  }
  if (n > 1) result -= result / n;
  return result;
}

inline std::vector<unsigned long> divisors(unsigned long n) {
  std::vector<unsigned long> out;
  for (unsigned long d = 1; d * d <= n; ++d) {
    if (n % d == 0) {
      out.push_back(d);
      if (d * d != n) out.push_back(n / d);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<unsigned long> prime_factors(unsigned long n) {
  std::vector<unsigned long> out;
  for (unsigned long f = 2; f * f <= n; ++f) {
    if (n % f == 0) {
      out.push_back(f);
      while (n % f == 0) n /= f;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

/// Coefficients of the N-th cyclotomic polynomial, lowest degree first.
inline std::vector<mpz_class> cyclotomic_polynomial(unsigned long n) {
  if (n == 0) throw std::invalid_argument("cyclotomic_polynomial: N must be positive");
  // Phi_N = prod_{d | N} (x^d - 1)^{mu(N/d)}; multiply first, then divide exactly.
  detail::ZPoly p{1};
  const auto ds = divisors(n);
  for (auto d : ds)
    if (detail::moebius(n / d) == 1) detail::multiply_by_binomial(p, d);
  for (auto d : ds)
    if (detail::moebius(n / d) == -1) detail::divide_by_binomial(p, d);
  detail::trim(p);
  // Normalize sign so the polynomial is monic.
  if (p.back() < 0)
    for (auto& c : p) c = -c;
  return p;
}

/// The cyclotomic field Q(zeta_N), presented as Q[x] / Phi_N(x).
class CycloField {
 public:
  explicit CycloField(unsigned long conductor)
      : conductor_(conductor), phi_(euler_phi(conductor)), minpoly_(cyclotomic_polynomial(conductor)) {
    for (std::size_t j = 0; j + 1 < minpoly_.size(); ++j)
      if (minpoly_[j] != 0) tail_.emplace_back(j, mpq_class(minpoly_[j]));
    for (const auto& c : minpoly_) minpoly_q_.emplace_back(c);
  }

  /// Shared instance per conductor.
  static std::shared_ptr<const CycloField> get(unsigned long conductor) {
    static std::mutex mu;
    static std::map<unsigned long, std::shared_ptr<const CycloField>> cache;
    if (conductor == 0) throw std::invalid_argument("cyclotomic field conductor must be positive");
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(conductor);
    if (it != cache.end()) return it->second;
    auto f = std::make_shared<const CycloField>(conductor);
    cache.emplace(conductor, f);
    return f;
  }

  [[nodiscard]] unsigned long conductor() const { return conductor_; }
  [[nodiscard]] std::size_t degree() const { return phi_; }
  [[nodiscard]] const std::vector<mpz_class>& minimal_polynomial() const { return minpoly_; }

  /// Reduces a dense rational polynomial modulo Phi_N into `out` (size phi).
  void reduce(std::vector<mpq_class>& poly) const {
    const std::size_t d = phi_;
    for (std::size_t k = poly.size(); k-- > d;) {
      if (sgn(poly[k]) == 0) continue;
      const mpq_class c = poly[k];
      const std::size_t shift = k - d;
      for (const auto& [j, coeff] : tail_) poly[shift + j] -= c * coeff;
      poly[k] = 0;
    }
    poly.resize(d);
  }

  [[nodiscard]] const std::vector<mpq_class>& minpoly_q() const { return minpoly_q_; }

 private:
  unsigned long conductor_;
  std::size_t phi_;
  std::vector<mpz_class> minpoly_;
  std::vector<mpq_class> minpoly_q_;
  std::vector<std::pair<std::size_t, mpq_class>> tail_;
};

using FieldPtr = std::shared_ptr<const CycloField>;

/// Exact element of Q(zeta_N) in canonical form (coefficients of 1, z, ..., z^{phi-1}).
class CycloNum {
 public:
  CycloNum() = default;

  explicit CycloNum(FieldPtr field) : field_(std::move(field)), coeffs_(field_->degree(), 0) {}

  CycloNum(FieldPtr field, const Rational& r) : CycloNum(std::move(field)) { coeffs_[0] = r.raw(); }

  CycloNum(FieldPtr field, std::vector<mpq_class> poly) : field_(std::move(field)) {
    if (poly.size() < field_->degree()) poly.resize(field_->degree(), 0);
    field_->reduce(poly);
    coeffs_ = std::move(poly);
  }

  /// zeta_m^a embedded in Q(zeta_N); requires m | N.
  static CycloNum root_of_unity(const FieldPtr& field, unsigned long m, long a) {
    const unsigned long n = field->conductor();
    if (m == 0 || n % m != 0)
      throw std::invalid_argument("root_of_unity: modulus " + std::to_string(m) +
                                  " does not divide conductor " + std::to_string(n));
    long am = a % static_cast<long>(m);
    if (am < 0) am += static_cast<long>(m);
    const unsigned long e = (n / m) * static_cast<unsigned long>(am) % n;
    return zeta_power(field, e);
  }

  /// zeta_N^e.
  static CycloNum zeta_power(const FieldPtr& field, unsigned long e) {
    e %= field->conductor();
    std::vector<mpq_class> poly(std::max<std::size_t>(e + 1, field->degree()), 0);
    poly[e] = 1;
    return CycloNum(field, std::move(poly));
  }

  [[nodiscard]] const FieldPtr& field() const { return field_; }
  [[nodiscard]] unsigned long conductor() const { return field_->conductor(); }
  [[nodiscard]] const std::vector<mpq_class>& coeffs() const { return coeffs_; }

  [[nodiscard]] bool is_zero() const {
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](const mpq_class& c) { return sgn(c) == 0; });
  }

  [[nodiscard]] bool is_one() const {
    if (coeffs_.empty() || coeffs_[0] != 1) return false;
    return std::all_of(coeffs_.begin() + 1, coeffs_.end(), [](const mpq_class& c) { return sgn(c) == 0; });
  }

  /// Rational value if the element lies in Q.
  [[nodiscard]] bool is_rational() const {
    return std::all_of(coeffs_.begin() + 1, coeffs_.end(), [](const mpq_class& c) { return sgn(c) == 0; });
  }

  CycloNum& operator+=(const CycloNum& o) {
    check_same(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
  }
  CycloNum& operator-=(const CycloNum& o) {
    check_same(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    return *this;
  }

  friend CycloNum operator+(CycloNum a, const CycloNum& b) { return a += b; }
  friend CycloNum operator-(CycloNum a, const CycloNum& b) { return a -= b; }
  friend CycloNum operator-(CycloNum a) {
    for (auto& c : a.coeffs_) c = -c;
    return a;
  }

  friend CycloNum operator*(const CycloNum& a, const CycloNum& b) {
    a.check_same(b);
    const std::size_t d = a.coeffs_.size();
    std::vector<std::size_t> nz_a, nz_b;
    for (std::size_t i = 0; i < d; ++i) {
      if (sgn(a.coeffs_[i]) != 0) nz_a.push_back(i);
      if (sgn(b.coeffs_[i]) != 0) nz_b.push_back(i);
    }
    if (nz_a.empty() || nz_b.empty()) return CycloNum(a.field_);
    if (nz_a.size() == 1 && nz_a[0] == 0) return b.scaled(a.coeffs_[0]);
    if (nz_b.size() == 1 && nz_b[0] == 0) return a.scaled(b.coeffs_[0]);
    std::vector<mpq_class> prod(2 * d - 1, 0);
    for (auto i : nz_a)
      for (auto j : nz_b) prod[i + j] += a.coeffs_[i] * b.coeffs_[j];
    return CycloNum(a.field_, std::move(prod));
  }

  CycloNum& operator*=(const CycloNum& o) { return *this = *this * o; }

  [[nodiscard]] CycloNum scaled(const mpq_class& s) const {
    CycloNum r = *this;
    for (auto& c : r.coeffs_) c *= s;
    return r;
  }
  [[nodiscard]] CycloNum scaled(const Rational& s) const { return scaled(s.raw()); }

  /// Multiplicative inverse via the extended Euclidean algorithm against Phi_N.
  [[nodiscard]] CycloNum inverse() const {
    if (is_zero()) throw std::domain_error("division by zero in Q(zeta_" + std::to_string(conductor()) + ")");
    if (is_rational()) return CycloNum(field_, Rational(mpq_class(1 / coeffs_[0])));
    using detail::QPoly;
    QPoly r0 = field_->minpoly_q();
    QPoly r1 = coeffs_;
    detail::trim(r1);
    QPoly t0{0}, t1{1};
    while (!(r1.size() == 1)) {
      auto [q, r] = detail::poly_divmod(r0, r1);
      QPoly t2 = detail::poly_sub_mul(t0, q, t1);
      r0 = std::move(r1);
      r1 = std::move(r);
      t0 = std::move(t1);
      t1 = std::move(t2);
      if (r1.empty()) throw std::logic_error("inverse: element not invertible (Phi_N reducible?)");
    }
    const mpq_class c = r1[0];
    for (auto& v : t1) v /= c;
    t1 = detail::poly_mod(t1, field_->minpoly_q());
    return CycloNum(field_, t1);
  }

  friend CycloNum operator/(const CycloNum& a, const CycloNum& b) { return a * b.inverse(); }

  [[nodiscard]] CycloNum pow(unsigned long k) const {
    CycloNum result(field_, Rational(1));
    CycloNum base = *this;
    while (k > 0) {
      if (k & 1UL) result *= base;
      k >>= 1;
      if (k) base *= base;
    }
    return result;
  }

  /// Image in Q(zeta_M) for a multiple M of the conductor.
  [[nodiscard]] CycloNum lift(const FieldPtr& target) const {
    const unsigned long n = conductor();
    const unsigned long m = target->conductor();
    if (m % n != 0) throw std::invalid_argument("lift: target conductor must be a multiple");
    if (m == n) return CycloNum(target, coeffs_);
    const unsigned long s = m / n;
    std::vector<mpq_class> poly(std::max<std::size_t>(s * coeffs_.size(), target->degree()), 0);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) poly[i * s] = coeffs_[i];
    return CycloNum(target, std::move(poly));
  }

  /// Value at the primitive root exp(2 pi i / N).
  [[nodiscard]] std::complex<double> numeric() const {
    const double theta = 2.0 * std::numbers::pi / static_cast<double>(conductor());
    std::complex<double> acc = 0;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      if (sgn(coeffs_[i]) == 0) continue;
      acc += coeffs_[i].get_d() * std::polar(1.0, theta * static_cast<double>(i));
    }
    return acc;
  }

  friend bool operator==(const CycloNum& a, const CycloNum& b) {
    a.check_same(b);
    return a.coeffs_ == b.coeffs_;
  }
  friend bool operator!=(const CycloNum& a, const CycloNum& b) { return !(a == b); }

  /// Total order on canonical coefficient vectors (for exact set membership).
  friend bool operator<(const CycloNum& a, const CycloNum& b) {
    a.check_same(b);
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
      const int c = cmp(a.coeffs_[i], b.coeffs_[i]);
      if (c != 0) return c < 0;
    }
    return false;
  }

  [[nodiscard]] std::string str() const {
    std::string out;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      if (sgn(coeffs_[i]) == 0) continue;
      std::string term = Rational(coeffs_[i]).str();
      if (i > 0) term = "(" + term + ")*z^" + std::to_string(i);
      out += out.empty() ? term : " + " + term;
    }
    return out.empty() ? "0" : out;
  }

 private:
  void check_same(const CycloNum& o) const {
    if (field_ != o.field_ && (field_ == nullptr || o.field_ == nullptr || field_->conductor() != o.field_->conductor()))
      throw std::invalid_argument("mixed-field cyclotomic operands");
  }

  FieldPtr field_;
  std::vector<mpq_class> coeffs_;
};

inline CycloNum zero_like(const CycloNum& x) { return CycloNum(x.field()); }
inline CycloNum one_like(const CycloNum& x) { return CycloNum(x.field(), Rational(1)); }

inline unsigned long lcm_all(const std::vector<unsigned long>& v) {
  unsigned long l = 1;
  for (auto m : v) l = std::lcm(l, m);
  return l;
}

}  // namespace reflekt
