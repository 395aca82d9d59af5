#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "reflekt/cyclotomic.hpp"
#include "reflekt/rational.hpp"

namespace reflekt {

namespace detail {

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline std::uint64_t powmod(std::uint64_t b, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  b %= m;
  while (e) {
    if (e & 1) r = mulmod(r, b, m);
    b = mulmod(b, b, m);
    e >>= 1;
  }
  return r;
}

/// Deterministic Miller-Rabin for 64-bit integers.
inline bool is_prime_u64(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    std::uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

}  // namespace detail

/// Element of the prime field F_q.
struct Fq {
  std::uint64_t v = 0;
  std::uint64_t q = 0;

  [[nodiscard]] bool is_zero() const { return v == 0; }
  [[nodiscard]] bool is_one() const { return v == 1; }
  [[nodiscard]] Fq inverse() const {
    if (v == 0) throw std::domain_error("division by zero in F_q");
    return {detail::powmod(v, q - 2, q), q};
  }
  friend Fq operator+(Fq a, Fq b) {
    std::uint64_t s = a.v + b.v;
    if (s >= a.q || s < a.v) s -= a.q;
    return {s, a.q};
  }
  friend Fq operator-(Fq a, Fq b) { return {a.v >= b.v ? a.v - b.v : a.v + (a.q - b.v), a.q}; }
  friend Fq operator-(Fq a) { return {a.v == 0 ? 0 : a.q - a.v, a.q}; }
  friend Fq operator*(Fq a, Fq b) { return {detail::mulmod(a.v, b.v, a.q), a.q}; }
  friend Fq operator/(Fq a, Fq b) { return a * b.inverse(); }
  Fq& operator+=(Fq o) { return *this = *this + o; }
  Fq& operator-=(Fq o) { return *this = *this - o; }
  Fq& operator*=(Fq o) { return *this = *this * o; }
  friend bool operator==(Fq a, Fq b) { return a.v == b.v; }
  friend bool operator!=(Fq a, Fq b) { return a.v != b.v; }
};

inline Fq zero_like(const Fq& x) { return {0, x.q}; }
inline Fq one_like(const Fq& x) { return {1, x.q}; }

/// Image of Z[1/d][zeta_N] in F_q under zeta_N -> w, with q = 1 mod N and w of exact order N.
///
/// A nonzero minor of the reduced matrix certifies a nonzero minor of the exact matrix,
/// so ranks computed here are lower bounds for the ranks over Q(zeta_N).
class ModularImage {
 public:
  /// The `index`-th prime q = 1 (mod N) above 2^61, with the smallest generator of order N.
  ModularImage(unsigned long conductor, int index) : conductor_(conductor) {
    const std::uint64_t n = conductor;
    std::uint64_t k = ((1ULL << 61) / n) + 1;
    int found = -1;
    while (true) {
      const std::uint64_t cand = k * n + 1;
      if (detail::is_prime_u64(cand) && ++found == index) {
        q_ = cand;
        break;
      }
      ++k;
    }
    const auto primes = prime_factors(conductor);
    const std::uint64_t cofactor = (q_ - 1) / n;
    for (std::uint64_t x = 2;; ++x) {
      const std::uint64_t w = detail::powmod(x, cofactor, q_);
      bool primitive = true;
      for (auto r : primes)
        if (detail::powmod(w, n / r, q_) == 1) primitive = false;
      if (n == 1 || primitive) {
        w_ = (n == 1) ? 1 : w;
        break;
      }
    }
    powers_.resize(n);
    std::uint64_t acc = 1;
    for (std::uint64_t e = 0; e < n; ++e) {
      powers_[e] = acc;
      acc = detail::mulmod(acc, w_, q_);
    }
  }

  [[nodiscard]] std::uint64_t prime() const { return q_; }
  [[nodiscard]] unsigned long conductor() const { return conductor_; }

  [[nodiscard]] Fq zeta_power(unsigned long e) const { return {powers_[e % conductor_], q_}; }

  [[nodiscard]] Fq root_of_unity(unsigned long m, long a) const {
    if (m == 0 || conductor_ % m != 0) throw std::invalid_argument("root_of_unity: modulus does not divide conductor");
    long am = a % static_cast<long>(m);
    if (am < 0) am += static_cast<long>(m);
    return zeta_power((conductor_ / m) * static_cast<unsigned long>(am));
  }

  /// Reduction of a rational; fails if q divides the denominator.
  [[nodiscard]] Fq from_rational(const Rational& r) const {
    const std::uint64_t den = mod_reduce(r.den(), q_);
    if (den == 0) throw std::domain_error("modular image: prime divides a denominator");
    const std::uint64_t num = mod_reduce(r.num(), q_);
    return Fq{num, q_} * Fq{den, q_}.inverse();
  }

  [[nodiscard]] Fq from_cyclo(const CycloNum& x) const {
    const unsigned long n = x.conductor();
    if (conductor_ % n != 0) throw std::invalid_argument("modular image: conductor mismatch");
    const unsigned long s = conductor_ / n;
    Fq acc{0, q_};
    for (std::size_t i = 0; i < x.coeffs().size(); ++i) {
      if (sgn(x.coeffs()[i]) == 0) continue;
      acc += from_rational(Rational(x.coeffs()[i])) * zeta_power(i * s);
    }
    return acc;
  }

  static std::shared_ptr<const ModularImage> get(unsigned long conductor, int index);

 private:
  unsigned long conductor_;
  std::uint64_t q_ = 0;
  std::uint64_t w_ = 1;
  std::vector<std::uint64_t> powers_;
};

inline std::shared_ptr<const ModularImage> ModularImage::get(unsigned long conductor, int index) {
  static std::mutex mu;
  static std::map<std::pair<unsigned long, int>, std::shared_ptr<const ModularImage>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(conductor, index);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto img = std::make_shared<const ModularImage>(conductor, index);
  cache.emplace(key, img);
  return img;
}

}  // namespace reflekt
