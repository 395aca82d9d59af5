#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "reflekt/cyclotomic.hpp"
#include "reflekt/group.hpp"
#include "reflekt/linalg.hpp"
#include "reflekt/modular.hpp"

namespace reflekt {

/// Enumeration refused because it would exceed the element budget.
class BudgetExceeded : public std::length_error {
 public:
  BudgetExceeded(std::uint64_t attempted, std::uint64_t budget)
      : std::length_error("enumeration of " + std::to_string(attempted) + " items exceeds budget " +
                          std::to_string(budget)),
        attempted_(attempted) {}
  [[nodiscard]] std::uint64_t attempted() const { return attempted_; }

 private:
  std::uint64_t attempted_;
};

inline constexpr std::uint64_t kDefaultBudget = 10'000'000;

/// Element cap; REFLEKT_BUDGET overrides the default.
inline std::uint64_t default_budget() {
  if (const char* env = std::getenv("REFLEKT_BUDGET")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0') return v;
  }
  return kDefaultBudget;
}

struct RunOptions {
  unsigned jobs = 1;
  std::uint64_t budget = default_budget();
  bool early_exit = false;
};

inline void check_budget(std::uint64_t count, const RunOptions& opt) {
  if (count > opt.budget) throw BudgetExceeded(count, opt.budget);
}

/// Runs f(i) for i in [0, count) on `jobs` threads. Work is handed out in chunks from an
/// atomic counter; callers store results by index so the merge order never depends on
/// scheduling. Setting *stop skips the remaining chunks.
template <class F>
void parallel_for(std::size_t count, unsigned jobs, F&& f, std::atomic<bool>* stop = nullptr) {
  if (count == 0) return;
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::min<std::size_t>(count, 256))));
  const std::size_t chunk = std::max<std::size_t>(1, count / (jobs * 16));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto worker = [&]() {
    try {
      while (!failed.load(std::memory_order_relaxed)) {
        if (stop && stop->load(std::memory_order_relaxed)) return;
        const std::size_t begin = next.fetch_add(chunk);
        if (begin >= count) return;
        const std::size_t end = std::min(count, begin + chunk);
        for (std::size_t i = begin; i < end; ++i) f(i);
      }
    } catch (...) {
      if (!failed.exchange(true)) error = std::current_exception();
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
}

template <class R, class F>
std::vector<R> parallel_map(std::size_t count, unsigned jobs, F&& f, std::atomic<bool>* stop = nullptr) {
  std::vector<R> out(count);
  parallel_for(count, jobs, [&](std::size_t i) { out[i] = f(i); }, stop);
  return out;
}

// Rings that the generic builders are instantiated over. Both expose zeta(e) = zeta_N^e
// for the group conductor N and the image of a rational.

/// Reduction Z[1/d][zeta_N] -> F_q.
class ModRing {
 public:
  using value_type = Fq;
  ModRing(unsigned long conductor, int index) : img_(ModularImage::get(conductor, index)) {}
  [[nodiscard]] Fq zero() const { return {0, img_->prime()}; }
  [[nodiscard]] Fq from(const Rational& r) const { return img_->from_rational(r); }
  [[nodiscard]] Fq zeta(unsigned long e) const { return img_->zeta_power(e); }
  [[nodiscard]] Fq from_cyclo(const CycloNum& x) const { return img_->from_cyclo(x); }
  [[nodiscard]] const ModularImage& image() const { return *img_; }

 private:
  std::shared_ptr<const ModularImage> img_;
};

/// Exact arithmetic in the subfield Q(zeta_L), L = N / d, that contains the needed roots.
class ExactRing {
 public:
  using value_type = CycloNum;
  /// Smallest field containing zeta_N^e for every listed exponent.
  ExactRing(unsigned long conductor, const std::vector<unsigned long>& exponents) : n_(conductor) {
    unsigned long d = n_;
    for (auto e : exponents) d = std::gcd(d, e % n_);
    if (d == 0) d = n_;
    d_ = d;
    field_ = CycloField::get(n_ / d_);
  }
  explicit ExactRing(unsigned long conductor) : ExactRing(conductor, {1}) {}

  [[nodiscard]] CycloNum zero() const { return CycloNum(field_); }
  [[nodiscard]] CycloNum from(const Rational& r) const { return CycloNum(field_, r); }
  [[nodiscard]] CycloNum zeta(unsigned long e) const {
    e %= n_;
    if (e % d_ != 0) throw std::logic_error("exact ring: root of unity outside the working field");
    return CycloNum::zeta_power(field_, e / d_);
  }
  [[nodiscard]] const FieldPtr& field() const { return field_; }

 private:
  unsigned long n_;
  unsigned long d_ = 1;
  FieldPtr field_;
};

/// All zeta exponents of the listed elements (for ExactRing).
inline std::vector<unsigned long> zeta_exponents(const GroupSpec& g, const std::vector<GroupElement>& els) {
  std::vector<unsigned long> e;
  for (const auto& a : els)
    for (std::size_t i = 0; i < g.p(); ++i) e.push_back(g.zeta_exponent(a, i));
  return e;
}

template <class Ring>
Matrix<typename Ring::value_type> embed(const Ring& ring, const Matrix<Rational>& m) {
  return m.map([&](const Rational& r) { return ring.from(r); }, ring.zero());
}

template <class Ring>
std::vector<typename Ring::value_type> embed(const Ring& ring, const std::vector<Rational>& v) {
  std::vector<typename Ring::value_type> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(ring.from(x));
  return out;
}

/// The eigenvalues xi_i of g as ring elements.
template <class Ring>
std::vector<typename Ring::value_type> eigenvalues(const Ring& ring, const GroupSpec& g, const GroupElement& a) {
  std::vector<typename Ring::value_type> xi;
  xi.reserve(g.p());
  for (std::size_t i = 0; i < g.p(); ++i) xi.push_back(ring.zeta(g.zeta_exponent(a, i)));
  return xi;
}

/// diag(d) * M.
template <class T>
Matrix<T> scale_rows(const std::vector<T>& d, Matrix<T> m) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = d[i] * m(i, j);
  return m;
}

/// M * diag(d).
template <class T>
Matrix<T> scale_cols(Matrix<T> m, const std::vector<T>& d) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = m(i, j) * d[j];
  return m;
}

inline constexpr int kModularTrials = 2;

/// Rank of build(ring) where the caller has proven rank <= bound over Q(zeta_N).
/// A modular image meeting the bound certifies equality; otherwise the exact ring decides.
template <class Build>
std::size_t certified_rank(unsigned long conductor, const std::vector<unsigned long>& exponents, Build&& build,
                           std::size_t bound) {
  for (int idx = 0; idx < kModularTrials; ++idx) {
    std::size_t r = 0;
    try {
      r = rank(build(ModRing(conductor, idx)));
    } catch (const std::domain_error&) {
      continue;  // prime divides a denominator
    }
    if (r > bound) throw std::logic_error("modular rank exceeds a proven upper bound");
    if (r == bound) return r;
  }
  const std::size_t r = rank(build(ExactRing(conductor, exponents)));
  if (r > bound) throw std::logic_error("exact rank exceeds a proven upper bound");
  return r;
}

}  // namespace reflekt
