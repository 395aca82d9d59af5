#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "reflekt/engine.hpp"
#include "reflekt/linalg.hpp"

// Root-of-unity conditions on the matrix H of a graph embedding A = [I; H].
// A root tuple stores exponents: xi_j = zeta_{m_j}^{xi[j]}, eta_i = zeta_{m_{n+i}}^{eta[i]}.

namespace reflekt {

struct RootTuple {
  std::vector<unsigned long> xi, eta;
  std::vector<unsigned long> xi2, eta2;  // second tuple, only for C4
};

struct ConditionResult {
  bool holds = true;
  std::optional<RootTuple> violation;
  std::uint64_t tuples = 0;      // tuples enumerated (after exact reductions)
  std::uint64_t rank_tests = 0;  // tuples that needed a rank computation
  std::uint64_t divergences = 0; // C4 only: literal vs stacked matrix disagreements
};

namespace detail {

inline std::string exps(const std::vector<unsigned long>& v) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ')';
  return os.str();
}

/// Mixed-radix odometer over [0, m_0) x [0, m_1) x ...; false after the last tuple.
inline bool next_tuple(std::vector<unsigned long>& t, const std::vector<unsigned long>& m) {
  for (std::size_t k = t.size(); k-- > 0;) {
    if (++t[k] < m[k]) return true;
    t[k] = 0;
  }
  return false;
}

inline std::uint64_t count_tuples(const std::vector<unsigned long>& m) {
  std::uint64_t c = 1;
  for (auto x : m) {
    if (c > (std::uint64_t{1} << 62) / std::max<unsigned long>(x, 1)) return std::uint64_t{1} << 62;
    c *= x;
  }
  return c;
}

inline bool is_real_root(unsigned long m, unsigned long a) { return (2 * a) % m == 0; }

struct Setting {
  const Matrix<Rational>* H;
  std::vector<unsigned long> mx, me;  // moduli of xi and eta
  unsigned long N = 1;

  Setting(const Matrix<Rational>& h, const std::vector<unsigned long>& m, std::size_t rows_expected,
          const char* who) : H(&h) {
    const std::size_t n = h.cols();
    if (n == 0 || h.rows() != rows_expected) throw std::invalid_argument(std::string(who) + ": H has the wrong shape");
    if (m.size() != n + h.rows())
      throw std::invalid_argument(std::string(who) + ": expected " + std::to_string(n + h.rows()) + " moduli");
    for (auto x : m) {
      if (x == 0) throw std::invalid_argument(std::string(who) + ": moduli must be positive");
      N = std::lcm(N, x);
    }
    mx.assign(m.begin(), m.begin() + static_cast<long>(n));
    me.assign(m.begin() + static_cast<long>(n), m.end());
  }

  [[nodiscard]] unsigned long ex(std::size_t j, unsigned long a) const { return (N / mx[j]) * a; }
  [[nodiscard]] unsigned long ee(std::size_t i, unsigned long a) const { return (N / me[i]) * a; }

  /// (H_ij (eta_i - xi_j)) restricted to the listed columns.
  template <class Ring>
  Matrix<typename Ring::value_type> block(const Ring& ring, const std::vector<unsigned long>& xi,
                                          const std::vector<unsigned long>& eta,
                                          const std::vector<std::size_t>& cols) const {
    Matrix<typename Ring::value_type> M(H->rows(), cols.size(), ring.zero());
    for (std::size_t i = 0; i < H->rows(); ++i) {
      const auto e = ring.zeta(ee(i, eta[i]));
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const auto& h = (*H)(i, cols[c]);
        if (!h.is_zero()) M(i, c) = ring.from(h) * (e - ring.zeta(ex(cols[c], xi[cols[c]])));
      }
    }
    return M;
  }

  [[nodiscard]] std::vector<unsigned long> exponents(const std::vector<unsigned long>& xi,
                                                     const std::vector<unsigned long>& eta) const {
    std::vector<unsigned long> e;
    for (std::size_t j = 0; j < xi.size(); ++j) e.push_back(ex(j, xi[j]));
    for (std::size_t i = 0; i < eta.size(); ++i) e.push_back(ee(i, eta[i]));
    return e;
  }
};

inline std::vector<std::size_t> all_columns(std::size_t n) {
  std::vector<std::size_t> c(n);
  std::iota(c.begin(), c.end(), 0);
  return c;
}

/// Shared enumeration for C2 (square H, singular means det = 0) and C3 (rank < n - 1).
/// `skip` filters tuples that cannot matter; `bad` is called on singular tuples.
template <class Skip, class Bad>
void scan_singular(const Setting& s, std::uint64_t budget, ConditionResult& res, Skip&& skip, Bad&& bad) {
  const std::size_t n = s.H->cols(), r = s.H->rows();
  const std::uint64_t total = count_tuples(s.mx) * count_tuples(s.me);
  if (total > budget) throw BudgetExceeded(total, budget);
  const auto cols = all_columns(n);
  std::vector<unsigned long> xi(n, 0), eta(r, 0);
  do {
    do {
      ++res.tuples;
      if (skip(xi, eta)) continue;
      ++res.rank_tests;
      const auto rk = certified_rank(s.N, s.exponents(xi, eta),
                                     [&](const auto& ring) { return s.block(ring, xi, eta, cols); }, r);
      if (rk < r && bad(xi, eta)) return;
    } while (next_tuple(eta, s.me));
  } while (next_tuple(xi, s.mx));
}

inline std::size_t ones(const std::vector<unsigned long>& t) {
  return static_cast<std::size_t>(std::count(t.begin(), t.end(), 0UL));
}

}  // namespace detail

inline std::string to_string(const RootTuple& t) {
  std::string s = "xi=" + detail::exps(t.xi) + " eta=" + detail::exps(t.eta);
  if (!t.xi2.empty() || !t.eta2.empty()) s += " xi'=" + detail::exps(t.xi2) + " eta'=" + detail::exps(t.eta2);
  return s;
}

/// det(H_ij (eta_i - xi_j)) = 0 forces at least n of the 2n roots to equal 1.
inline ConditionResult check_C2(const Matrix<Rational>& H, const std::vector<unsigned long>& m,
                                std::uint64_t budget = default_budget()) {
  const detail::Setting s(H, m, H.cols(), "check_C2");
  const std::size_t n = H.cols();
  ConditionResult res;
  detail::scan_singular(
      s, budget, res,
      [&](const auto& xi, const auto& eta) { return detail::ones(xi) + detail::ones(eta) >= n; },
      [&](const auto& xi, const auto& eta) {
        res.holds = false;
        res.violation = RootTuple{xi, eta, {}, {}};
        return true;
      });
  return res;
}

/// rank(H_ij (eta_i - xi_j)) < n - 1 forces at least n of the 2n - 1 roots to equal 1.
inline ConditionResult check_C3(const Matrix<Rational>& H, const std::vector<unsigned long>& m,
                                std::uint64_t budget = default_budget()) {
  if (H.cols() < 2) throw std::invalid_argument("check_C3: H must have at least two columns");
  const detail::Setting s(H, m, H.cols() - 1, "check_C3");
  const std::size_t n = H.cols();
  ConditionResult res;
  detail::scan_singular(
      s, budget, res,
      [&](const auto& xi, const auto& eta) { return detail::ones(xi) + detail::ones(eta) >= n; },
      [&](const auto& xi, const auto& eta) {
        res.holds = false;
        res.violation = RootTuple{xi, eta, {}, {}};
        return true;
      });
  return res;
}

/// Pairs of root tuples: rank [diag(xi - xi'); (H_ij(eta_i - xi_j)); (H_ij(eta'_i - xi'_j))] < n
/// forces at least n indices where one of the two roots equals 1.
///
/// A kernel vector vanishes on every column j with xi_j != xi'_j, so the rank drops iff the
/// two H blocks restricted to K = {j : xi_j = xi'_j} lose rank. The enumeration runs over
/// K, xi on K, eta and eta'. Columns outside K contribute the fewest possible indices: none
/// when m_j >= 3 (two distinct roots, both != 1), one when m_j = 2, and m_j = 1 forces j in K.
inline ConditionResult check_C4(const Matrix<Rational>& H, const std::vector<unsigned long>& m,
                                std::uint64_t budget = default_budget()) {
  if (H.cols() < 2) throw std::invalid_argument("check_C4: H must have at least two columns");
  const detail::Setting s(H, m, H.cols() - 1, "check_C4");
  const std::size_t n = H.cols(), r = H.rows();
  ConditionResult res;
  const std::uint64_t eta_pairs = detail::count_tuples(s.me) * detail::count_tuples(s.me);
  {
    const std::uint64_t predicted = (std::uint64_t{1} << n) * detail::count_tuples(s.mx) * eta_pairs;
    if (predicted > budget) throw BudgetExceeded(predicted, budget);
  }
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    std::vector<std::size_t> K;
    std::vector<unsigned long> mK;
    std::size_t forced = 0;  // indices outside K that must count
    bool feasible = true;
    for (std::size_t j = 0; j < n; ++j) {
      if (mask >> j & 1) {
        K.push_back(j);
        mK.push_back(s.mx[j]);
      } else if (s.mx[j] == 1) {
        feasible = false;
      } else if (s.mx[j] == 2) {
        ++forced;
      }
    }
    if (!feasible || forced >= n) continue;
    const bool full = K.size() == n;
    std::vector<unsigned long> xK(K.size(), 0), eta(r, 0), eta2(r, 0);
    do {
      std::vector<unsigned long> xi(n, 0);
      for (std::size_t c = 0; c < K.size(); ++c) xi[K[c]] = xK[c];
      const std::size_t base = forced + detail::ones(xK);
      if (base >= n) continue;
      do {
        do {
          ++res.tuples;
          if (full && eta == eta2) continue;
          std::size_t cnt = base;
          for (std::size_t i = 0; i < r; ++i) cnt += (eta[i] == 0 || eta2[i] == 0);
          if (cnt >= n) continue;
          ++res.rank_tests;
          auto literal = [&](const auto& ring) {
            auto top = s.block(ring, xi, eta, K);
            auto bottom = s.block(ring, xi, eta2, K);
            for (std::size_t i = 0; i < bottom.rows(); ++i) top.append_row(bottom.row(i));
            return top;
          };
          auto ex = s.exponents(xi, eta);
          for (std::size_t i = 0; i < r; ++i) ex.push_back(s.ee(i, eta2[i]));
          const std::size_t rk = certified_rank(s.N, ex, literal, std::min(K.size(), 2 * r));
          if (rk >= K.size()) continue;
          // The stacked variant also carries (eta_i - eta'_i) H_i, which lies in the row space
          // of the literal matrix once x is supported on K; record any disagreement.
          auto stacked = [&](const auto& ring) {
            auto M = literal(ring);
            for (std::size_t i = 0; i < r; ++i) {
              typename std::decay_t<decltype(ring)>::value_type d =
                  ring.zeta(s.ee(i, eta[i])) - ring.zeta(s.ee(i, eta2[i]));
              std::vector<typename std::decay_t<decltype(ring)>::value_type> row;
              for (auto j : K) row.push_back(ring.from(H(i, j)) * d);
              M.append_row(row);
            }
            return M;
          };
          if (rank(stacked(ExactRing(s.N, ex))) != rk) ++res.divergences;
          res.holds = false;
          RootTuple t{xi, eta, xi, eta2};
          for (std::size_t j = 0; j < n; ++j) {
            if (mask >> j & 1) continue;
            if (s.mx[j] == 2) {
              t.xi[j] = 1;
              t.xi2[j] = 0;
            } else {
              t.xi[j] = 1;
              t.xi2[j] = 2;
            }
          }
          res.violation = std::move(t);
          return res;
        } while (detail::next_tuple(eta2, s.me));
      } while (detail::next_tuple(eta, s.me));
    } while (detail::next_tuple(xK, mK));
  }
  return res;
}

struct CoprimeLemmaReport {
  bool square = true;  // n x n H: C2 lemma; (n-1) x n H: C3 and C4 lemma
  ConditionResult c2, c3, c4;
  bool reals_hold = true;  // singular tuples have >= n + 1 entries in {1, -1}
  std::optional<RootTuple> reals_counterexample;
  [[nodiscard]] bool all_pass() const { return c2.holds && c3.holds && c4.holds && reals_hold; }
};

/// Brute-force check of the coprime-exponent lemmas for one (H, m).
inline CoprimeLemmaReport verify_coprime_lemmas(const Matrix<Rational>& H, const std::vector<unsigned long>& m,
                                                std::uint64_t budget = default_budget()) {
  if (auto w = c1_violation(H)) {
    std::ostringstream os;
    os << "H violates the maximal-rank condition on rows " << detail::exps({w->rows.begin(), w->rows.end()})
       << " and columns " << detail::exps({w->cols.begin(), w->cols.end()});
    throw std::invalid_argument(os.str());
  }
  if (!pairwise_coprime(m)) throw std::invalid_argument("moduli must be pairwise coprime");
  CoprimeLemmaReport rep;
  const std::size_t n = H.cols();
  if (H.rows() == n) {
    rep.square = true;
    rep.c2 = check_C2(H, m, budget);
    const detail::Setting s(H, m, n, "verify_coprime_lemmas");
    ConditionResult scan;
    auto real_count = [&](const std::vector<unsigned long>& xi, const std::vector<unsigned long>& eta) {
      std::size_t c = 0;
      for (std::size_t j = 0; j < n; ++j) c += detail::is_real_root(s.mx[j], xi[j]);
      for (std::size_t i = 0; i < eta.size(); ++i) c += detail::is_real_root(s.me[i], eta[i]);
      return c;
    };
    detail::scan_singular(
        s, budget, scan, [&](const auto& xi, const auto& eta) { return real_count(xi, eta) >= n + 1; },
        [&](const auto& xi, const auto& eta) {
          rep.reals_hold = false;
          rep.reals_counterexample = RootTuple{xi, eta, {}, {}};
          return true;
        });
  } else if (H.rows() + 1 == n) {
    for (auto x : m)
      if (x % 2 == 0) throw std::invalid_argument("the C3/C4 lemma needs odd moduli");
    rep.square = false;
    rep.c3 = check_C3(H, m, budget);
    rep.c4 = check_C4(H, m, budget);
  } else {
    throw std::invalid_argument("H must be n x n or (n-1) x n");
  }
  return rep;
}

}  // namespace reflekt
