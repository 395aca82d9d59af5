#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "reflekt/engine.hpp"
#include "reflekt/group.hpp"
#include "reflekt/linalg.hpp"

namespace reflekt {

/// A computed property contradicts a theorem-level identity.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// f = omega o h for the linear embedding h = A (p x n, rank n).
struct ReflectionMapSpec {
  GroupSpec group;
  Matrix<Rational> A;
  std::string name;

  ReflectionMapSpec() = default;
  ReflectionMapSpec(GroupSpec g, Matrix<Rational> a, std::string label = {})
      : group(std::move(g)), A(std::move(a)), name(std::move(label)) {
    if (A.rows() != group.p())
      throw std::invalid_argument("embedding has " + std::to_string(A.rows()) + " rows but the group has " +
                                  std::to_string(group.p()) + " moduli");
    if (A.cols() == 0) throw std::invalid_argument("embedding needs at least one column");
    if (rank(A) != A.cols()) throw std::domain_error("embedding matrix does not have full column rank");
  }

  /// Graph embedding x -> (x, Hx).
  static ReflectionMapSpec graph(std::vector<unsigned long> moduli, const Matrix<Rational>& H, std::string label = {}) {
    return ReflectionMapSpec(GroupSpec(std::move(moduli)), Matrix<Rational>::identity(H.cols(), Rational(0)).vstack(H),
                             std::move(label));
  }

  [[nodiscard]] std::size_t n() const { return A.cols(); }
  [[nodiscard]] std::size_t p() const { return A.rows(); }
};

inline bool operator==(const ReflectionMapSpec& a, const ReflectionMapSpec& b) {
  return a.group == b.group && a.A == b.A && a.name == b.name;
}

inline Rational lift_rational(const Rational&, const Rational& r) { return r; }
inline CycloNum lift_rational(const CycloNum& like, const Rational& r) { return CycloNum(like.field(), r); }

/// Rational data of A split by the rows where g acts nontrivially.
struct RowSplit {
  std::size_t rank_R = 0;     // rows with xi_i != 1
  Subspace<Rational> V;       // ker R_g
  Subspace<Rational> kerS;    // kernel of the rows with xi_i = 1
};

/// Evaluates f and caches the per-pattern rational data; shared by refmap and certify.
class RefMap {
 public:
  explicit RefMap(ReflectionMapSpec spec) : spec_(std::move(spec)) {
    left_kernel_ = left_kernel_basis(spec_.A).basis();
  }

  [[nodiscard]] const ReflectionMapSpec& spec() const { return spec_; }
  [[nodiscard]] const GroupSpec& group() const { return spec_.group; }
  [[nodiscard]] const Matrix<Rational>& A() const { return spec_.A; }
  [[nodiscard]] std::size_t n() const { return spec_.n(); }
  [[nodiscard]] std::size_t p() const { return spec_.p(); }
  /// Canonical left kernel N of A (reduced echelon rows).
  [[nodiscard]] const Matrix<Rational>& left_kernel() const { return left_kernel_; }

  /// Rows where xi_i != 1.
  [[nodiscard]] static std::vector<bool> moving_rows(const GroupElement& a) {
    std::vector<bool> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] != 0;
    return out;
  }

  [[nodiscard]] std::shared_ptr<const RowSplit> split(const GroupElement& a) const {
    auto key = moving_rows(a);
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    std::vector<std::size_t> r, s;
    for (std::size_t i = 0; i < p(); ++i) (key[i] ? r : s).push_back(i);
    auto out = std::make_shared<RowSplit>();
    const auto R = A().select_rows(r);
    out->V = kernel_basis(R);
    out->rank_R = n() - out->V.dim();
    out->kerS = kernel_basis(A().select_rows(s));
    cache_.emplace(std::move(key), out);
    return out;
  }

  /// M_g = N D_g A over the given ring.
  template <class Ring>
  [[nodiscard]] Matrix<typename Ring::value_type> branch_matrix(const Ring& ring, const GroupElement& a) const {
    return scale_cols(embed(ring, left_kernel_), eigenvalues(ring, group(), a)) * embed(ring, A());
  }

  /// D_g A over the given ring.
  template <class Ring>
  [[nodiscard]] Matrix<typename Ring::value_type> moved_embedding(const Ring& ring, const GroupElement& a) const {
    return scale_rows(eigenvalues(ring, group(), a), embed(ring, A()));
  }

  /// rank M_g, certified against the bound min(rank R_g, p - n).
  [[nodiscard]] std::size_t branch_rank(const GroupElement& a) const {
    const auto sp = split(a);
    if (sp->kerS.is_zero()) return sp->rank_R;  // then ker M_g = V_g
    const std::size_t bound = std::min(sp->rank_R, p() - n());
    return certified_rank(group().conductor(), zeta_exponents(group(), {a}),
                          [&](const auto& ring) { return branch_matrix(ring, a); }, bound);
  }

  /// f(x) for x with entries in Q(zeta_L).
  template <class T>
  [[nodiscard]] std::vector<T> eval(const std::vector<T>& x) const {
    if (x.size() != n()) throw std::invalid_argument("point has wrong dimension");
    const T zero = zero_like(x.at(0));
    auto Ax = A().map([&](const Rational& r) { return lift_rational(zero, r); }, zero).apply(x);
    std::vector<T> out;
    for (std::size_t i = 0; i < p(); ++i) out.push_back(power(Ax[i], group().modulus(i)));
    return out;
  }

 private:
  template <class T>
  static T power(const T& x, unsigned long k) {
    T r = one_like(x);
    for (unsigned long i = 0; i < k; ++i) r = r * x;
    return r;
  }

  ReflectionMapSpec spec_;
  Matrix<Rational> left_kernel_;
  mutable std::mutex mu_;
  mutable std::map<std::vector<bool>, std::shared_ptr<RowSplit>> cache_;
};

/// dim ker df_x = dim {u : (Au)_i = 0 for i outside the facet of Ax}.
inline std::size_t corank_at(const ReflectionMapSpec& spec, const std::vector<Rational>& x) {
  if (x.size() != spec.n()) throw std::invalid_argument("point has wrong dimension");
  const auto y = spec.A.apply(x);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < spec.p(); ++i)
    if (!(spec.group.modulus(i) >= 2 && y[i].is_zero())) rows.push_back(i);
  return kernel_basis(spec.A.select_rows(rows)).dim();
}

inline std::size_t corank_at(const ReflectionMapSpec& spec) {
  return corank_at(spec, std::vector<Rational>(spec.n(), Rational(0)));
}

inline std::size_t rank_of_group(const ReflectionMapSpec& spec) { return spec.group.rank(); }

/// C^perp of the origin facet lies in the image of dh_0.
inline bool is_essential(const ReflectionMapSpec& spec) {
  Matrix<Rational> m = spec.A;
  for (auto i : spec.group.hyperplanes()) {
    Matrix<Rational> e(spec.p(), 1, Rational(0));
    e(i, 0) = Rational(1);
    m = m.hstack(e);
  }
  return rank(m) == spec.n();
}

/// Exact vector over Q(zeta_L) together with the element it belongs to.
struct Witness {
  GroupElement g;
  std::vector<CycloNum> vector;
  std::size_t index = 0;                 // hyperplane index, for one-to-orbit witnesses
  std::vector<GroupElement> tuple;       // multiple-point witnesses
};

namespace detail {

/// A basis vector of ker M_g outside V_g, exactly.
inline std::vector<CycloNum> strict_direction(const RefMap& rm, const GroupElement& a,
                                              const std::vector<Rational>* extra_row = nullptr) {
  const ExactRing ring(rm.group().conductor(), zeta_exponents(rm.group(), {a}));
  auto M = rm.branch_matrix(ring, a);
  if (extra_row) M.append_row(embed(ring, *extra_row));
  const auto K = kernel_basis(M);
  const auto V = lift(rm.split(a)->V, ring.zero());
  for (std::size_t k = 0; k < K.dim(); ++k)
    if (!V.contains(K.vector(k))) return K.vector(k);
  throw std::logic_error("no strict direction although ranks differ");
}

template <class Pred>
std::optional<std::uint64_t> first_failure(std::uint64_t count, const RunOptions& opt, Pred&& fails) {
  std::atomic<bool> stop{false};
  std::vector<char> flags(count, 0);
  parallel_for(count, opt.jobs, [&](std::size_t k) {
    if (k == 0) return;  // identity
    if (fails(k)) {
      flags[k] = 1;
      if (opt.early_exit) stop = true;
    }
  }, opt.early_exit ? &stop : nullptr);
  for (std::uint64_t k = 0; k < count; ++k)
    if (flags[k]) return k;
  return std::nullopt;
}

}  // namespace detail

struct PropertyResult {
  bool holds = true;
  std::optional<Witness> witness;
  std::string note;
};

/// Y cap gY subset Fix g for every g (Y = col A); witness w = D_g A x in Y cap gY outside Fix g.
inline PropertyResult is_injective(const RefMap& rm, const RunOptions& opt = {}) {
  const auto& G = rm.group();
  check_budget(G.order(), opt);
  auto bad = detail::first_failure(G.order(), opt, [&](std::uint64_t k) {
    const auto a = G.element(k);
    return rm.branch_rank(a) < rm.split(a)->rank_R;
  });
  PropertyResult r;
  if (!bad) return r;
  r.holds = false;
  const auto a = G.element(*bad);
  const auto x = detail::strict_direction(rm, a);
  const ExactRing ring(G.conductor(), zeta_exponents(G, {a}));
  r.witness = Witness{a, rm.moved_embedding(ring, a).apply(x)};
  return r;
}

/// Y cap gY cap {y_i = 0} subset Fix g for every g and hyperplane i.
inline PropertyResult one_to_orbit_over_A(const RefMap& rm, const RunOptions& opt = {}) {
  const auto& G = rm.group();
  check_budget(G.order(), opt);
  const auto hyper = G.hyperplanes();
  std::vector<std::size_t> failing_index(G.order(), 0);
  auto bad = detail::first_failure(G.order(), opt, [&](std::uint64_t k) {
    const auto a = G.element(k);
    const auto sp = rm.split(a);
    if (sp->kerS.is_zero() || rm.branch_rank(a) == sp->rank_R) return false;
    for (auto i : hyper) {
      const auto row = rm.A().row(i);
      // rows with xi_i = 1 stay; R_g plus row i bounds the stacked rank
      std::vector<std::size_t> rr;
      for (std::size_t j = 0; j < rm.p(); ++j)
        if (a[j] != 0) rr.push_back(j);
      auto R = rm.A().select_rows(rr);
      R.append_row(row);
      const std::size_t upper = rank(R);
      const std::size_t bound = std::min(upper, rm.p() - rm.n() + 1);
      const std::size_t got = certified_rank(G.conductor(), zeta_exponents(G, {a}), [&](const auto& ring) {
        auto M = rm.branch_matrix(ring, a);
        M.append_row(embed(ring, row));
        return M;
      }, bound);
      if (got < upper) {
        failing_index[k] = i;
        return true;
      }
    }
    return false;
  });
  PropertyResult r;
  if (!bad) {
    r.note = "no witness found among linear monogerm data";
    return r;
  }
  r.holds = false;
  const auto a = G.element(*bad);
  const auto row = rm.A().row(failing_index[*bad]);
  const auto x = detail::strict_direction(rm, a, &row);
  const ExactRing ring(G.conductor(), zeta_exponents(G, {a}));
  r.witness = Witness{a, rm.moved_embedding(ring, a).apply(x), failing_index[*bad], {}};
  return r;
}

/// Smallest k with kn - (k-1)p < 0, capped at |G|.
inline std::size_t default_kmax(const ReflectionMapSpec& spec) {
  const long n = static_cast<long>(spec.n()), p = static_cast<long>(spec.p());
  std::uint64_t cap = spec.group.order();
  for (long k = 2;; ++k) {
    if (static_cast<std::uint64_t>(k) >= cap) return static_cast<std::size_t>(std::max<std::uint64_t>(cap, 2));
    if (k * n - (k - 1) * p < 0) return static_cast<std::size_t>(k);
  }
}

namespace detail {

/// Checks the k-tuple (1, g_2, ..., g_k): returns true if the solution space of
/// g_1 A x_1 = ... = g_k A x_k leaves the big diagonal and the difference map is not
/// surjective.
inline bool tuple_fails(const RefMap& rm, const std::vector<GroupElement>& tuple) {
  const auto& G = rm.group();
  const std::size_t k = tuple.size(), n = rm.n(), p = rm.p();
  const ExactRing ring(G.conductor(), zeta_exponents(G, tuple));
  std::vector<Matrix<CycloNum>> blocks;
  for (const auto& a : tuple) blocks.push_back(rm.moved_embedding(ring, a));
  Matrix<CycloNum> E((k - 1) * p, k * n, ring.zero());
  for (std::size_t t = 0; t + 1 < k; ++t)
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        E(t * p + i, t * n + j) = blocks[t](i, j);
        E(t * p + i, (t + 1) * n + j) = -blocks[t + 1](i, j);
      }
  const auto S = kernel_basis(E);
  if (S.is_zero()) return false;
  for (std::size_t u = 0; u < k; ++u)
    for (std::size_t v = u + 1; v < k; ++v) {
      // is S inside {x_u = x_v}?
      bool inside = true;
      for (std::size_t b = 0; b < S.dim() && inside; ++b) {
        const auto vec = S.vector(b);
        for (std::size_t j = 0; j < n; ++j)
          if (vec[u * n + j] != vec[v * n + j]) {
            inside = false;
            break;
          }
      }
      if (inside) return false;
    }
  return rank(E) < (k - 1) * p;
}

}  // namespace detail

/// Multi-transversality of g_1 h x ... x g_k h off the big diagonal, 2 <= k <= k_max.
inline PropertyResult orbit_normal_crossings(const RefMap& rm, std::size_t k_max, const RunOptions& opt = {}) {
  if (k_max < 2) throw std::invalid_argument("k_max must be at least 2");
  const auto& G = rm.group();
  check_budget(G.order(), opt);
  const std::size_t n = rm.n(), p = rm.p();
  // k = 2: the pair (1, g) has off-diagonal solutions iff ker M_g is not inside V_g; the
  // difference map [A | -D_g A] then has rank 2n - dim ker M_g.
  std::vector<char> active(G.order(), 0);
  std::vector<char> fail2(G.order(), 0);
  parallel_for(G.order(), opt.jobs, [&](std::size_t k) {
    if (k == 0) return;
    const auto a = G.element(k);
    const auto sp = rm.split(a);
    const std::size_t r = rm.branch_rank(a);
    if (r < sp->rank_R) {
      active[k] = 1;
      if (n + r < p) fail2[k] = 1;
    }
  });
  PropertyResult res;
  for (std::uint64_t k = 1; k < G.order(); ++k)
    if (fail2[k]) {
      res.holds = false;
      res.witness = Witness{G.element(k), {}, 0, {G.element(0), G.element(k)}};
      return res;
    }
  std::vector<std::uint64_t> act;
  for (std::uint64_t k = 1; k < G.order(); ++k)
    if (active[k]) act.push_back(k);
  auto quotient_active = [&](std::uint64_t x, std::uint64_t y) {
    const auto a = G.element(x), b = G.element(y);
    GroupElement c(G.p());
    for (std::size_t i = 0; i < G.p(); ++i) c[i] = (b[i] + G.modulus(i) - a[i]) % G.modulus(i);
    return active[G.index_of(c)] != 0;
  };
  // With n = p every block of the difference map is invertible, so it has full row rank.
  if (n == p) return res;
  std::uint64_t visited = 0;
  // (1, g_2, ..., g_k) is only worth an exact check when all pairwise quotients are active:
  // enumerate those cliques depth-first, one tuple size at a time so the witness has minimal k.
  std::vector<std::size_t> clique;
  std::function<bool(std::size_t, std::size_t)> grow = [&](std::size_t start, std::size_t want) -> bool {
    if (clique.size() == want) {
      std::vector<GroupElement> tuple{G.element(0)};
      for (auto c : clique) tuple.push_back(G.element(act[c]));
      if (detail::tuple_fails(rm, tuple)) {
        res.holds = false;
        res.witness = Witness{tuple[1], {}, 0, tuple};
        return true;
      }
      return false;
    }
    for (std::size_t c = start; c < act.size(); ++c) {
      if (act.size() - c < want - clique.size()) break;
      if (++visited > opt.budget) throw BudgetExceeded(visited, opt.budget);
      bool ok = true;
      for (auto u : clique)
        if (!(ok = quotient_active(act[u], act[c]))) break;
      if (!ok) continue;
      clique.push_back(c);
      const bool hit = grow(c + 1, want);
      clique.pop_back();
      if (hit) return true;
    }
    return false;
  };
  for (std::size_t k = 3; k <= k_max && k - 1 <= act.size(); ++k)
    if (grow(0, k - 1)) return res;
  return res;
}

inline PropertyResult orbit_normal_crossings(const RefMap& rm, const RunOptions& opt = {}) {
  return orbit_normal_crossings(rm, default_kmax(rm.spec()), opt);
}

inline bool has_normal_crossings(const RefMap& rm, const RunOptions& opt = {}) {
  return orbit_normal_crossings(rm, opt).holds && one_to_orbit_over_A(rm, opt).holds;
}

struct Obstruction {
  std::string tag;
  std::string conclusion;
  bool triggered = false;
};

/// Germs of corank one that are essential, with a single nontrivial modulus >= 3.
inline bool essential_corank_one_higher_order(const ReflectionMapSpec& spec, std::size_t corank, bool essential) {
  if (corank != 1 || !essential) return false;
  const auto h = spec.group.hyperplanes();
  return h.size() == 1 && spec.group.modulus(h[0]) >= 3;
}

inline std::vector<Obstruction> obstruction_report(const ReflectionMapSpec& spec) {
  const long n = static_cast<long>(spec.n()), p = static_cast<long>(spec.p());
  const long rk = static_cast<long>(rank_of_group(spec));
  const std::size_t cr = corank_at(spec);
  const bool special = cr >= 2 || essential_corank_one_higher_order(spec, cr, is_essential(spec));
  return {
      {"group_rank_exceeds_twice_codimension", "not injective", rk > 2 * (p - n)},
      {"corank_exceeds_codimension", "not injective", static_cast<long>(cr) > p - n},
      {"group_rank_exceeds_twice_codimension_plus_one", "no normal crossings", rk > 2 * (p - n) + 1},
      {"corank_two_or_higher_order_fold", "not stable", special},
      {"low_target_dimension", "not A-finite", special && p < 2 * n - 1},
  };
}

struct GeometryReport {
  std::size_t corank = 0;
  std::size_t group_rank = 0;
  bool essential = false;
  PropertyResult injective;
  PropertyResult one_to_orbit;
  PropertyResult orbit_normal_crossings;
  bool normal_crossings = false;
  std::vector<Obstruction> obstructions;
};

inline bool triggered(const std::vector<Obstruction>& obs, const std::string& conclusion) {
  for (const auto& o : obs)
    if (o.triggered && o.conclusion == conclusion) return true;
  return false;
}

inline GeometryReport analyze(const RefMap& rm, const RunOptions& opt = {}) {
  GeometryReport r;
  r.corank = corank_at(rm.spec());
  r.group_rank = rank_of_group(rm.spec());
  r.essential = is_essential(rm.spec());
  r.injective = is_injective(rm, opt);
  r.one_to_orbit = one_to_orbit_over_A(rm, opt);
  r.orbit_normal_crossings = orbit_normal_crossings(rm, opt);
  r.normal_crossings = r.one_to_orbit.holds && r.orbit_normal_crossings.holds;
  r.obstructions = obstruction_report(rm.spec());
  if (r.corank > std::min(rm.n(), r.group_rank)) throw InvariantViolation("corank exceeds min(n, rank G)");
  if (r.essential != (r.corank == r.group_rank)) throw InvariantViolation("essentiality disagrees with corank");
  if (r.injective.holds && triggered(r.obstructions, "not injective"))
    throw InvariantViolation("injective germ violates a non-injectivity obstruction");
  if (r.normal_crossings && triggered(r.obstructions, "no normal crossings"))
    throw InvariantViolation("normal crossings despite the group-rank obstruction");
  return r;
}

}  // namespace reflekt
