#pragma once

#include <algorithm>
#include <atomic>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "reflekt/engine.hpp"
#include "reflekt/refmap.hpp"

namespace reflekt {

enum class Status { CertifiedAFinite, CertifiedNotAFinite, Inconclusive };

inline std::string to_string(Status s) {
  switch (s) {
    case Status::CertifiedAFinite: return "CERTIFIED_AFINITE";
    case Status::CertifiedNotAFinite: return "CERTIFIED_NOT_AFINITE";
    default: return "INCONCLUSIVE";
  }
}

enum class BranchClass { Empty, OriginOnly, StrictLine, SingularCurve, Fat };

inline std::string to_string(BranchClass c) {
  switch (c) {
    case BranchClass::Empty: return "EMPTY";
    case BranchClass::OriginOnly: return "ORIGIN_ONLY";
    case BranchClass::StrictLine: return "STRICT_LINE";
    case BranchClass::SingularCurve: return "SINGULAR_CURVE";
    default: return "FAT";
  }
}

/// Strict points live on ker M_g minus V_g, singular ones on V_g (only if ker S_g != 0).
inline BranchClass classify(std::size_t dim_kerM, std::size_t dim_V, std::size_t dim_kerS) {
  if (dim_kerS == 0) return BranchClass::Empty;
  if (dim_kerM > dim_V) return dim_kerM == 1 ? BranchClass::StrictLine : BranchClass::Fat;
  if (dim_V > 0) return BranchClass::SingularCurve;
  return BranchClass::OriginOnly;
}

/// Exact data of one branch B_g(h).
struct BranchReport {
  GroupElement g;
  Matrix<CycloNum> M;
  Matrix<Rational> S;
  Matrix<Rational> R;
  std::size_t rank_M = 0, rank_S = 0, rank_R = 0;
  Subspace<CycloNum> kerM;
  Subspace<Rational> V;
  Subspace<Rational> kerS;
  BranchClass cls = BranchClass::Empty;
};

inline BranchReport branch_matrices(const RefMap& rm, const GroupElement& a) {
  rm.group().check(a);
  if (is_identity(a)) throw std::invalid_argument("branch_matrices: identity element has no branch");
  const ExactRing ring(rm.group().conductor(), zeta_exponents(rm.group(), {a}));
  BranchReport b;
  b.g = a;
  b.M = rm.branch_matrix(ring, a);
  std::vector<std::size_t> r, s;
  for (std::size_t i = 0; i < rm.p(); ++i) (a[i] != 0 ? r : s).push_back(i);
  b.S = rm.A().select_rows(s);
  b.R = rm.A().select_rows(r);
  b.kerM = kernel_basis(b.M);
  b.V = kernel_basis(b.R);
  b.kerS = kernel_basis(b.S);
  b.rank_M = rm.n() - b.kerM.dim();
  b.rank_R = rm.n() - b.V.dim();
  b.rank_S = rm.n() - b.kerS.dim();
  if (!lift(b.V, ring.zero()).is_subspace_of(b.kerM)) throw InvariantViolation("V_g is not inside ker M_g");
  b.cls = classify(b.kerM.dim(), b.V.dim(), b.kerS.dim());
  return b;
}

inline bool branch_in_origin_fiber(const BranchReport& b) {
  const bool strict_free = lift(b.V, b.kerM.basis().zero()).dim() == b.kerM.dim();
  return strict_free && (b.V.is_zero() || b.kerS.is_zero());
}

/// Per-branch dimensions from the certified fast path.
struct BranchSummary {
  GroupElement g;
  std::size_t rank_M = 0;
  std::size_t dim_kerM = 0;
  std::size_t dim_V = 0;
  std::size_t dim_kerS = 0;
  BranchClass cls = BranchClass::Empty;
};

inline BranchSummary summarize(const RefMap& rm, const GroupElement& a) {
  const auto sp = rm.split(a);
  BranchSummary s;
  s.g = a;
  s.dim_V = sp->V.dim();
  s.dim_kerS = sp->kerS.dim();
  s.rank_M = rm.branch_rank(a);
  s.dim_kerM = rm.n() - s.rank_M;
  s.cls = classify(s.dim_kerM, s.dim_V, s.dim_kerS);
  return s;
}

struct VerdictWitness {
  std::string kind;                  // strict_family | singular_family | shared_line | triple_line | normal_crossings
  GroupElement g;
  std::optional<GroupElement> other;
  std::vector<CycloNum> x0;
  std::vector<std::vector<CycloNum>> partners;  // points with the same image as x0
  std::size_t family_dim = 0;
  std::vector<GroupElement> tuple;
  std::string detail;
};

struct Verdict {
  Status status = Status::Inconclusive;
  std::string reason;
  std::optional<VerdictWitness> witness;
  std::vector<BranchSummary> branches;  // lexicographic element order; empty for theorem-only verdicts
  std::uint64_t line_pairs_checked = 0;
  std::string route = "branches";
};

namespace detail {

/// Solves A x' = b for b in the column space of A (A has full column rank).
inline std::vector<CycloNum> solve_in_column_space(const Matrix<Rational>& A, const std::vector<CycloNum>& b) {
  const CycloNum zero = zero_like(b.at(0));
  auto Aq = A.map([&](const Rational& r) { return CycloNum(zero.field(), r); }, zero);
  Matrix<CycloNum> aug = Aq;
  Matrix<CycloNum> col(b.size(), 1, zero);
  for (std::size_t i = 0; i < b.size(); ++i) col(i, 0) = b[i];
  aug = aug.hstack(col);
  const auto e = rref(aug);
  if (!e.pivots.empty() && e.pivots.back() == A.cols()) throw std::logic_error("vector is not in the column space");
  std::vector<CycloNum> x(A.cols(), zero);
  for (std::size_t r = 0; r < e.pivots.size(); ++r) x[e.pivots[r]] = e.reduced(r, A.cols());
  return x;
}

inline std::vector<CycloNum> to_field(const std::vector<CycloNum>& v, const FieldPtr& f) {
  std::vector<CycloNum> out;
  for (const auto& x : v) out.push_back(x.lift(f));
  return out;
}

inline FieldPtr common_field(const std::vector<const std::vector<CycloNum>*>& vs) {
  unsigned long L = 1;
  for (auto v : vs)
    for (const auto& x : *v) L = std::lcm(L, x.conductor());
  return CycloField::get(L);
}

inline bool equal_points(const std::vector<CycloNum>& a, const std::vector<CycloNum>& b) {
  const auto f = common_field({&a, &b});
  return to_field(a, f) == to_field(b, f);
}

}  // namespace detail

/// Checks the stated property of a NOT witness from scratch.
inline bool verify_witness(const RefMap& rm, const VerdictWitness& w) {
  if (w.kind == "normal_crossings") return !w.tuple.empty();
  if (w.x0.empty()) return false;
  const bool nonzero = std::any_of(w.x0.begin(), w.x0.end(), [](const CycloNum& c) { return !c.is_zero(); });
  if (!nonzero) return false;
  const auto fx = rm.eval(w.x0);
  if (w.kind == "singular_family") {
    // A x0 is fixed by g and f is singular along span{x0}.
    const ExactRing ring(rm.group().conductor(), zeta_exponents(rm.group(), {w.g}));
    const auto x = detail::to_field(w.x0, ring.field());
    const auto moved = rm.moved_embedding(ring, w.g).apply(x);
    const auto plain = embed(ring, rm.A()).apply(x);
    if (moved != plain) return false;
    std::vector<Rational> xr;
    for (const auto& c : w.x0) {
      if (!c.is_rational()) return false;
      xr.emplace_back(c.coeffs()[0]);
    }
    return corank_at(rm.spec(), xr) >= 1;
  }
  if (w.partners.empty()) return false;
  std::vector<std::vector<CycloNum>> pts{w.x0};
  for (const auto& q : w.partners) pts.push_back(q);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!detail::equal_points(rm.eval(pts[i]), fx)) return false;
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if (detail::equal_points(pts[i], pts[j])) return false;
  }
  return true;
}

namespace detail {

inline VerdictWitness branch_witness(const RefMap& rm, const BranchSummary& s) {
  VerdictWitness w;
  w.g = s.g;
  if (s.dim_kerM > s.dim_V) {
    w.kind = "strict_family";
    w.family_dim = s.dim_kerM;
    w.x0 = strict_direction(rm, s.g);
    const ExactRing ring(rm.group().conductor(), zeta_exponents(rm.group(), {s.g}));
    w.partners.push_back(solve_in_column_space(rm.A(), rm.moved_embedding(ring, s.g).apply(w.x0)));
  } else {
    w.kind = "singular_family";
    w.family_dim = s.dim_V;
    const auto v = rm.split(s.g)->V.vector(0);
    const auto f = CycloField::get(1);
    for (const auto& c : v) w.x0.emplace_back(f, c);
  }
  return w;
}

/// Largest offending family first, then lexicographic order.
inline const BranchSummary* pick_witness(const std::vector<const BranchSummary*>& failing) {
  const BranchSummary* best = nullptr;
  auto dim = [](const BranchSummary& s) { return s.dim_kerM > s.dim_V ? s.dim_kerM : s.dim_V; };
  for (auto f : failing)
    if (!best || dim(*f) > dim(*best)) best = f;
  return best;
}

inline void attach_checked(const RefMap& rm, Verdict& v, VerdictWitness w) {
  if (!verify_witness(rm, w)) throw InvariantViolation("witness failed independent re-verification");
  v.witness = std::move(w);
}

}  // namespace detail

/// Runs the per-branch pass. `fails` decides which classes are fatal.
template <class Fails>
std::vector<BranchSummary> branch_pass(const RefMap& rm, const RunOptions& opt, Fails&& fails) {
  const auto& G = rm.group();
  check_budget(G.order(), opt);
  std::atomic<bool> stop{false};
  std::vector<char> done(G.order(), 0);
  std::vector<BranchSummary> all(G.order());
  parallel_for(G.order(), opt.jobs, [&](std::size_t k) {
    if (k == 0) return;
    all[k] = summarize(rm, G.element(k));
    done[k] = 1;
    if (opt.early_exit && fails(all[k].cls)) stop = true;
  }, opt.early_exit ? &stop : nullptr);
  std::vector<BranchSummary> out;
  for (std::uint64_t k = 1; k < G.order(); ++k)
    if (done[k]) out.push_back(std::move(all[k]));
  return out;
}

/// Witness from the failing branches, or nullopt.
template <class Fails>
std::optional<VerdictWitness> choose_branch_witness(const RefMap& rm, const std::vector<BranchSummary>& bs,
                                                    Fails&& fails) {
  std::vector<const BranchSummary*> failing;
  for (const auto& b : bs)
    if (fails(b.cls)) failing.push_back(&b);
  if (failing.empty()) return std::nullopt;
  return detail::branch_witness(rm, *detail::pick_witness(failing));
}

inline bool outside_origin_fiber(BranchClass c) { return c != BranchClass::Empty && c != BranchClass::OriginOnly; }
inline bool fatal_in_odd_codimension(BranchClass c) {
  return c == BranchClass::Fat || c == BranchClass::SingularCurve;
}

struct PairCheck {
  bool ok = true;
  std::optional<VerdictWitness> witness;
};

/// Strict-triple check on a shared kernel line span{x0} of branches g and g'.
inline PairCheck triple_point_check(const RefMap& rm, const GroupElement& g, const GroupElement& h,
                                    const std::vector<CycloNum>& x0) {
  const auto& G = rm.group();
  const ExactRing ring(G.conductor(), zeta_exponents(G, {g, h}));
  const auto x = detail::to_field(x0, ring.field());
  const auto Vg = lift(rm.split(g)->V, ring.zero()), Vh = lift(rm.split(h)->V, ring.zero());
  PairCheck out;
  if (Vg.contains(x) || Vh.contains(x)) return out;
  const auto base = embed(ring, rm.A()).apply(x);
  const auto yg = rm.moved_embedding(ring, g).apply(x);
  const auto yh = rm.moved_embedding(ring, h).apply(x);
  if (yg != yh && yg != base && yh != base) {
    out.ok = false;
    VerdictWitness w;
    w.kind = "triple_line";
    w.g = g;
    w.other = h;
    w.family_dim = 1;
    w.x0 = x;
    w.partners = {detail::solve_in_column_space(rm.A(), yg), detail::solve_in_column_space(rm.A(), yh)};
    out.witness = std::move(w);
  }
  return out;
}

namespace detail {

/// Exact kernel line of M_g (rank n-1 assumed).
inline std::vector<CycloNum> exact_line(const RefMap& rm, const GroupElement& a) {
  const ExactRing ring(rm.group().conductor(), zeta_exponents(rm.group(), {a}));
  const auto K = kernel_basis(rm.branch_matrix(ring, a));
  if (K.dim() != 1) throw std::logic_error("branch is not a line");
  return K.vector(0);
}

inline bool same_line(const std::vector<CycloNum>& u, const std::vector<CycloNum>& v) {
  const auto f = common_field({&u, &v});
  Matrix<CycloNum> m(0, u.size(), CycloNum(f));
  m.append_row(to_field(u, f));
  m.append_row(to_field(v, f));
  return rank(m) == 1;
}

}  // namespace detail

/// Disjointness of two STRICT_LINE branches; a shared line goes on to the triple check.
inline PairCheck pairwise_disjointness_check(const RefMap& rm, const GroupElement& g, const GroupElement& h) {
  const auto u = detail::exact_line(rm, g), v = detail::exact_line(rm, h);
  PairCheck out;
  if (!detail::same_line(u, v)) return out;
  const auto& G = rm.group();
  const ExactRing ring(G.conductor(), zeta_exponents(G, {g, h}));
  const auto x = detail::to_field(u, ring.field());
  const auto yg = rm.moved_embedding(ring, g).apply(x);
  const auto yh = rm.moved_embedding(ring, h).apply(x);
  if (yg == yh) {
    out.ok = false;
    VerdictWitness w;
    w.kind = "shared_line";
    w.g = g;
    w.other = h;
    w.family_dim = 1;
    w.x0 = x;
    w.partners = {detail::solve_in_column_space(rm.A(), yg)};
    w.detail = "two group elements identify the same strict pairs along a line";
    out.witness = std::move(w);
    return out;
  }
  return triple_point_check(rm, g, h, x);
}

namespace detail {

/// Normalized modular image of the kernel line, or empty if this prime loses the rank.
inline std::vector<std::uint64_t> line_key(const RefMap& rm, const GroupElement& a) {
  const ModRing ring(rm.group().conductor(), 0);
  Matrix<Fq> M;
  try {
    M = rm.branch_matrix(ring, a);
  } catch (const std::domain_error&) {
    return {};
  }
  if (rank(M) + 1 != rm.n()) return {};
  auto v = kernel_line(M);
  std::size_t lead = 0;
  while (lead < v.size() && v[lead].is_zero()) ++lead;
  if (lead == v.size()) return {};
  const Fq inv = v[lead].inverse();
  std::vector<std::uint64_t> key;
  for (auto& c : v) key.push_back((c * inv).v);
  return key;
}

}  // namespace detail

inline Verdict certify_afinite(const RefMap& rm, const RunOptions& opt = {}) {
  const std::size_t n = rm.n(), p = rm.p();
  const auto& spec = rm.spec();
  Verdict v;
  check_budget(rm.group().order(), opt);

  if (n == 1 && p == 1) {
    // Every finite germ (C,0) -> (C,0) is finitely determined.
    v.status = Status::CertifiedAFinite;
    v.reason = "one_variable_germ";
    v.route = "theorem";
    return v;
  }

  if (p + 1 < 2 * n) {
    const std::size_t cr = corank_at(spec);
    if (cr >= 2 || essential_corank_one_higher_order(spec, cr, is_essential(spec))) {
      v.status = Status::CertifiedNotAFinite;
      v.reason = cr >= 2 ? "corank_at_least_two_below_odd_codimension" : "higher_order_fold_below_odd_codimension";
      v.route = "theorem";
      v.branches = branch_pass(rm, opt, outside_origin_fiber);
      if (auto w = choose_branch_witness(rm, v.branches, outside_origin_fiber)) detail::attach_checked(rm, v, *w);
      return v;
    }
    v.status = Status::Inconclusive;
    v.reason = "outside_certified_dimensions";
    return v;
  }

  if (p >= 2 * n) {
    v.branches = branch_pass(rm, opt, outside_origin_fiber);
    if (auto w = choose_branch_witness(rm, v.branches, outside_origin_fiber)) {
      v.status = Status::CertifiedNotAFinite;
      v.reason = w->kind == "strict_family" ? "positive_dimensional_strict_double_points"
                                            : "positive_dimensional_singular_locus";
      detail::attach_checked(rm, v, *w);
      return v;
    }
    v.status = Status::CertifiedAFinite;
    v.reason = "all_branches_in_origin_fiber";
    return v;
  }

  // p = 2n - 1
  v.branches = branch_pass(rm, opt, fatal_in_odd_codimension);
  if (auto w = choose_branch_witness(rm, v.branches, fatal_in_odd_codimension)) {
    v.status = Status::CertifiedNotAFinite;
    v.reason = w->kind == "strict_family" ? "strict_double_locus_of_dimension_two_or_more"
                                          : "positive_dimensional_singular_locus";
    detail::attach_checked(rm, v, *w);
    return v;
  }
  std::vector<const BranchSummary*> lines;
  for (const auto& b : v.branches)
    if (b.cls == BranchClass::StrictLine) lines.push_back(&b);
  auto keys = parallel_map<std::vector<std::uint64_t>>(lines.size(), opt.jobs, [&](std::size_t i) {
    return detail::line_key(rm, lines[i]->g);
  });
  std::map<std::vector<std::uint64_t>, std::vector<std::size_t>> buckets;
  std::vector<std::size_t> wildcard;
  for (std::size_t i = 0; i < lines.size(); ++i) (keys[i].empty() ? wildcard : buckets[keys[i]]).push_back(i);
  std::vector<std::pair<std::size_t, std::size_t>> candidates;
  for (const auto& [key, members] : buckets)
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = a + 1; b < members.size(); ++b) candidates.emplace_back(members[a], members[b]);
  for (auto w : wildcard)
    for (std::size_t i = 0; i < lines.size(); ++i)
      if (i != w && (keys[i].size() || i > w)) candidates.emplace_back(std::min(i, w), std::max(i, w));
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  v.line_pairs_checked = candidates.size();
  for (const auto& [a, b] : candidates) {
    auto r = pairwise_disjointness_check(rm, lines[a]->g, lines[b]->g);
    if (!r.ok) {
      v.status = Status::CertifiedNotAFinite;
      v.reason = r.witness->kind == "shared_line" ? "branches_share_a_line" : "line_of_strict_triple_points";
      detail::attach_checked(rm, v, *r.witness);
      return v;
    }
  }
  v.status = Status::CertifiedAFinite;
  v.reason = "branches_are_disjoint_lines";
  return v;
}

/// Every nonzero x has corank 0: for each facet support B met by h away from 0, the rows of
/// A outside B have full column rank. Returns the first failing support.
inline std::optional<std::vector<std::size_t>> immersion_failure_off_origin(const ReflectionMapSpec& spec) {
  const auto B0 = spec.group.hyperplanes();
  if (B0.size() > 30) throw std::invalid_argument("too many hyperplanes for facet enumeration");
  const std::size_t n = spec.n();
  for (std::uint64_t mask = 0; mask < (1ULL << B0.size()); ++mask) {
    std::vector<std::size_t> B, rest, outside;
    for (std::size_t k = 0; k < B0.size(); ++k) (mask >> k & 1 ? B : rest).push_back(B0[k]);
    const auto Z = kernel_basis(spec.A.select_rows(B));
    if (Z.is_zero()) continue;
    bool meets = true;
    for (auto i : rest) {
      const auto row = spec.A.row(i);
      bool vanishes = true;
      for (std::size_t b = 0; b < Z.dim() && vanishes; ++b) {
        Rational s(0);
        const auto z = Z.vector(b);
        for (std::size_t j = 0; j < n; ++j) s += row[j] * z[j];
        vanishes = s.is_zero();
      }
      if (vanishes) {
        meets = false;
        break;
      }
    }
    if (!meets) continue;
    for (std::size_t i = 0; i < spec.p(); ++i)
      if (!std::binary_search(B.begin(), B.end(), i)) outside.push_back(i);
    if (rank(spec.A.select_rows(outside)) < n) return B;
  }
  return std::nullopt;
}

/// Independent route for p = 2n: orbit normal crossings, one-to-orbit over the arrangement
/// and immersion away from the origin.
inline Verdict certify_via_normal_crossings(const RefMap& rm, const RunOptions& opt = {}) {
  if (rm.p() != 2 * rm.n()) throw std::invalid_argument("normal-crossings route needs p = 2n");
  Verdict v;
  v.route = "normal_crossings";
  auto onc = orbit_normal_crossings(rm, opt);
  if (!onc.holds) {
    v.status = Status::CertifiedNotAFinite;
    v.reason = "orbit_normal_crossings_fails";
    VerdictWitness w;
    w.kind = "normal_crossings";
    w.g = onc.witness->g;
    w.tuple = onc.witness->tuple;
    v.witness = w;
    return v;
  }
  auto oto = one_to_orbit_over_A(rm, opt);
  if (!oto.holds) {
    v.status = Status::CertifiedNotAFinite;
    v.reason = "one_to_orbit_fails";
    VerdictWitness w;
    w.kind = "normal_crossings";
    w.g = oto.witness->g;
    w.tuple = {oto.witness->g};
    v.witness = w;
    return v;
  }
  if (auto B = immersion_failure_off_origin(rm.spec())) {
    v.status = Status::CertifiedNotAFinite;
    v.reason = "singular_away_from_origin";
    VerdictWitness w;
    w.kind = "normal_crossings";
    w.g = element_fixing_facet(rm.group(), Facet{*B});
    w.tuple = {w.g};
    v.witness = w;
    return v;
  }
  v.status = Status::CertifiedAFinite;
  v.reason = "immersion_with_normal_crossings_off_origin";
  return v;
}

/// Necessary conditions for stability: normal crossings, no point of the source lying on
/// two distinct branch pullbacks of the singular set (ker S_g cap ker S_g' = 0 for g != g'),
/// and immersion when p >= 2n.
inline bool stability_screen(const RefMap& rm, const RunOptions& opt = {}) {
  const auto& G = rm.group();
  if (rm.p() >= 2 * rm.n() && corank_at(rm.spec()) != 0) return false;
  const auto B0 = G.hyperplanes();
  if (B0.size() > 20) throw std::invalid_argument("too many hyperplanes for the stability screen");
  // kerS depends only on which hyperplane coordinates move; group elements per pattern.
  std::vector<std::pair<std::uint64_t, Subspace<Rational>>> patterns;
  for (std::uint64_t mask = 1; mask < (1ULL << B0.size()); ++mask) {
    GroupElement a(G.p(), 0);
    std::uint64_t count = 1;
    for (std::size_t k = 0; k < B0.size(); ++k)
      if (mask >> k & 1) {
        a[B0[k]] = 1;
        count *= G.modulus(B0[k]) - 1;
      }
    auto kerS = rm.split(a)->kerS;
    if (kerS.is_zero()) continue;
    if (count >= 2) return false;
    patterns.emplace_back(count, kerS);
  }
  for (std::size_t i = 0; i < patterns.size(); ++i)
    for (std::size_t j = i + 1; j < patterns.size(); ++j)
      if (!intersect(patterns[i].second, patterns[j].second).is_zero()) return false;
  return has_normal_crossings(rm, opt);
}

}  // namespace reflekt
