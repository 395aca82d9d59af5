// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "reflekt/conditions.hpp"
#include "reflekt/suite.hpp"

using namespace reflekt;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

Matrix<Rational> qm(std::vector<std::vector<long>> rows) {
  std::vector<std::vector<Rational>> r;
  for (auto& row : rows) r.emplace_back(row.begin(), row.end());
  return Matrix<Rational>::from_rows(r, Rational(0));
}

Matrix<Rational> graph(std::size_t n, const Matrix<Rational>& H) {
  return Matrix<Rational>::identity(n, Rational(0)).vstack(H);
}

RefMap make(std::vector<unsigned long> m, Matrix<Rational> A) {
  return RefMap(ReflectionMapSpec(GroupSpec(std::move(m)), std::move(A)));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Matrix<Rational> random_matrix(std::size_t r, std::size_t c, int range, std::mt19937& rng) {
  std::uniform_int_distribution<int> d(-range, range);
  Matrix<Rational> m(r, c, Rational(0));
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = Rational(d(rng));
  return m;
}

Rational random_rational(std::mt19937& rng) {
  std::uniform_int_distribution<long> num(-9, 9), den(1, 7);
  return Rational(num(rng), den(rng));
}

/// Random full-rank spec; p in [pmin, pmax], n in [nmin, min(p, nmax)], moduli in [1, mmax].
ReflectionMapSpec random_spec(std::mt19937& rng, std::size_t pmin, std::size_t pmax, std::size_t nmin,
                              std::size_t nmax, unsigned long mmax) {
  const std::size_t p = std::uniform_int_distribution<std::size_t>(pmin, pmax)(rng);
  const std::size_t n = std::uniform_int_distribution<std::size_t>(std::min(nmin, p), std::min(p, nmax))(rng);
  std::vector<unsigned long> m(p);
  for (auto& x : m) x = std::uniform_int_distribution<unsigned long>(1, mmax)(rng);
  while (true) {
    auto A = random_matrix(p, n, 2, rng);
    if (rank(A) == n) return ReflectionMapSpec(GroupSpec(m), A);
  }
}

// f(v) over Q, evaluated straight from the definition.
std::vector<Rational> f_rational(const ReflectionMapSpec& s, const std::vector<Rational>& v) {
  std::vector<Rational> out;
  for (std::size_t i = 0; i < s.p(); ++i) {
    Rational y(0);
    for (std::size_t j = 0; j < s.n(); ++j) y = y + s.A(i, j) * v[j];
    Rational r(1);
    for (unsigned long k = 0; k < s.group.modulus(i); ++k) r = r * y;
    out.push_back(r);
  }
  return out;
}

std::string moduli_str(const std::vector<unsigned long>& m) {
  std::string s = "(";
  for (std::size_t i = 0; i < m.size(); ++i) s += (i ? "," : "") + std::to_string(m[i]);
  return s + ")";
}

// Solves A x = b exactly and confirms the solution; nullopt if b is not in col A.
std::optional<std::vector<CycloNum>> preimage(const Matrix<Rational>& A, const std::vector<CycloNum>& b) {
  const CycloNum zero = zero_like(b.at(0));
  const auto Ac = A.map([&](const Rational& r) { return CycloNum(zero.field(), r); }, zero);
  Matrix<CycloNum> aug = Ac;
  Matrix<CycloNum> col(b.size(), 1, zero);
  for (std::size_t i = 0; i < b.size(); ++i) col(i, 0) = b[i];
  aug = aug.hstack(col);
  const auto ker = kernel_basis(aug);
  for (std::size_t k = 0; k < ker.dim(); ++k) {
    const auto v = ker.vector(k);
    const CycloNum last = v[A.cols()];
    if (last.is_zero()) continue;
    std::vector<CycloNum> x;
    for (std::size_t j = 0; j < A.cols(); ++j) x.push_back(-(v[j] / last));
    if (Ac.apply(x) == b) return x;
  }
  return std::nullopt;
}

// Two distinct source points with the same image, recovered from an injectivity witness.
bool witness_gives_collision(const RefMap& rm, const Witness& w) {
  const auto& G = rm.group();
  const auto field = CycloField::get(std::lcm(G.conductor(), w.vector.at(0).conductor()));
  const auto wv = detail::to_field(w.vector, field);
  const auto x = preimage(rm.A(), wv);
  const auto moved = act(G, G.inverse(w.g), wv);
  const auto x2 = preimage(rm.A(), moved);
  if (!x || !x2 || *x == *x2) return false;
  return rm.eval(*x) == rm.eval(*x2);
}

// 1 --------------------------------------------------------------------------------------
Outcome family_certification() {
  struct Case {
    std::vector<unsigned long> m;
    Matrix<Rational> A;
    std::uint64_t branches;
    double limit;
  };
  const std::vector<Case> cases{
      {{2, 3}, qm({{1}, {1}}), 5, 1.0},
      {{2, 3, 5, 7}, graph(2, qm({{1, 1}, {1, -1}})), 209, 10.0},
      {{2, 3, 5, 7, 11, 13}, graph(3, qm({{1, 1, 1}, {1, -1, 2}, {1, 2, -1}})), 30029, 120.0},
  };
  RunOptions opt;
  opt.jobs = std::max(1u, std::thread::hardware_concurrency());
  Outcome o;
  std::ostringstream d;
  for (const auto& c : cases) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto v = certify_afinite(make(c.m, c.A), opt);
    const double t = seconds_since(t0);
    const bool ok = v.status == Status::CertifiedAFinite && v.branches.size() == c.branches && t < c.limit;
    o.pass = o.pass && ok;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2fs", t);
    d << moduli_str(c.m) << " " << to_string(v.status) << " " << v.branches.size() << " branches " << buf << "; ";
  }
  o.detail = d.str();
  return o;
}

// 2 --------------------------------------------------------------------------------------
Outcome odd_coprime_family() {
  const std::vector<std::pair<std::vector<unsigned long>, Matrix<Rational>>> cases{
      {{3, 5, 7}, graph(2, qm({{1, 1}}))},
      {{3, 5, 7, 11, 13}, graph(3, qm({{1, 1, 1}, {1, -1, 2}}))},
      {{2, 3, 5}, graph(2, qm({{1, 1}}))},
  };
  Outcome o;
  for (const auto& [m, A] : cases) {
    const auto v = certify_afinite(make(m, A));
    o.pass = o.pass && v.status == Status::CertifiedAFinite;
    o.detail += moduli_str(m) + " " + to_string(v.status) + "; ";
  }
  return o;
}

// 3 --------------------------------------------------------------------------------------
Outcome negative_controls() {
  struct Case {
    std::vector<unsigned long> m;
    Matrix<Rational> A;
    std::optional<GroupElement> g;
  };
  const std::vector<Case> cases{
      {{2, 2, 2, 2}, graph(2, qm({{1, 1}, {1, -1}})), GroupElement{1, 1, 1, 1}},
      {{2, 2, 2}, qm({{1, 0}, {0, 1}, {1, 1}}), std::nullopt},
  };
  std::mt19937 rng(20240603);
  Outcome o;
  for (const auto& c : cases) {
    const RefMap rm = make(c.m, c.A);
    const auto v = certify_afinite(rm);
    bool ok = v.status == Status::CertifiedNotAFinite && v.witness && verify_witness(rm, *v.witness);
    if (ok && c.g) ok = v.witness->g == *c.g;
    // All moduli are even, so v and -v always collide.
    std::size_t agree = 0;
    for (int k = 0; k < 20; ++k) {
      std::vector<Rational> x, mx;
      for (std::size_t j = 0; j < rm.n(); ++j) {
        x.push_back(random_rational(rng));
        mx.push_back(-x.back());
      }
      agree += f_rational(rm.spec(), x) == f_rational(rm.spec(), mx);
    }
    ok = ok && agree == 20;
    o.pass = o.pass && ok;
    o.detail += moduli_str(c.m) + " " + to_string(v.status) +
                (v.witness ? " witness " + to_string(v.witness->g) : std::string()) + ", f(-v)=f(v) at " +
                std::to_string(agree) + "/20; ";
  }
  return o;
}

// 4 --------------------------------------------------------------------------------------
Outcome orbit_identities() {
  std::mt19937 rng(7);
  Outcome o;
  std::size_t points = 0, fails = 0;
  for (int gi = 0; gi < 10; ++gi) {
    const std::size_t p = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
    std::vector<unsigned long> m(p);
    for (auto& x : m) x = std::uniform_int_distribution<unsigned long>(1, 7)(rng);
    const GroupSpec G(m);
    const unsigned long L = std::lcm(G.conductor(), 4ul);
    const auto field = CycloField::get(L);
    for (int k = 0; k < 20; ++k, ++points) {
      Point y;
      for (std::size_t i = 0; i < p; ++i) {
        const bool zero = std::uniform_int_distribution<int>(0, 3)(rng) == 0;
        const long e = std::uniform_int_distribution<long>(0, static_cast<long>(L) - 1)(rng);
        Rational r = random_rational(rng);
        if (r.is_zero() && !zero) r = Rational(1);
        y.push_back(zero ? CycloNum(field) : CycloNum::zeta_power(field, e).scaled(r));
      }
      bool ok = verify_fiber_is_orbit(G, y);
      // Stabilizer by direct enumeration, not from the facet.
      std::uint64_t stab = 0;
      for (const auto& a : G.elements()) stab += act(G, a, y) == y;
      ok = ok && orbit(G, y).size() * stab == G.order() && stab == stabilizer_order(G, y);
      ok = ok && jacobian_check(G, y);
      try {
        const auto ker = kernel_at(G, y);
        std::size_t expect = 0;
        for (std::size_t i = 0; i < p; ++i) expect += m[i] >= 2 && y[i].is_zero();
        ok = ok && ker.dim() == expect;
        for (std::size_t b = 0; b < ker.dim(); ++b)
          for (std::size_t i = 0; i < p; ++i)
            if (!(m[i] >= 2 && y[i].is_zero())) ok = ok && ker.vector(b)[i].is_zero();
      } catch (const std::logic_error&) {
        ok = false;
      }
      fails += !ok;
    }
  }
  o.pass = fails == 0 && points == 200;
  o.detail = std::to_string(points) + " points over 10 groups, " + std::to_string(fails) + " failures";
  return o;
}

// 5 --------------------------------------------------------------------------------------
Outcome degree_identities() {
  std::size_t groups = 0, fails = 0;
  for (std::size_t p = 1; p <= 4; ++p) {
    std::vector<unsigned long> m(p, 1);
    while (true) {
      const GroupSpec G(m);
      std::uint64_t prod = 1, sum = 0, refl = 0;
      for (auto d : G.degrees()) {
        prod *= d;
        sum += d - 1;
      }
      for (const auto& a : G.elements()) {
        std::size_t moved = 0;
        for (auto x : a) moved += x != 0;
        refl += moved == 1;
      }
      fails += !(prod == G.order() && sum == refl);
      ++groups;
      std::size_t k = p;
      while (k > 0 && ++m[k - 1] > 6) m[--k] = 1;
      if (k == 0) break;
    }
  }
  return {fails == 0, std::to_string(groups) + " moduli vectors, " + std::to_string(fails) + " failures"};
}

// 6 --------------------------------------------------------------------------------------
Outcome coprime_lemmas() {
  std::mt19937 rng(11);
  const std::vector<unsigned long> any{1, 2, 3, 4, 5, 7, 9, 11, 13};
  const std::vector<unsigned long> odd{1, 3, 5, 7, 9, 11, 13};
  auto tuple = [&](std::size_t len, const std::vector<unsigned long>& pool) {
    while (true) {
      std::vector<unsigned long> m;
      std::uint64_t prod = 1;
      for (std::size_t i = 0; i < len; ++i) {
        m.push_back(pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)]);
        prod *= m.back();
      }
      if (pairwise_coprime(m) && prod <= 100000 && prod > 1) return m;
    }
  };
  std::size_t matrices = 0, cases = 0, bad = 0, rank_tests = 0;
  for (int round = 0; matrices < 24; ++round) {
    const bool square = round % 2 == 0;
    const std::size_t n = std::uniform_int_distribution<std::size_t>(square ? 1 : 2, 3)(rng);
    const auto H = random_matrix(square ? n : n - 1, n, 3, rng);
    if (c1_violation(H)) continue;
    ++matrices;
    for (int t = 0; t < 5; ++t) {
      const auto m = tuple(square ? 2 * n : 2 * n - 1, square ? any : odd);
      const auto rep = verify_coprime_lemmas(H, m);
      ++cases;
      bad += !rep.all_pass();
      rank_tests += rep.c2.rank_tests + rep.c3.rank_tests + rep.c4.rank_tests;
    }
  }
  return {bad == 0 && matrices >= 20, std::to_string(matrices) + " matrices, " + std::to_string(cases) +
                                          " tuples, " + std::to_string(rank_tests) + " determinant tests, " +
                                          std::to_string(bad) + " counterexamples"};
}

// 7 --------------------------------------------------------------------------------------
Outcome le_property() {
  std::mt19937 rng(13);
  std::size_t specs = 0, injective = 0, unverified = 0;
  while (specs < 100) {
    const auto s = random_spec(rng, 2, 4, 1, 3, 4);
    if (static_cast<long>(corank_at(s)) <= static_cast<long>(s.p()) - static_cast<long>(s.n())) continue;
    ++specs;
    const RefMap rm(s);
    const auto r = is_injective(rm);
    if (r.holds) ++injective;
    else if (!r.witness || !witness_gives_collision(rm, *r.witness)) ++unverified;
  }
  return {injective == 0 && unverified == 0,
          std::to_string(specs) + " specs with corank > p - n, " + std::to_string(injective) +
              " reported injective, " + std::to_string(unverified) + " collisions not reproduced"};
}

// 8 --------------------------------------------------------------------------------------
Outcome route_agreement() {
  std::mt19937 rng(17);
  std::size_t specs = 0, differ = 0;
  std::map<std::string, std::size_t> tally;
  while (specs < 100) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
    auto s = random_spec(rng, 2 * n, 2 * n, n, n, 5);
    // Keep the largest groups affordable.
    if (s.group.order() > 4000) continue;
    ++specs;
    const RefMap rm(s);
    const auto a = certify_afinite(rm);
    const auto b = certify_via_normal_crossings(rm);
    differ += a.status != b.status;
    ++tally[to_string(a.status)];
  }
  std::string t;
  for (const auto& [k, v] : tally) t += ", " + k + " " + std::to_string(v);
  return {differ == 0, std::to_string(specs) + " specs with p = 2n, " + std::to_string(differ) + " disagreements" + t};
}

// 9 --------------------------------------------------------------------------------------
Outcome obstructions() {
  std::mt19937 rng(19);
  std::size_t low = 0, low_bad = 0;
  while (low < 60) {
    const auto s = random_spec(rng, 3, 6, 3, 4, 4);
    if (!(s.p() + 1 < 2 * s.n()) || corank_at(s) < 2) continue;
    ++low;
    low_bad += certify_afinite(RefMap(s)).status != Status::CertifiedNotAFinite;
  }
  std::size_t ess = 0, stable = 0, not_fold = 0, higher = 0;
  for (int k = 0; k < 4000 && ess < 200; ++k) {
    const auto s = random_spec(rng, 1, 4, 1, 3, 5);
    if (corank_at(s) != 1 || !is_essential(s)) continue;
    ++ess;
    const auto h = s.group.hyperplanes();
    higher += h.size() == 1 && s.group.modulus(h[0]) >= 3;
    if (!stability_screen(RefMap(s))) continue;
    ++stable;
    not_fold += !(h.size() == 1 && s.group.modulus(h[0]) == 2);
  }
  std::ostringstream d;
  d << low << " specs with corank >= 2 and p < 2n - 1, " << low_bad << " not certified NOT_AFINITE; " << ess
    << " essential corank-1 specs (" << higher << " with a modulus >= 3), " << stable << " pass the stability screen, "
    << not_fold << " of those not fold-shaped";
  return {low_bad == 0 && not_fold == 0 && stable > 0 && higher > 0, d.str()};
}

// 10 -------------------------------------------------------------------------------------
Outcome determinism() {
  const auto entries = catalog_from_json(read_json_file(REFLEKT_DEFAULT_CATALOG));
  RunOptions one, eight;
  eight.jobs = 8;
  const auto a = suite_to_json(run_catalog(entries, "", one)).dump(2);
  const auto b = suite_to_json(run_catalog(entries, "", eight)).dump(2);
  return {a == b, std::to_string(entries.size()) + " catalog entries, reports " +
                      (a == b ? "identical" : "differ") + " (" + std::to_string(a.size()) + " bytes)"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"family certification", family_certification},
      {"odd coprime family", odd_coprime_family},
      {"negative controls", negative_controls},
      {"orbit-map identities", orbit_identities},
      {"degree identities", degree_identities},
      {"coprime lemmas", coprime_lemmas},
      {"non-injectivity from corank", le_property},
      {"route agreement", route_agreement},
      {"obstructions", obstructions},
      {"determinism", determinism},
  };
  // Optional argument: run only the listed criterion numbers, e.g. "1,4".
  std::set<std::size_t> only;
  if (argc > 1) {
    std::stringstream ss(argv[1]);
    std::string tok;
    while (std::getline(ss, tok, ',')) only.insert(std::stoul(tok));
  }
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!only.empty() && !only.count(i + 1)) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    char t[32];
    std::snprintf(t, sizeof t, "%.1fs", seconds_since(t0));
    std::cout << "criterion " << (i + 1) << ": " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << "  ["
              << t << "] " << o.detail << std::endl;
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
