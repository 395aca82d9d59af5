#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "reflekt/certify.hpp"
#include "reflekt/json_io.hpp"
#include "reflekt/refmap.hpp"

namespace reflekt {

// Catalog runs.

struct SuiteCheck {
  std::string key;
  Json expected;
  Json actual;
  bool ok = false;
};

struct SuiteResult {
  std::string name;
  std::string anchor;
  Json verdict;
  std::vector<SuiteCheck> checks;
  std::string error;
  [[nodiscard]] bool ok() const {
    return error.empty() && std::all_of(checks.begin(), checks.end(), [](const SuiteCheck& c) { return c.ok; });
  }
};

inline SuiteResult run_entry(const CatalogEntry& e, const RunOptions& opt) {
  SuiteResult r{e.name, e.anchor, Json::object(), {}, {}};
  try {
    RefMap rm(e.spec);
    const Verdict v = certify_afinite(rm, opt);
    r.verdict = to_json(v, false);
    const auto& ex = e.expect;
    const bool geometric = ex.contains("corank") || ex.contains("essential") || ex.contains("injective") ||
                           ex.contains("normal_crossings");
    GeometryReport geo;
    if (geometric) geo = analyze(rm, opt);
    for (const auto& [key, want] : ex.items()) {
      Json got;
      if (key == "status") got = to_string(v.status);
      else if (key == "reason") got = v.reason;
      else if (key == "branches") got = v.branches.size();
      else if (key == "witness_g") got = v.witness ? to_json(v.witness->g) : Json();
      else if (key == "witness_kind") got = v.witness ? Json(v.witness->kind) : Json();
      else if (key == "corank") got = geo.corank;
      else if (key == "essential") got = geo.essential;
      else if (key == "injective") got = geo.injective.holds;
      else if (key == "normal_crossings") got = geo.normal_crossings;
      r.checks.push_back({key, want, got, want == got});
    }
  } catch (const std::exception& ex) {
    r.error = ex.what();
  }
  return r;
}

/// Entries whose name contains `filter` (all when empty), in catalog order.
inline std::vector<SuiteResult> run_catalog(const std::vector<CatalogEntry>& entries, const std::string& filter,
                                            const RunOptions& opt) {
  std::vector<SuiteResult> out;
  for (const auto& e : entries)
    if (filter.empty() || e.name.find(filter) != std::string::npos) out.push_back(run_entry(e, opt));
  return out;
}

inline Json suite_to_json(const std::vector<SuiteResult>& results) {
  Json a = Json::array();
  std::size_t failed = 0;
  for (const auto& r : results) {
    Json checks = Json::array();
    for (const auto& c : r.checks)
      checks.push_back(Json{{"key", c.key}, {"expected", c.expected}, {"actual", c.actual}, {"ok", c.ok}});
    Json j{{"name", r.name}, {"anchor", r.anchor}, {"ok", r.ok()}, {"verdict", r.verdict}, {"checks", checks}};
    if (!r.error.empty()) j["error"] = r.error;
    failed += !r.ok();
    a.push_back(j);
  }
  return Json{{"schema", kSchema}, {"command", "paper-suite"}, {"entries", a.size()}, {"failed", failed},
              {"results", a}};
}

// Search over exponent tuples.

/// Default graph matrix H for (n, p); a Hilbert matrix (all minors nonzero) when no
/// hand-picked matrix exists.
inline Matrix<Rational> preset_H(std::size_t n, std::size_t p) {
  auto qm = [](std::vector<std::vector<long>> rows) {
    std::vector<std::vector<Rational>> r;
    for (auto& row : rows) r.emplace_back(row.begin(), row.end());
    return Matrix<Rational>::from_rows(r, Rational(0));
  };
  if (n == 1 && p == 2) return qm({{1}});
  if (n == 2 && p == 4) return qm({{1, 1}, {1, -1}});
  if (n == 3 && p == 6) return qm({{1, 1, 1}, {1, -1, 2}, {1, 2, -1}});
  if (n == 2 && p == 3) return qm({{1, 1}});
  if (n == 3 && p == 5) return qm({{1, 1, 1}, {1, -1, 2}});
  Matrix<Rational> H(p - n, n, Rational(0));
  for (std::size_t i = 0; i < p - n; ++i)
    for (std::size_t j = 0; j < n; ++j) H(i, j) = Rational(1, static_cast<long>(i + j + 1));
  return H;
}

struct SearchParams {
  std::size_t n = 1, p = 2;
  std::vector<unsigned long> moduli_set;
  Matrix<Rational> A;  // p x n embedding
  bool coprime_filter = true;
  bool all_orders = false;  // every arrangement instead of non-decreasing tuples
};

struct SearchHit {
  std::vector<unsigned long> moduli;
  std::uint64_t order = 0;
  std::string reason;
};

struct SearchResult {
  std::vector<SearchHit> hits;
  std::vector<std::pair<std::vector<unsigned long>, std::string>> skipped;
  std::uint64_t examined = 0;
};

inline std::vector<std::vector<unsigned long>> search_tuples(const SearchParams& sp) {
  std::vector<unsigned long> vals(sp.moduli_set);
  std::sort(vals.begin(), vals.end());
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
  std::vector<std::vector<unsigned long>> out;
  if (vals.empty()) return out;
  std::vector<std::size_t> idx(sp.p, 0);
  while (true) {
    bool keep = sp.all_orders || std::is_sorted(idx.begin(), idx.end());
    if (keep) {
      std::vector<unsigned long> m;
      for (auto k : idx) m.push_back(vals[k]);
      if (!sp.coprime_filter || pairwise_coprime(m)) out.push_back(std::move(m));
    }
    std::size_t k = sp.p;
    while (k > 0 && ++idx[k - 1] == vals.size()) idx[--k] = 0;
    if (k == 0) break;
  }
  return out;
}

inline SearchResult run_search(const SearchParams& sp, const RunOptions& opt) {
  if (!(sp.p + 1 == 2 * sp.n || sp.p == 2 * sp.n)) throw std::invalid_argument("search needs p = 2n - 1 or p = 2n");
  if (sp.A.rows() != sp.p || sp.A.cols() != sp.n) throw std::invalid_argument("search embedding has the wrong shape");
  for (auto m : sp.moduli_set)
    if (m == 0) throw std::invalid_argument("moduli must be positive");
  const auto tuples = search_tuples(sp);
  RunOptions inner = opt;
  inner.jobs = 1;
  struct Outcome {
    bool certified = false;
    std::string reason;
    std::string error;
  };
  auto outcomes = parallel_map<Outcome>(tuples.size(), opt.jobs, [&](std::size_t i) {
    Outcome o;
    try {
      const auto v = certify_afinite(RefMap(ReflectionMapSpec(GroupSpec(tuples[i]), sp.A)), inner);
      o.certified = v.status == Status::CertifiedAFinite;
      o.reason = v.reason;
    } catch (const BudgetExceeded& e) {
      o.error = e.what();
    }
    return o;
  });
  SearchResult res;
  res.examined = tuples.size();
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    if (!outcomes[i].error.empty()) res.skipped.emplace_back(tuples[i], outcomes[i].error);
    if (outcomes[i].certified) res.hits.push_back({tuples[i], GroupSpec(tuples[i]).order(), outcomes[i].reason});
  }
  std::stable_sort(res.hits.begin(), res.hits.end(), [](const SearchHit& a, const SearchHit& b) {
    return a.order != b.order ? a.order < b.order : a.moduli < b.moduli;
  });
  return res;
}

inline Json search_to_json(const SearchParams& sp, const SearchResult& r) {
  Json hits = Json::array();
  for (const auto& h : r.hits) hits.push_back(Json{{"moduli", h.moduli}, {"order", h.order}, {"reason", h.reason}});
  Json skipped = Json::array();
  for (const auto& [m, why] : r.skipped) skipped.push_back(Json{{"moduli", m}, {"error", why}});
  ReflectionMapSpec shape;
  shape.A = sp.A;
  return Json{{"schema", kSchema},      {"command", "search"},
              {"n", sp.n},              {"p", sp.p},
              {"embedding", spec_to_json(shape)["embedding"]},
              {"coprime_filter", sp.coprime_filter},
              {"examined", r.examined}, {"certified", hits},
              {"skipped", skipped}};
}

}  // namespace reflekt
