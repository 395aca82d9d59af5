#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "reflekt/certify.hpp"
#include "reflekt/refmap.hpp"

namespace reflekt {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchema = "reflekt/1";

struct SpecOptions {
  std::optional<std::size_t> kmax;
  std::optional<std::uint64_t> budget;
  std::optional<bool> early_exit;
  bool operator==(const SpecOptions&) const = default;
};

struct SpecFile {
  ReflectionMapSpec spec;
  SpecOptions options;
};

namespace detail {

[[noreturn]] inline void schema_error(const std::string& where, const std::string& what) {
  throw std::invalid_argument("schema error at " + where + ": " + what);
}

inline void only_keys(const Json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) schema_error(where, "expected an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) schema_error(where, "unknown key '" + k + "'");
  }
}

inline void only_keys_set(const Json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) schema_error(where, "expected an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) schema_error(where, "unknown key '" + k + "'");
}

inline std::uint64_t unsigned_field(const Json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() < 0) schema_error(where, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

inline Rational rational_field(const Json& j, const std::string& where) {
  if (j.is_number_integer()) return Rational(j.get<long>());
  if (!j.is_string()) schema_error(where, "expected a rational string such as \"-3/4\"");
  try {
    return Rational::parse(j.get<std::string>());
  } catch (const std::exception& e) {
    schema_error(where, e.what());
  }
}

inline void check_schema(const Json& j, const std::string& where) {
  if (!j.contains("schema")) schema_error(where, "missing 'schema'");
  if (!j["schema"].is_string() || j["schema"].get<std::string>() != kSchema)
    schema_error(where + ".schema", std::string("expected \"") + kSchema + "\"");
}

}  // namespace detail

/// Parses the moduli/embedding/name part. Schema problems throw invalid_argument; a valid
/// document describing a rank-deficient embedding throws domain_error.
inline ReflectionMapSpec spec_from_json(const Json& j, const std::string& where = "$") {
  if (!j.is_object()) detail::schema_error(where, "expected an object");
  if (!j.contains("moduli")) detail::schema_error(where, "missing 'moduli'");
  if (!j.contains("embedding")) detail::schema_error(where, "missing 'embedding'");
  const auto& jm = j["moduli"];
  if (!jm.is_array() || jm.empty()) detail::schema_error(where + ".moduli", "expected a non-empty array");
  std::vector<unsigned long> m;
  for (std::size_t i = 0; i < jm.size(); ++i) {
    const auto w = where + ".moduli[" + std::to_string(i) + "]";
    const auto v = detail::unsigned_field(jm[i], w);
    if (v == 0) detail::schema_error(w, "moduli must be positive");
    m.push_back(static_cast<unsigned long>(v));
  }
  const auto& je = j["embedding"];
  if (!je.is_array() || je.size() != m.size())
    detail::schema_error(where + ".embedding", "expected one row per modulus (" + std::to_string(m.size()) + ")");
  std::vector<std::vector<Rational>> rows;
  for (std::size_t i = 0; i < je.size(); ++i) {
    const auto w = where + ".embedding[" + std::to_string(i) + "]";
    if (!je[i].is_array() || je[i].empty()) detail::schema_error(w, "expected a non-empty array");
    if (i > 0 && je[i].size() != je[0].size()) detail::schema_error(w, "rows have different lengths");
    std::vector<Rational> row;
    for (std::size_t k = 0; k < je[i].size(); ++k)
      row.push_back(detail::rational_field(je[i][k], w + "[" + std::to_string(k) + "]"));
    rows.push_back(std::move(row));
  }
  std::string name;
  if (j.contains("name")) {
    if (!j["name"].is_string()) detail::schema_error(where + ".name", "expected a string");
    name = j["name"].get<std::string>();
  }
  return ReflectionMapSpec(GroupSpec(std::move(m)), Matrix<Rational>::from_rows(rows, Rational(0)), name);
}

inline Json spec_to_json(const ReflectionMapSpec& s) {
  Json j;
  if (!s.name.empty()) j["name"] = s.name;
  j["moduli"] = s.group.moduli();
  Json rows = Json::array();
  for (std::size_t i = 0; i < s.A.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t k = 0; k < s.A.cols(); ++k) row.push_back(s.A(i, k).str());
    rows.push_back(row);
  }
  j["embedding"] = rows;
  return j;
}

inline SpecFile spec_file_from_json(const Json& j) {
  detail::only_keys(j, "$", {"schema", "name", "moduli", "embedding", "options"});
  detail::check_schema(j, "$");
  SpecFile f{spec_from_json(j), {}};
  if (j.contains("options")) {
    const auto& o = j["options"];
    detail::only_keys(o, "$.options", {"kmax", "budget", "early_exit"});
    if (o.contains("kmax")) {
      const auto k = detail::unsigned_field(o["kmax"], "$.options.kmax");
      if (k < 2) detail::schema_error("$.options.kmax", "must be at least 2");
      f.options.kmax = static_cast<std::size_t>(k);
    }
    if (o.contains("budget")) f.options.budget = detail::unsigned_field(o["budget"], "$.options.budget");
    if (o.contains("early_exit")) {
      if (!o["early_exit"].is_boolean()) detail::schema_error("$.options.early_exit", "expected a boolean");
      f.options.early_exit = o["early_exit"].get<bool>();
    }
  }
  return f;
}

inline Json spec_file_to_json(const SpecFile& f) {
  Json j;
  j["schema"] = kSchema;
  const Json body = spec_to_json(f.spec);
  for (const auto& [k, v] : body.items()) j[k] = v;
  Json o = Json::object();
  if (f.options.kmax) o["kmax"] = *f.options.kmax;
  if (f.options.budget) o["budget"] = *f.options.budget;
  if (f.options.early_exit) o["early_exit"] = *f.options.early_exit;
  if (!o.empty()) j["options"] = o;
  return j;
}

inline Json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(origin + ": malformed JSON: " + e.what());
  }
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path);
}

inline SpecFile read_spec_file(const std::string& path) { return spec_file_from_json(read_json_file(path)); }

// Report encoders.

inline Json to_json(const GroupElement& g) { return Json(g); }

inline Json to_json(const CycloNum& x) {
  Json c = Json::array();
  for (const auto& q : x.coeffs()) c.push_back(Rational(q).str());
  while (c.size() > 1 && c.back() == "0") c.erase(c.end() - 1);
  return Json{{"conductor", x.conductor()}, {"coeffs", c}};
}

inline Json to_json(const std::vector<CycloNum>& v) {
  Json a = Json::array();
  for (const auto& x : v) a.push_back(to_json(x));
  return a;
}

inline Json to_json(const Witness& w) {
  Json j;
  j["g"] = to_json(w.g);
  if (!w.vector.empty()) j["vector"] = to_json(w.vector);
  if (!w.tuple.empty()) {
    Json t = Json::array();
    for (const auto& g : w.tuple) t.push_back(to_json(g));
    j["tuple"] = t;
  }
  j["index"] = w.index;
  return j;
}

inline Json to_json(const PropertyResult& r) {
  Json j;
  j["holds"] = r.holds;
  if (r.witness) j["witness"] = to_json(*r.witness);
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline Json to_json(const GeometryReport& r) {
  Json j;
  j["corank"] = r.corank;
  j["group_rank"] = r.group_rank;
  j["essential"] = r.essential;
  j["injective"] = to_json(r.injective);
  j["one_to_orbit"] = to_json(r.one_to_orbit);
  j["orbit_normal_crossings"] = to_json(r.orbit_normal_crossings);
  j["normal_crossings"] = r.normal_crossings;
  Json obs = Json::array();
  for (const auto& o : r.obstructions)
    obs.push_back(Json{{"tag", o.tag}, {"conclusion", o.conclusion}, {"triggered", o.triggered}});
  j["obstructions"] = obs;
  return j;
}

inline Json to_json(const BranchSummary& b) {
  return Json{{"g", to_json(b.g)},          {"rank_M", b.rank_M},     {"dim_kerM", b.dim_kerM},
              {"dim_V", b.dim_V},           {"dim_kerS", b.dim_kerS}, {"class", to_string(b.cls)}};
}

inline Json to_json(const VerdictWitness& w) {
  Json j;
  j["kind"] = w.kind;
  j["g"] = to_json(w.g);
  if (w.other) j["other"] = to_json(*w.other);
  if (!w.x0.empty()) j["x0"] = to_json(w.x0);
  if (!w.partners.empty()) {
    Json p = Json::array();
    for (const auto& q : w.partners) p.push_back(to_json(q));
    j["partners"] = p;
  }
  j["family_dim"] = w.family_dim;
  if (!w.tuple.empty()) {
    Json t = Json::array();
    for (const auto& g : w.tuple) t.push_back(to_json(g));
    j["tuple"] = t;
  }
  if (!w.detail.empty()) j["detail"] = w.detail;
  return j;
}

inline Json to_json(const Verdict& v, bool include_branches = true) {
  Json j;
  j["status"] = to_string(v.status);
  j["reason"] = v.reason;
  j["route"] = v.route;
  if (v.witness) j["witness"] = to_json(*v.witness);
  j["branch_count"] = v.branches.size();
  j["line_pairs_checked"] = v.line_pairs_checked;
  if (include_branches) {
    Json b = Json::array();
    for (const auto& s : v.branches) b.push_back(to_json(s));
    j["branches"] = b;
  }
  return j;
}

template <class T>
Json matrix_to_json(const Matrix<T>& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t k = 0; k < m.cols(); ++k) {
      if constexpr (std::is_same_v<T, Rational>)
        row.push_back(m(i, k).str());
      else
        row.push_back(to_json(m(i, k)));
    }
    rows.push_back(row);
  }
  return rows;
}

template <class T>
Json basis_to_json(const Subspace<T>& s) {
  Json b = Json::array();
  for (std::size_t k = 0; k < s.dim(); ++k) {
    Json v = Json::array();
    for (const auto& x : s.vector(k)) {
      if constexpr (std::is_same_v<T, Rational>)
        v.push_back(x.str());
      else
        v.push_back(to_json(x));
    }
    b.push_back(v);
  }
  return b;
}

inline Json to_json(const BranchReport& b) {
  Json j;
  j["g"] = to_json(b.g);
  j["class"] = to_string(b.cls);
  j["rank_M"] = b.rank_M;
  j["rank_R"] = b.rank_R;
  j["rank_S"] = b.rank_S;
  j["M"] = matrix_to_json(b.M);
  j["ker_M"] = basis_to_json(b.kerM);
  j["V"] = basis_to_json(b.V);
  j["ker_S"] = basis_to_json(b.kerS);
  j["in_origin_fiber"] = branch_in_origin_fiber(b);
  return j;
}

// Catalog of reference germs with pinned expectations.

struct CatalogEntry {
  std::string name;
  std::string anchor;
  ReflectionMapSpec spec;
  Json expect;  // subset of: status, reason, corank, essential, injective, normal_crossings, branches, witness_g, witness_kind
};

inline const std::set<std::string>& expectation_keys() {
  static const std::set<std::string> keys{"status",   "reason",           "corank",   "essential",   "injective",
                                          "normal_crossings", "branches", "witness_g", "witness_kind"};
  return keys;
}

inline std::vector<CatalogEntry> catalog_from_json(const Json& j) {
  detail::only_keys(j, "$", {"schema", "entries"});
  detail::check_schema(j, "$");
  if (!j.contains("entries") || !j["entries"].is_array()) detail::schema_error("$.entries", "expected an array");
  std::vector<CatalogEntry> out;
  std::set<std::string> names;
  for (std::size_t i = 0; i < j["entries"].size(); ++i) {
    const auto& e = j["entries"][i];
    const auto w = "$.entries[" + std::to_string(i) + "]";
    detail::only_keys(e, w, {"name", "anchor", "spec", "expect"});
    for (const char* k : {"name", "anchor"})
      if (!e.contains(k) || !e[k].is_string() || e[k].get<std::string>().empty())
        detail::schema_error(w + "." + k, "expected a non-empty string");
    CatalogEntry c{e["name"].get<std::string>(), e["anchor"].get<std::string>(), ReflectionMapSpec{}, Json::object()};
    if (!names.insert(c.name).second) detail::schema_error(w + ".name", "duplicate entry name");
    if (!e.contains("spec")) detail::schema_error(w, "missing 'spec'");
    detail::only_keys(e["spec"], w + ".spec", {"moduli", "embedding"});
    c.spec = spec_from_json(e["spec"], w + ".spec");
    c.spec.name = c.name;
    if (e.contains("expect")) {
      detail::only_keys_set(e["expect"], w + ".expect", expectation_keys());
      c.expect = e["expect"];
    }
    out.push_back(std::move(c));
  }
  return out;
}

inline Json catalog_to_json(const std::vector<CatalogEntry>& entries) {
  Json a = Json::array();
  for (const auto& e : entries) {
    Json s = spec_to_json(e.spec);
    s.erase("name");
    a.push_back(Json{{"name", e.name}, {"anchor", e.anchor}, {"spec", s}, {"expect", e.expect}});
  }
  return Json{{"schema", kSchema}, {"entries", a}};
}

}  // namespace reflekt
