// reflekt: command-line front end for reflection-map germs.

#include <charconv>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "reflekt/certify.hpp"
#include "reflekt/json_io.hpp"
#include "reflekt/suite.hpp"

namespace {

using namespace reflekt;

constexpr int kExitSchema = 64;
constexpr int kExitInvariant = 65;
constexpr int kExitBudget = 66;
constexpr int kExitInternal = 70;

struct Globals {
  unsigned jobs = 0;
  std::uint64_t budget = 0;
  std::string report;
  bool early_exit = false;
  bool timing = false;
};

RunOptions run_options(const Globals& g, const SpecOptions& file = {}) {
  RunOptions o;
  o.jobs = g.jobs ? g.jobs : std::max(1u, std::thread::hardware_concurrency());
  o.budget = g.budget ? g.budget : file.budget.value_or(default_budget());
  o.early_exit = g.early_exit || file.early_exit.value_or(false);
  return o;
}

void emit(const Globals& g, const Json& j) {
  const std::string text = j.dump(2) + "\n";
  if (g.report.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(g.report);
  if (!out) throw std::invalid_argument("cannot write " + g.report);
  out << text;
}

Point parse_point(const std::string& text, const GroupSpec& G) {
  std::vector<Rational> coords;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      coords.push_back(Rational::parse(tok));
    } catch (const std::exception& e) {
      throw std::invalid_argument("malformed point coordinate '" + tok + "': " + e.what());
    }
  }
  if (coords.size() != G.p())
    throw std::invalid_argument("point needs " + std::to_string(G.p()) + " comma-separated rationals");
  const auto f = CycloField::get(G.conductor());
  Point y;
  for (const auto& c : coords) y.emplace_back(f, c);
  return y;
}

Json head(const char* command, const ReflectionMapSpec& s) {
  return Json{{"schema", kSchema}, {"command", command}, {"spec", spec_to_json(s)}};
}

template <class F>
double timed(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_analyze(const Globals& g, const std::string& path) {
  const auto file = read_spec_file(path);
  const auto opt = run_options(g, file.options);
  RefMap rm(file.spec);
  GeometryReport rep;
  const double secs = timed([&] {
    rep = analyze(rm, opt);
    if (file.options.kmax) {
      rep.orbit_normal_crossings = orbit_normal_crossings(rm, *file.options.kmax, opt);
      rep.normal_crossings = rep.orbit_normal_crossings.holds && rep.one_to_orbit.holds;
    }
  });
  auto j = head("analyze", file.spec);
  j["report"] = to_json(rep);
  if (g.timing) j["elapsed_seconds"] = secs;
  emit(g, j);
  return 0;
}

int exit_code(Status s) {
  switch (s) {
    case Status::CertifiedAFinite: return 0;
    case Status::CertifiedNotAFinite: return 1;
    case Status::Inconclusive: return 2;
  }
  return kExitInternal;
}

int cmd_certify(const Globals& g, const std::string& path, const std::string& route, bool with_branches) {
  const auto file = read_spec_file(path);
  const auto opt = run_options(g, file.options);
  RefMap rm(file.spec);
  Verdict v;
  std::optional<Verdict> other;
  const double secs = timed([&] {
    if (route == "normal-crossings") {
      v = certify_via_normal_crossings(rm, opt);
      return;
    }
    v = certify_afinite(rm, opt);
    if (route == "both") {
      if (rm.p() != 2 * rm.n()) throw std::invalid_argument("--route both needs p = 2n");
      other = certify_via_normal_crossings(rm, opt);
      if (other->status != v.status)
        throw InvariantViolation("branch and normal-crossings routes disagree: " + to_string(v.status) + " vs " +
                                 to_string(other->status));
    }
  });
  auto j = head("certify", file.spec);
  j["verdict"] = to_json(v, with_branches);
  if (other) j["cross_check"] = to_json(*other, false);
  if (g.timing) j["elapsed_seconds"] = secs;
  emit(g, j);
  return exit_code(v.status);
}

int cmd_branches(const Globals& g, const std::string& path, bool csv) {
  const auto file = read_spec_file(path);
  const auto opt = run_options(g, file.options);
  RefMap rm(file.spec);
  const auto& G = rm.group();
  check_budget(G.order(), opt);
  if (csv) {
    std::ostringstream os;
    os << "g,rank_M,dim_kerM,dim_V,dim_kerS,class\n";
    auto rows = parallel_map<BranchSummary>(G.order() - 1, opt.jobs,
                                            [&](std::size_t k) { return summarize(rm, G.element(k + 1)); });
    for (const auto& s : rows) {
      std::string gs = to_string(s.g);
      std::replace(gs.begin(), gs.end(), ',', ' ');
      os << '"' << gs << "\"," << s.rank_M << ',' << s.dim_kerM << ',' << s.dim_V << ',' << s.dim_kerS << ','
         << to_string(s.cls) << '\n';
    }
    if (g.report.empty()) {
      std::cout << os.str();
    } else {
      std::ofstream out(g.report);
      out << os.str();
    }
    return 0;
  }
  auto reports = parallel_map<Json>(G.order() - 1, opt.jobs,
                                    [&](std::size_t k) { return to_json(branch_matrices(rm, G.element(k + 1))); });
  auto j = head("branches", file.spec);
  j["count"] = reports.size();
  j["branches"] = reports;
  emit(g, j);
  return 0;
}

int cmd_orbit(const Globals& g, const std::string& path, const std::string& point) {
  const auto file = read_spec_file(path);
  const auto& G = file.spec.group;
  check_budget(G.order(), run_options(g, file.options));
  const auto y = parse_point(point, G);
  const auto orb = orbit(G, y);
  Json pts = Json::array();
  for (const auto& q : orb) pts.push_back(to_json(q));
  auto j = head("orbit", file.spec);
  j["point"] = to_json(y);
  j["omega"] = to_json(orbit_map_eval(G, y));
  j["orbit_size"] = orb.size();
  j["stabilizer_order"] = stabilizer_order(G, y);
  j["facet_support"] = facet_of(G, y).support;
  j["fiber_is_orbit"] = verify_fiber_is_orbit(G, y);
  j["orbit"] = pts;
  emit(g, j);
  return 0;
}

int cmd_suite(const Globals& g, const std::string& catalog, const std::string& filter) {
  const auto entries = catalog_from_json(read_json_file(catalog));
  const auto opt = run_options(g);
  std::vector<SuiteResult> results;
  const double secs = timed([&] { results = run_catalog(entries, filter, opt); });
  auto j = suite_to_json(results);
  if (g.timing) j["elapsed_seconds"] = secs;
  if (!g.report.empty()) emit(g, j);
  std::size_t failed = 0;
  for (const auto& r : results) {
    std::ostringstream line;
    line << (r.ok() ? "ok    " : "FAIL  ") << r.name;
    if (r.verdict.contains("status")) line << "  " << r.verdict["status"].get<std::string>();
    for (const auto& c : r.checks)
      if (!c.ok) line << "  [" << c.key << ": expected " << c.expected.dump() << ", got " << c.actual.dump() << "]";
    if (!r.error.empty()) line << "  error: " << r.error;
    std::cout << line.str() << '\n';
    failed += !r.ok();
  }
  std::cout << results.size() - failed << "/" << results.size() << " catalog entries as expected\n";
  return failed ? 1 : 0;
}

std::vector<unsigned long> parse_moduli_set(const std::string& text) {
  auto number = [&](std::string_view tok, std::string_view part) {
    unsigned long v = 0;
    const auto [end, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || ec != std::errc() || end != part.data() + part.size())
      throw std::invalid_argument("malformed moduli set entry '" + std::string(tok) + "'");
    return v;
  };
  std::vector<unsigned long> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    const std::string_view t(tok);
    const auto dash = t.find('-');
    if (dash == std::string_view::npos) {
      out.push_back(number(t, t));
      continue;
    }
    const auto lo = number(t, t.substr(0, dash)), hi = number(t, t.substr(dash + 1));
    if (lo > hi) throw std::invalid_argument("empty range '" + tok + "' in moduli set");
    for (auto v = lo; v <= hi; ++v) out.push_back(v);
  }
  return out;
}

int cmd_search(const Globals& g, std::size_t n, std::size_t p, const std::string& moduli, const std::string& embedding,
               bool no_coprime, bool all_orders) {
  SearchParams sp;
  sp.n = n;
  sp.p = p;
  if (n == 0 || p < n) throw std::invalid_argument("search needs 1 <= n <= p");
  sp.moduli_set = parse_moduli_set(moduli);
  sp.coprime_filter = !no_coprime;
  sp.all_orders = all_orders;
  if (embedding.empty() || embedding == "preset") {
    sp.A = Matrix<Rational>::identity(n, Rational(0)).vstack(preset_H(n, p));
  } else {
    const auto j = read_json_file(embedding);
    if (!j.contains("embedding")) throw std::invalid_argument(embedding + ": missing 'embedding'");
    Json probe{{"moduli", std::vector<unsigned long>(j["embedding"].size(), 1)}, {"embedding", j["embedding"]}};
    sp.A = spec_from_json(probe, embedding).A;
  }
  const auto res = run_search(sp, run_options(g));
  for (const auto& [m, why] : res.skipped) std::cerr << "skipped " << to_string(m) << ": " << why << '\n';
  emit(g, search_to_json(sp, res));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reflekt: analysis and A-finiteness certification of reflection maps"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--jobs,-j", g.jobs, "worker threads (default: hardware concurrency)");
  app.add_option("--budget", g.budget, "element-count cap (default 1e7 or REFLEKT_BUDGET)");
  app.add_option("--report", g.report, "write the JSON report to this file instead of stdout");
  app.add_flag("--early-exit", g.early_exit, "stop workers after the first failing branch");
  app.add_flag("--timing", g.timing, "include wall-clock seconds in reports");

  std::string spec_path, point, route = "branches", catalog = REFLEKT_DEFAULT_CATALOG, filter, moduli, embedding;
  bool no_branches = false, csv = false, no_coprime = false, all_orders = false;
  std::size_t n = 1, p = 2;

  auto* analyze_cmd = app.add_subcommand("analyze", "corank, essentiality, injectivity, normal crossings");
  analyze_cmd->add_option("spec", spec_path, "spec file")->required();
  auto* certify_cmd = app.add_subcommand("certify", "A-finiteness verdict (exit 0/1/2)");
  certify_cmd->add_option("spec", spec_path, "spec file")->required();
  certify_cmd->add_option("--route", route, "branches | normal-crossings | both")
      ->check(CLI::IsMember({"branches", "normal-crossings", "both"}));
  certify_cmd->add_flag("--no-branches", no_branches, "omit per-branch summaries");
  auto* branches_cmd = app.add_subcommand("branches", "per-branch matrices, ranks and kernels");
  branches_cmd->add_option("spec", spec_path, "spec file")->required();
  branches_cmd->add_flag("--csv", csv, "flat CSV of branch statistics");
  auto* orbit_cmd = app.add_subcommand("orbit", "orbit, orbit-map value and fiber check of a point");
  orbit_cmd->add_option("spec", spec_path, "spec file")->required();
  orbit_cmd->add_option("--point", point, "comma-separated rational coordinates")->required();
  auto* suite_cmd = app.add_subcommand("paper-suite", "run the reference catalog");
  suite_cmd->add_option("--catalog", catalog, "catalog file");
  suite_cmd->add_option("--filter", filter, "only entries whose name contains this string");
  auto* search_cmd = app.add_subcommand("search", "certify every exponent tuple drawn from a set");
  search_cmd->add_option("--n", n, "source dimension")->required();
  search_cmd->add_option("--p", p, "target dimension, 2n - 1 or 2n")->required();
  search_cmd->add_option("--moduli-set", moduli, "e.g. 3,5,7 or 2-9")->required();
  search_cmd->add_option("--embedding", embedding, "'preset' or a JSON file with an 'embedding' array");
  search_cmd->add_flag("--no-coprime-filter", no_coprime, "keep tuples with common factors");
  search_cmd->add_flag("--all-orders", all_orders, "every arrangement, not only non-decreasing tuples");

  for (auto* sc : {analyze_cmd, certify_cmd, branches_cmd, orbit_cmd, suite_cmd, search_cmd}) sc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitSchema;
  }

  try {
    if (*analyze_cmd) return cmd_analyze(g, spec_path);
    if (*certify_cmd) return cmd_certify(g, spec_path, route, !no_branches);
    if (*branches_cmd) return cmd_branches(g, spec_path, csv);
    if (*orbit_cmd) return cmd_orbit(g, spec_path, point);
    if (*suite_cmd) return cmd_suite(g, catalog, filter);
    if (*search_cmd) return cmd_search(g, n, p, moduli, embedding, no_coprime, all_orders);
  } catch (const BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBudget;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSchema;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const std::logic_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}
