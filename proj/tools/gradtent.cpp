// gradtent: lower bounds for polynomial minimization via SOS relaxations.
//
//   gradtent optimize  "<polynomial>" [--method principal --k-max 2 ...]
//   gradtent certify   "<polynomial>" --method principal --k 2 --certificate-out c.json
//   gradtent certify   --replay c.json
//   gradtent benchmark [--suite paper|random]
//   gradtent sdp-solve problem.json solution.json
//
// Exit codes: 0 ok, 1 usage or other error, 2 parse error, 3 solver failure,
// 4 size limits exceeded, 5 certificate rejected.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "gradtent/backend.hpp"
#include "gradtent/benchmark.hpp"
#include "gradtent/certify.hpp"
#include "gradtent/hierarchy.hpp"
#include "gradtent/parser.hpp"

namespace {

using namespace gradtent;

enum Exit { kOk = 0, kUsage = 1, kParse = 2, kSolver = 3, kBudget = 4, kRejected = 5 };

struct Common {
  std::string method = "principal";
  int k_max = 2;
  int order = 1;
  int d = 2;
  std::string radius = "1";
  bool auto_radius = false;
  double tol_gap = 1e-8;
  double tol_feas = 1e-8;
  int max_iter = 200;
  std::string format = "text";
  std::uint64_t seed = 1;
  std::string vars;
  std::string backend = "builtin";
  bool no_timing = false;
  bool verbose = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--method", c.method, "sos, principal, higher, ball, gradvar or all")
      ->check(CLI::IsMember({"sos", "principal", "higher", "ball", "gradvar", "all"}));
  app->add_option("--k-max", c.k_max, "highest level k")->check(CLI::NonNegativeNumber);
  app->add_option("--N", c.order, "order of the higher gradient tentacle")->check(CLI::PositiveNumber);
  app->add_option("--d", c.d, "multiplier degree of the gradient-variety method")->check(CLI::NonNegativeNumber);
  app->add_option("--radius", c.radius, "tentacle or ball radius R (rational)");
  app->add_flag("--auto-scale-radius", c.auto_radius, "R = max(1, largest coefficient of |grad f|^2 |x|^2)");
  app->add_option("--tol-gap", c.tol_gap, "relative duality gap tolerance");
  app->add_option("--tol-feas", c.tol_feas, "feasibility tolerance");
  app->add_option("--max-iter", c.max_iter, "interior-point iteration limit");
  app->add_option("--format", c.format, "text, json or csv")->check(CLI::IsMember({"text", "json", "csv"}));
  app->add_option("--seed", c.seed, "seed for sampling and oracles");
  app->add_option("--vars", c.vars, "comma separated variable names in order");
  app->add_option("--backend", c.backend, "builtin, split or external:<command>");
  app->add_flag("--no-timing", c.no_timing, "omit wall times (reproducible output)");
  app->add_flag("-v,--verbose", c.verbose, "solver progress on stderr");
}

RunSettings run_settings(const Common& c) {
  RunSettings r;
  r.solver.tol_gap = c.tol_gap;
  r.solver.tol_feas = c.tol_feas;
  r.solver.max_iter = c.max_iter;
  r.solver.verbose = c.verbose;
  r.backend = c.backend;
  return r;
}

std::vector<std::string> split_vars(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

/// The argument is a polynomial or the path of a file holding one.
ParsedPolynomial read_input(const std::string& input, const std::string& vars) {
  std::string text = input;
  std::error_code ec;
  if (std::filesystem::is_regular_file(input, ec)) {
    std::ifstream in(input);
    std::stringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  return parse_polynomial(text, split_vars(vars));
}

Rational radius_for(const Polynomial& f, const Common& c) {
  if (c.auto_radius) return auto_scale_radius(f);
  Rational r;
  try {
    r = Rational(c.radius);
  } catch (const std::invalid_argument&) {
    r = parse_polynomial(c.radius, {"R"}).polynomial.constant_term();
  }
  r.canonicalize();
  if (r <= 0) throw Error("radius must be positive");
  return r;
}

std::vector<std::pair<MethodSpec, int>> levels_for(const Polynomial& f, const Common& c) {
  const Rational R = radius_for(f, c);
  std::vector<std::pair<MethodSpec, int>> levels;
  auto family = [&](const MethodSpec& s) {
    for (int k = 0; k <= c.k_max; ++k) levels.emplace_back(s, k);
  };
  const bool all = c.method == "all";
  if (all || c.method == "sos" || c.method == "principal" || c.method == "higher")
    levels.emplace_back(MethodSpec::sos(), -1);
  if (all || c.method == "principal") family(MethodSpec::principal(R));
  if (all || c.method == "higher") family(MethodSpec::higher(c.order));
  if (all || c.method == "ball") family(MethodSpec::ball(R));
  if (all || c.method == "gradvar") levels.emplace_back(MethodSpec::gradvar(), c.d);
  return levels;
}

int exit_code_for(const std::vector<RelaxationResult>& results) {
  int code = kOk;
  for (const auto& r : results) {
    if (r.over_budget) return kBudget;
    if (!r.error.empty() || r.solution.status == SolveStatus::numerical_error ||
        r.solution.status == SolveStatus::max_iterations)
      code = kSolver;
  }
  return code;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

std::string result_csv_fields(const RelaxationResult& r) {
  std::ostringstream os;
  os << std::setprecision(17) << csv_escape(r.spec.label()) << "," << r.level << "," << status_label(r) << ","
     << detail::fmt_value(r.value) << "," << r.solution.gap << "," << r.solution.iterations;
  return os.str();
}

int cmd_optimize(const std::string& input, const Common& c) {
  const ParsedPolynomial parsed = read_input(input, c.vars);
  const Polynomial& f = parsed.polynomial;
  HierarchyReport rep = run_hierarchy(f, levels_for(f, c), run_settings(c), parsed.variables);
  const bool tentacle = c.method == "principal" || c.method == "higher" || c.method == "all";
  if (tentacle)
    rep.notes.push_back(
        "tentacle values bound the infimum of f over the tentacle set; they are lower bounds for inf f only if f is "
        "bounded below");
  if (c.format == "json") {
    std::cout << to_json(rep, !c.no_timing).dump(2) << "\n";
  } else if (c.format == "csv") {
    std::cout << "method,level,status,value,gap,iterations" << (c.no_timing ? "" : ",wall_time") << "\n";
    for (const auto& r : rep.results)
      std::cout << result_csv_fields(r) << (c.no_timing ? "" : "," + std::to_string(r.wall_time)) << "\n";
  } else {
    std::cout << format_table(rep, !c.no_timing);
    for (const auto& r : rep.results)
      if (r.value == -std::numeric_limits<double>::infinity() && r.spec.method == Method::sos)
        std::cout << "sos: infeasible (f^sos = -infinity)\n";
  }
  return exit_code_for(rep.results);
}

struct CertifyOptions {
  int level = 2;
  std::string out;
  std::string replay;
  int samples = 10000;
  double box = 2.0;
  double eig_floor = 1e-7;
  bool rational_round = false;
  double bound_shift = 0.0;
};

nlohmann::json certificate_document(const Certificate& cert, const MethodSpec& spec, int level,
                                    const std::vector<std::string>& vars) {
  nlohmann::json j = to_json(cert, vars);
  j["method"] = to_string(spec.method);
  j["radius"] = spec.radius.get_str();
  j["order"] = spec.order;
  j["level"] = level;
  return j;
}

int report_certificate(const Certificate& cert, const Polynomial& f, const MethodSpec& spec, int level,
                       const CertifyOptions& o, const Common& c, const std::vector<std::string>& vars,
                       const std::optional<RoundingResult>& rounding) {
  const CertificateCheck chk = verify_certificate(cert);
  SoundnessOptions so;
  so.samples = o.samples;
  so.seed = c.seed;
  so.half_width = o.box;
  const SoundnessReport sr = sample_soundness(f, cert, tentacle_spec(f, spec), so);
  const bool sound = sr.violations == 0;
  if (c.format == "json") {
    nlohmann::json j = {{"method", spec.label()},
                        {"level", level},
                        {"bound", cert.bound},
                        {"residual_norm", cert.residual_norm},
                        {"recomputed_residual_norm", chk.recomputed_residual_norm},
                        {"residual_matches", chk.residual_matches},
                        {"min_eigenvalue", cert.min_eigenvalue},
                        {"samples", sr.samples},
                        {"feasible_samples", sr.feasible},
                        {"violations", sr.violations},
                        {"worst_violation", sr.worst_violation}};
    if (rounding) j["rounding"] = {{"success", rounding->success}, {"message", rounding->message}};
    if (cert.exact_bound) j["exact_bound"] = cert.exact_bound->get_str();
    std::cout << j.dump(2) << "\n";
  } else if (c.format == "csv") {
    std::cout << "method,level,bound,residual_norm,residual_matches,feasible_samples,violations\n"
              << std::setprecision(17) << csv_escape(spec.label()) << "," << level << "," << cert.bound << ","
              << cert.residual_norm << "," << chk.residual_matches << "," << sr.feasible << "," << sr.violations
              << "\n";
  } else {
    std::cout << std::setprecision(10) << "f = " << f.to_string(vars) << "\n"
              << "method " << spec.label() << ", level " << level << "\n"
              << "bound a = " << cert.bound << "\n"
              << "residual_norm = " << std::setprecision(4) << cert.residual_norm
              << (chk.residual_matches ? "" : " (stored residual does not match the factors)") << "\n"
              << "smallest Gram eigenvalue = " << cert.min_eigenvalue << "\n";
    for (const auto& b : cert.blocks)
      std::cout << "block " << b.label << ": "
                << (b.gram.empty() ? std::to_string(b.factors.size()) + " squares" : "exact Gram matrix") << "\n";
    if (rounding) std::cout << "rounding: " << rounding->message << "\n";
    std::cout << "sampling: " << sr.feasible << " of " << sr.samples << " points in the set, " << sr.violations
              << " violations";
    if (sr.violations) std::cout << " (worst " << sr.worst_violation << ")";
    std::cout << "\n";
  }
  if (!chk.residual_matches || !sound) return kRejected;
  return kOk;
}

int cmd_certify(const std::string& input, const Common& c, const CertifyOptions& o) {
  if (!o.replay.empty()) {
    std::ifstream in(o.replay);
    if (!in) throw Error("cannot read " + o.replay);
    const nlohmann::json j = nlohmann::json::parse(in);
    Certificate cert = certificate_from_json(j);
    cert.bound += o.bound_shift;
    MethodSpec spec;
    spec.method = method_from_string(j.value("method", std::string("sos")));
    spec.radius = Rational(j.value("radius", std::string("1")));
    spec.radius.canonicalize();
    spec.order = j.value("order", 1);
    const auto vars = j.at("variables").get<std::vector<std::string>>();
    return report_certificate(cert, cert.f, spec, j.value("level", -1), o, c, vars, std::nullopt);
  }
  if (input.empty()) throw Error("certify needs a polynomial or --replay");
  if (c.method == "all") throw Error("certify works on a single method");
  const ParsedPolynomial parsed = read_input(input, c.vars);
  const Polynomial& f = parsed.polynomial;
  MethodSpec spec;
  spec.method = method_from_string(c.method);
  if (spec.method == Method::principal || spec.method == Method::ball) spec.radius = radius_for(f, c);
  if (spec.method == Method::higher) spec.order = c.order;
  const int level = spec.method == Method::sos ? -1 : spec.method == Method::gradvar ? c.d : o.level;
  const Relaxation relax = build_relaxation(f, spec, level);
  const RelaxationResult res = solve_relaxation(relax, run_settings(c));
  if (res.solution.status != SolveStatus::optimal) {
    std::cerr << "gradtent: no certificate: solver status " << to_string(res.solution.status) << " ("
              << res.solution.message << ")\n";
    return kSolver;
  }
  ExtractOptions eo;
  eo.eig_floor = o.eig_floor;
  Certificate cert = extract_certificate(relax, res.solution, eo);
  std::optional<RoundingResult> rounding;
  if (o.rational_round) rounding = round_certificate(relax.program, cert);
  if (!o.out.empty()) {
    std::ofstream out(o.out);
    if (!out) throw Error("cannot write " + o.out);
    out << certificate_document(cert, spec, level, parsed.variables).dump(1) << "\n";
  }
  return report_certificate(cert, f, spec, level, o, c, parsed.variables, rounding);
}

struct BenchmarkOptions {
  std::string suite = "paper";
  bool include_slow = false;
  std::vector<std::string> only;
  int count = 20;
};

int cmd_benchmark(const Common& c, const BenchmarkOptions& o) {
  const RunSettings run = run_settings(c);
  const BenchmarkReport rep = o.suite == "random" ? run_random_suite(o.count, c.seed, c.k_max, run)
                                                  : run_paper_suite(run, o.include_slow, c.seed, o.only);
  if (c.format == "json") {
    std::cout << to_json(rep, !c.no_timing).dump(2) << "\n";
  } else if (c.format == "csv") {
    std::cout << "example,method,level,status,value,gap,iterations,reference,oracle,below_oracle\n";
    for (const auto& row : rep.rows)
      std::cout << row.example << "," << result_csv_fields(row.result) << ","
                << (row.reference_infeasible ? "-inf" : row.reference ? detail::fmt_value(*row.reference) : "")
                << "," << detail::fmt_value(row.oracle) << "," << (row.below_oracle() ? 1 : 0) << "\n";
  } else {
    std::cout << format_table(rep, !c.no_timing);
  }
  return kOk;
}

int cmd_sdp_solve(const std::string& in_path, const std::string& out_path, const Common& c) {
  std::ifstream in(in_path);
  if (!in) throw Error("cannot read " + in_path);
  const nlohmann::json j = nlohmann::json::parse(in);
  const SdpProblem p = sdp_problem_from_json(j);
  SolverSettings s = run_settings(c).solver;
  if (j.contains("settings")) {
    const auto& js = j.at("settings");
    s.tol_gap = js.value("tol_gap", s.tol_gap);
    s.tol_feas = js.value("tol_feas", s.tol_feas);
    s.max_iter = js.value("max_iter", s.max_iter);
  }
  const SdpSolution sol = solve(p, s);
  std::ofstream out(out_path);
  if (!out) throw Error("cannot write " + out_path);
  out << to_json(sol).dump() << "\n";
  std::cerr << to_string(sol.status) << " after " << sol.iterations << " iterations\n";
  return sol.status == SolveStatus::numerical_error || sol.status == SolveStatus::max_iterations ? kSolver : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lower bounds for polynomial minimization via gradient tentacle SOS relaxations"};
  app.require_subcommand(1);

  Common c;
  std::string input;

  auto* opt = app.add_subcommand("optimize", "run a hierarchy of relaxations");
  opt->add_option("polynomial", input, "polynomial text or file")->required();
  add_common(opt, c);

  CertifyOptions co;
  auto* cert = app.add_subcommand("certify", "extract and check an SOS certificate");
  cert->add_option("polynomial", input, "polynomial text or file");
  add_common(cert, c);
  cert->add_option("--k", co.level, "level k")->check(CLI::NonNegativeNumber);
  cert->add_option("--certificate-out", co.out, "write the certificate as JSON");
  cert->add_option("--replay", co.replay, "check a stored certificate instead of solving");
  cert->add_option("--bound-shift", co.bound_shift, "add this to a replayed bound (fault injection)");
  cert->add_option("--samples", co.samples, "sampling points")->check(CLI::PositiveNumber);
  cert->add_option("--box", co.box, "half width of the sampling box")->check(CLI::PositiveNumber);
  cert->add_option("--eig-floor", co.eig_floor, "most negative admissible Gram eigenvalue");
  cert->add_flag("--rational-round", co.rational_round, "try an exact rational certificate");

  BenchmarkOptions bo;
  auto* bench = app.add_subcommand("benchmark", "run the example catalogue or random quartics");
  add_common(bench, c);
  bench->add_option("--suite", bo.suite, "paper or random")->check(CLI::IsMember({"paper", "random"}));
  bench->add_flag("--include-slow", bo.include_slow, "also run the Lax examples");
  bench->add_option("--only", bo.only, "run only these examples");
  bench->add_option("--count", bo.count, "number of random quartics")->check(CLI::PositiveNumber);

  std::string sdp_in, sdp_out;
  auto* sdp = app.add_subcommand("sdp-solve", "solve an SDP given as JSON");
  sdp->add_option("problem", sdp_in, "problem JSON")->required();
  sdp->add_option("solution", sdp_out, "solution JSON to write")->required();
  add_common(sdp, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*opt) return cmd_optimize(input, c);
    if (*cert) return cmd_certify(input, c, co);
    if (*bench) return cmd_benchmark(c, bo);
    if (*sdp) return cmd_sdp_solve(sdp_in, sdp_out, c);
  } catch (const ParseError& e) {
    std::cerr << "gradtent: parse error: " << e.what() << "\n";
    return kParse;
  } catch (const BudgetError& e) {
    std::cerr << "gradtent: " << e.what() << "\n";
    return kBudget;
  } catch (const CertificateRejected& e) {
    std::cerr << "gradtent: certificate rejected: " << e.what() << "\n";
    return kRejected;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "gradtent: bad JSON: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "gradtent: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
