// Acceptance run: one PASS/FAIL line per criterion, details indented below.
// Usage: acceptance [path-to-gradtent-cli]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gradtent/benchmark.hpp"
#include "gradtent/certify.hpp"
#include "gradtent/hierarchy.hpp"
#include "gradtent/oracle.hpp"
#include "gradtent/parser.hpp"

using namespace gradtent;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> details;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    details.push_back(std::string(ok ? "ok    " : "FAILED") + "  " + what);
  }
  void note(const std::string& what) { details.push_back("        " + what); }
};

int failures = 0;

void report(int id, const std::string& title, const Outcome& o, double seconds) {
  std::cout << "criterion " << std::setw(2) << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << title << "  ("
            << std::fixed << std::setprecision(1) << seconds << " s)\n";
  std::cout.unsetf(std::ios::floatfield);
  for (const auto& d : o.details) std::cout << "    " << d << "\n";
  std::cout.flush();
  if (!o.pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double v) {
  if (v == -std::numeric_limits<double>::infinity()) return "-inf";
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(8) << v;
  return os.str();
}

std::string describe(const RelaxationResult& r) {
  return r.spec.label() + (r.spec.method == Method::sos ? "" : " k=" + std::to_string(r.level)) + " = " +
         num(r.value) + " [" + status_label(r) + "]";
}

bool within(double v, double lo, double hi) { return std::isfinite(v) && v >= lo && v <= hi; }

struct Suite {
  BenchmarkReport report;

  const BenchmarkRow* find(const std::string& example, Method m, int level) const {
    for (const auto& row : report.rows)
      if (row.example == example && row.result.spec.method == m && (m == Method::sos || row.result.level == level))
        return &row;
    return nullptr;
  }
  const BenchmarkRow& at(const std::string& example, Method m, int level) const {
    const BenchmarkRow* r = find(example, m, level);
    if (!r) throw Error("missing benchmark row " + example);
    return *r;
  }
  std::vector<std::string> examples() const {
    std::vector<std::string> out;
    for (const auto& row : report.rows)
      if (out.empty() || out.back() != row.example) out.push_back(row.example);
    return out;
  }
};

// Every iterate of every solve seen during the run.
std::vector<const SdpSolution*> all_solutions;

// -----------------------------------------------------------------------------

Outcome criterion1() {
  Outcome o;
  bool hn = true, uni = true;
  for (int N = 1; N <= 10; ++N) {
    if (!verify_hn_identity(N)) {
      hn = false;
      o.note("h_N identity fails at N = " + std::to_string(N));
    }
    if (!verify_univariate_identity(N)) {
      uni = false;
      o.note("univariate identity fails at N = " + std::to_string(N));
    }
  }
  o.check(hn, "h_N recursion identity, N = 1..10");
  o.check(uni, "univariate identity, N = 1..10");
  return o;
}

Outcome criterion2(const Suite& s) {
  Outcome o;
  for (const auto& ex : s.examples()) {
    std::vector<const RelaxationResult*> chain;
    if (const auto* r = s.find(ex, Method::sos, -1)) chain.push_back(&r->result);
    for (int k = 0; k <= 2; ++k)
      if (const auto* r = s.find(ex, Method::principal, k)) chain.push_back(&r->result);
    std::string line = ex + ":";
    int skipped = 0;
    bool ok = true;
    for (const auto* r : chain) {
      line += " " + num(r->value);
      if (std::isnan(r->value)) ++skipped;
    }
    for (std::size_t i = 0; i < chain.size(); ++i)
      for (std::size_t j = i + 1; j < chain.size(); ++j) {
        const double a = chain[i]->value, b = chain[j]->value;
        if (std::isnan(a) || std::isnan(b)) continue;
        if (a > b + 1e-6 * (1.0 + std::abs(b))) ok = false;
      }
    if (skipped > 0) line += "  (" + std::to_string(skipped) + " non-finite level(s) not compared)";
    o.check(ok, line);
  }
  return o;
}

Outcome criterion3(const Suite& s) {
  Outcome o;
  const auto v = [&](const std::string& ex, Method m, int k) { return s.at(ex, m, k).result.value; };
  const double ninf = -std::numeric_limits<double>::infinity();

  o.check(v("motzkin_xy", Method::sos, -1) == ninf, "Motzkin(X,Y,1) f^sos infeasible: " + num(v("motzkin_xy", Method::sos, -1)));
  for (int k : {0, 1})
    o.check(within(v("motzkin_xy", Method::principal, k), -0.02, 0.005),
            "Motzkin(X,Y,1) f_" + std::to_string(k) + "* in [-0.02, 0.005]: " + num(v("motzkin_xy", Method::principal, k)));
  o.check(within(v("motzkin_xy", Method::principal, 2), -0.005, 0.005),
          "Motzkin(X,Y,1) f_2* in [-0.005, 0.005]: " + num(v("motzkin_xy", Method::principal, 2)));

  o.check(within(v("motzkin_xz", Method::sos, -1), -0.178 - 0.02, -0.178 + 0.02),
          "Motzkin(X,1,Z) f^sos = -0.178 +- 0.02: " + num(v("motzkin_xz", Method::sos, -1)));
  o.check(within(v("motzkin_xz", Method::principal, 2), -1e-4, 1e-4),
          "Motzkin(X,1,Z) f_2* in [-1e-4, 1e-4]: " + num(v("motzkin_xz", Method::principal, 2)));

  o.check(within(v("berg", Method::principal, 3), -1.0 / 27 - 2e-3, -1.0 / 27 + 2e-3),
          "Berg f_3* = -1/27 +- 2e-3: " + num(v("berg", Method::principal, 3)));

  {
    std::vector<double> q = {v("quartic", Method::sos, -1)};
    for (int k = 0; k <= 2; ++k) q.push_back(v("quartic", Method::principal, k));
    bool near = true;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    std::string vals;
    for (double x : q) {
      near = near && within(x, -11.4581 - 0.02, -11.4581 + 0.02);
      lo = std::min(lo, x);
      hi = std::max(hi, x);
      vals += " " + num(x);
    }
    o.check(near, "quartic f^sos, f_0*..f_2* = -11.4581 +- 0.02:" + vals);
    o.check(std::isfinite(hi - lo) && hi - lo <= 5e-3, "quartic values mutually within 5e-3: spread " + num(hi - lo));
  }

  if (s.find("lax4_h", Method::sos, -1)) {
    o.check(v("lax4_h", Method::sos, -1) == ninf, "Lax h f^sos infeasible: " + num(v("lax4_h", Method::sos, -1)));
    const auto& h2 = s.at("lax4_h", Method::principal, 2).result;
    const auto& h3 = s.at("lax4_h", Method::principal, 3).result;
    o.check(within(h2.value, -0.0072 - 0.005, -0.0072 + 0.005), "Lax h h_2* = -0.0072 +- 0.005: " + describe(h2));
    o.check(within(h3.value, -0.0019 - 0.003, -0.0019 + 0.003), "Lax h h_3* = -0.0019 +- 0.003: " + describe(h3));
  } else {
    o.check(false, "Lax h levels were not computed");
  }
  return o;
}

Outcome criterion4(const Suite& s, const RunSettings& run) {
  Outcome o;
  const Polynomial f = parse_polynomial("(1 - x*y)^2 + y^2", {"x", "y"}).polynomial;
  const double sos = s.at("nonattained", Method::sos, -1).result.value;
  o.check(std::isfinite(sos) && std::abs(sos) <= 1e-6, "f^sos = 0 +- 1e-6: " + num(sos));
  for (int d = 2; d <= 4; ++d) {
    static std::vector<std::unique_ptr<RelaxationResult>> keep;
    keep.push_back(std::make_unique<RelaxationResult>(compute_gradvar(f, d, run)));
    const RelaxationResult& r = *keep.back();
    all_solutions.push_back(&r.solution);
    o.check(std::isfinite(r.value) && std::abs(r.value - 1.0) <= 1e-2,
            "gradient variety d=" + std::to_string(d) + " = 1 +- 1e-2: " + describe(r));
  }
  o.note("the gradient-variety value 1 = f(0) exceeds inf f = 0: the expected failure when the minimum is not attained");
  return o;
}

Outcome criterion5(const RunSettings& run, const std::string& cli) {
  Outcome o;
  const Polynomial f = parse_polynomial("x", {"x"}).polynomial;
  static HierarchyReport rep;
  rep = run_family(f, MethodSpec::principal(), 3, run, false, {"x"});
  bool increasing = true, below = true;
  std::string vals;
  double prev = -std::numeric_limits<double>::infinity();
  for (const auto& r : rep.results) {
    all_solutions.push_back(&r.solution);
    vals += " " + num(r.value);
    if (!r.finite() || r.value < prev - chain_tolerance(r.value)) increasing = false;
    if (!r.finite() || r.value > -1.0 + 1e-4) below = false;
    prev = r.value;
  }
  o.check(increasing, "f = x principal levels 0..3 nondecreasing:" + vals);
  o.check(below, "every level is a lower bound for -1 (within 1e-4)");
  const double last = rep.results.empty() ? std::numeric_limits<double>::quiet_NaN() : rep.results.back().value;
  o.check(std::isfinite(last) && std::abs(last + 1.0) <= 1e-4, "highest level within 1e-4 of -1: " + num(last));

  if (cli.empty()) {
    o.check(false, "CLI path not given; caveat not checked");
    return o;
  }
  const std::string cmd = "\"" + cli + "\" optimize x --k-max 1 --no-timing 2>&1";
  std::string out;
  if (FILE* p = popen(cmd.c_str(), "r")) {
    char buf[512];
    while (fgets(buf, sizeof buf, p)) out += buf;
    pclose(p);
  }
  const bool caveat = out.find("only if f is bounded below") != std::string::npos;
  o.check(caveat, "CLI prints the boundedness caveat");
  return o;
}

Outcome criterion6(const RunSettings& run) {
  Outcome o;
  const std::vector<std::pair<std::string, std::vector<std::string>>> cases = {
      {"x^4 - 3*x^2 + x", {"x"}},
      {"x^4 + y^4 - x*y + x", {"x", "y"}},
      {"x^2*y^2*(x^2 + y^2 - 1)", {"x", "y"}}};
  static std::vector<std::unique_ptr<LevelInequalityReport>> keep;
  for (const auto& [text, vars] : cases) {
    const Polynomial f = parse_polynomial(text, vars).polynomial;
    keep.push_back(std::make_unique<LevelInequalityReport>(check_level_inequality(f, 1, 0, run, 1e-5)));
    const auto& r = *keep.back();
    all_solutions.push_back(&r.lhs.solution);
    all_solutions.push_back(&r.rhs.solution);
    o.check(r.decided && r.holds, text + ": f*_{2,0} = " + num(r.lhs.value) + " <= f*_{1," +
                                      std::to_string(r.half_degree) + "} = " + num(r.rhs.value) + " [" +
                                      status_label(r.lhs) + ", " + status_label(r.rhs) + "]");
  }
  return o;
}

Outcome criterion7(const Suite& random) {
  Outcome o;
  int finite = 0, violations = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& row : random.report.rows) {
    if (!row.result.finite()) continue;
    ++finite;
    worst = std::max(worst, row.result.value - row.oracle);
    if (!row.below_oracle(1e-4)) {
      ++violations;
      o.note(row.example + ": " + describe(row.result) + " > grid " + num(row.oracle));
    }
  }
  o.check(violations == 0 && finite > 0, std::to_string(finite) + " finite values on 20 quartics, " +
                                             std::to_string(violations) + " above grid_min + 1e-4 (largest excess " +
                                             num(worst) + ")");
  int monotone_fail = 0;
  for (int i = 0; i < 20; ++i) {
    const Polynomial f = random_coercive_quartic(1 + static_cast<std::uint64_t>(i));
    double prev = std::numeric_limits<double>::infinity();
    for (int res : {101, 201, 401, 801}) {
      const double v = grid_min(f, Box::cube(2, 4.0), res).min_value;
      if (v > prev) ++monotone_fail;
      prev = v;
    }
  }
  o.check(monotone_fail == 0, "nested grid refinement 101 -> 801 never raises the grid minimum (" +
                                  std::to_string(monotone_fail) + " violations)");
  return o;
}

Outcome criterion8() {
  Outcome o;
  const CurveLimitReport rep = curve_limit_check();
  for (const auto& row : rep.rows) {
    o.check(row.f_rel_error <= rep.f_tol, "a = " + num(row.a) + ": f(gamma(s)) relative error " + num(row.f_rel_error) +
                                              " (tol " + num(rep.f_tol) + ")");
    o.check(row.grad_rel_error <= rep.grad_tol, "a = " + num(row.a) + ": |grad f|^2 |x|^2 = " + num(row.grad_value) +
                                                    " vs limit " + num(row.grad_limit) + ", relative error " +
                                                    num(row.grad_rel_error) + " (tol " + num(rep.grad_tol) + ")");
  }
  o.note("s = 1e-3, exact rational evaluation; df/dx on the curve is " + std::string(rep.dfdx_zero ? "0" : "nonzero"));
  return o;
}

Outcome criterion9(const Suite& s, const std::vector<BenchmarkExample>& suite) {
  Outcome o;
  struct Item {
    std::string example;
    Method method;
    int level;
  };
  const std::vector<Item> items = {
      {"motzkin_xy", Method::principal, 0}, {"motzkin_xy", Method::principal, 1}, {"motzkin_xy", Method::principal, 2},
      {"motzkin_xz", Method::sos, -1},      {"motzkin_xz", Method::principal, 2}, {"berg", Method::principal, 3},
      {"quartic", Method::sos, -1},         {"quartic", Method::principal, 0},    {"quartic", Method::principal, 1},
      {"quartic", Method::principal, 2},    {"lax4_h", Method::principal, 2},     {"lax4_h", Method::principal, 3}};
  int extracted = 0, clean = 0, faults_caught = 0;
  for (const auto& it : items) {
    const BenchmarkRow* row = s.find(it.example, it.method, it.level);
    if (!row) {
      o.check(false, it.example + ": level not computed");
      continue;
    }
    const RelaxationResult& r = row->result;
    const std::string name = it.example + " " + describe(r);
    if (r.solution.status != SolveStatus::optimal) {
      o.note(name + ": not optimal, no certificate to extract");
      continue;
    }
    const BenchmarkExample* ex = nullptr;
    for (const auto& e : suite)
      if (e.name == it.example) ex = &e;
    const Polynomial f = ex->polynomial();
    const Relaxation relax = build_relaxation(f, r.spec, r.level);
    try {
      Certificate cert = extract_certificate(relax, r.solution);
      ++extracted;
      const CertificateCheck chk = verify_certificate(cert);
      const TentacleSpec spec = tentacle_spec(f, r.spec);
      SoundnessOptions so;
      so.samples = 10000;
      so.seed = 1;
      const SoundnessReport sound = sample_soundness(f, cert, spec, so);
      const bool ok = cert.residual_norm <= 1e-5 && chk.accepted && sound.violations == 0;
      if (ok) ++clean;
      o.check(ok, name + ": residual " + num(cert.residual_norm) + ", " + std::to_string(sound.feasible) +
                      " feasible samples, " + std::to_string(sound.violations) + " violations");

      Certificate bad = cert;
      bad.bound += 0.1 * (1.0 + std::abs(cert.bound));
      const bool rejected = !verify_certificate(bad).accepted;
      const SoundnessReport flagged = sample_soundness(f, bad, spec, so);
      const bool caught = rejected || flagged.violations > 0;
      if (caught) ++faults_caught;
      o.check(caught, name + ": raised bound " + std::string(rejected ? "rejected" : "accepted") + " by the checker, " +
                          std::to_string(flagged.violations) + " sampling violations");
    } catch (const CertificateRejected& e) {
      o.check(false, name + ": " + e.what());
    }
  }
  o.note(std::to_string(extracted) + " certificates extracted, " + std::to_string(clean) + " clean, " +
         std::to_string(faults_caught) + " faults caught");
  return o;
}

Outcome criterion10(const Suite& paper, const Suite& random, const RunSettings& run) {
  Outcome o;
  std::vector<const SdpSolution*> sols = all_solutions;
  for (const auto* rep : {&paper.report, &random.report})
    for (const auto& row : rep->rows) sols.push_back(&row.result.solution);
  long iterates = 0, weak_fail = 0, optimal = 0, gap_fail = 0;
  for (const auto* s : sols)
    for (const auto& rec : s->history) {
      ++iterates;
      const double tol = 1e-8 * (1.0 + std::abs(rec.primal_objective) + std::abs(rec.dual_objective));
      if (rec.primal_objective > rec.dual_objective + rec.coupling + tol) ++weak_fail;
    }
  o.check(weak_fail == 0, "weak duality pobj <= dobj + coupling on " + std::to_string(iterates) + " iterates (" +
                              std::to_string(weak_fail) + " violations)");

  for (const auto* rep : {&paper.report, &random.report})
    for (const auto& row : rep->rows)
      if (row.result.spec.method == Method::principal && row.result.solution.status == SolveStatus::optimal) {
        ++optimal;
        if (!(row.result.solution.gap <= 1e-8)) {
          ++gap_fail;
          o.note(row.example + " " + describe(row.result) + ": gap " + num(row.result.solution.gap));
        }
      }
  o.check(gap_fail == 0, "relative gap <= 1e-8 on " + std::to_string(optimal) + " optimal principal solves");

  const Polynomial f = parse_polynomial("x^4*y^2 + x^2*y^4 - 3*x^2*y^2 + 1", {"x", "y"}).polynomial;
  const std::string a = to_json(run_family(f, MethodSpec::principal(), 2, run, true, {"x", "y"}), false).dump();
  const std::string b = to_json(run_family(f, MethodSpec::principal(), 2, run, true, {"x", "y"}), false).dump();
  o.check(a == b, "two runs of the Motzkin hierarchy give bit-identical reports");
  const BenchmarkReport r1 = run_paper_suite(run, false, 1, {"berg"});
  const BenchmarkReport r2 = run_paper_suite(run, false, 1, {"berg"});
  o.check(to_json(r1, false).dump() == to_json(r2, false).dump(), "two Berg benchmark runs give bit-identical reports");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const RunSettings run;
  using clock = std::chrono::steady_clock;

  auto t = clock::now();
  Outcome c1 = criterion1();
  const double identity_time = seconds_since(t);
  c1.check(identity_time < 1.0, "runtime below 1 s");
  report(1, "exact identities", c1, identity_time);

  // Shared computations.
  std::cerr << "running the benchmark suite (including the Lax examples)..." << std::endl;
  t = clock::now();
  Suite paper{run_paper_suite(run, true, 1)};
  const double paper_time = seconds_since(t);
  std::cerr << "benchmark suite done in " << paper_time << " s" << std::endl;
  t = clock::now();
  Suite random{run_random_suite(20, 1, 2, run, 801)};
  const double random_time = seconds_since(t);

  const auto timed = [&](int id, const std::string& title, auto&& run_criterion, double extra = 0.0) {
    const auto t0 = clock::now();
    const Outcome o = run_criterion();
    report(id, title, o, extra + seconds_since(t0));
  };
  timed(2, "monotone chain", [&] { return criterion2(paper); }, paper_time);
  timed(3, "reference values", [&] { return criterion3(paper); }, paper_time);
  timed(4, "non-attained minimum", [&] { return criterion4(paper, run); });
  timed(5, "not bounded below", [&] { return criterion5(run, cli); });
  timed(6, "level inequality", [&] { return criterion6(run); });
  timed(7, "oracle soundness", [&] { return criterion7(random); }, random_time);
  timed(8, "curve limit", [&] { return criterion8(); });
  timed(9, "certificate integrity", [&] { return criterion9(paper, paper_suite()); });
  timed(10, "solver contract", [&] { return criterion10(paper, random, run); });

  for (const auto& n : paper.report.notes) std::cout << "note: " << n << "\n";
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << "\n";
  return failures == 0 ? 0 : 1;
}
