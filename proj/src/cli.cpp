#include "hconv/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "hconv/banach_geometry.hpp"
#include "hconv/convexity.hpp"
#include "hconv/localized_opt.hpp"
#include "hconv/problem_io.hpp"

namespace hconv::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::string file;
  std::string registry;
  std::uint64_t seed = 42;
  int samples = 2000;
  double tol = 1e-8;
  std::string eps;
  std::vector<double> x0;
  std::string emit_samples;
  // calm
  double radius = 0.05;
  // duality
  int lambda_grid = 200;
  // modulus
  std::string p;
  std::vector<double> eps_grid;
  int grid_points = 50;
  int resolution = 720;
};

std::string Num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // no "-0"
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string Vec(const VectorXd& v) {
  std::string s = "(";
  for (int i = 0; i < v.size(); ++i) s += (i ? ", " : "") + Num(v[i]);
  return s + ")";
}

std::string YesNo(bool b) { return b ? "yes" : "no"; }
std::string PassFail(bool b) { return b ? "PASS" : "FAIL"; }

class Report {
 public:
  explicit Report(std::ostream& out) : out_(out) {}
  void Section(const std::string& title) { out_ << "\n-- " << title << " --\n"; }
  void Field(const std::string& name, const std::string& value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "  %-24s ", name.c_str());
    out_ << buf << value << '\n';
  }
  void Line(const std::string& s) { out_ << "  " << s << '\n'; }
  std::ostream& raw() { return out_; }

 private:
  std::ostream& out_;
};

std::string InputName(const RunConfig& c) {
  return c.registry.empty() ? c.file : "registry:" + c.registry;
}

void EchoConfig(Report& r, const RunConfig& c, bool uses_input) {
  r.raw() << "hconv " << c.command << '\n';
  r.Section("config");
  r.Field("command", c.command);
  if (uses_input) r.Field("input", InputName(c));
  r.Field("seed", std::to_string(c.seed));
  r.Field("samples", std::to_string(c.samples));
  r.Field("tol", Num(c.tol));
}

ProblemFile LoadInput(const RunConfig& c) {
  if (c.registry.empty() == c.file.empty()) {
    throw UsageError("give exactly one of a .pkp path and --registry");
  }
  return c.registry.empty() ? LoadProblemFile(c.file) : LoadRegistry(c.registry);
}

VectorXd ResolveX0(const RunConfig& c, const ProblemFile& f) {
  if (!c.x0.empty()) {
    if (static_cast<int>(c.x0.size()) != f.dim) {
      throw UsageError("--x0 has " + std::to_string(c.x0.size()) +
                       " entries, the space has dim " + std::to_string(f.dim));
    }
    return Eigen::Map<const VectorXd>(c.x0.data(), f.dim);
  }
  if (!f.x0) throw UsageError("x0 is required: pass --x0 or set [defaults] x0");
  return *f.x0;
}

// Numeric eps from --eps or the file; nullopt for "auto".
std::optional<double> ResolveEps(const RunConfig& c, const ProblemFile& f,
                                 bool allow_auto) {
  if (c.eps.empty()) {
    if (!f.eps) throw UsageError("eps is required: pass --eps or set [defaults] eps");
    return *f.eps;
  }
  if (c.eps == "auto") {
    if (!allow_auto) throw UsageError("--eps auto is only available for certify");
    return std::nullopt;
  }
  const auto v = ParseDouble(c.eps);
  if (!v || !std::isfinite(*v)) throw UsageError("--eps must be a number or auto");
  return *v;
}

std::ofstream OpenCsv(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path + "'");
  return out;
}

void AppendColumns(std::vector<std::string>& header, const std::string& name, int n) {
  for (int i = 1; i <= n; ++i) header.push_back(name + "_" + std::to_string(i));
}

void AppendValues(std::vector<std::string>& row, const VectorXd& v) {
  for (int i = 0; i < v.size(); ++i) row.push_back(FormatDouble(v[i]));
}

int Modulus(const RunConfig& c, Report& r) {
  const auto p = ParseDouble(c.p);
  if (!p) throw UsageError("--p must be a number >= 1 or inf");
  if (!(*p >= 1.0)) throw UsageError("--p must be at least 1");
  std::vector<double> grid = c.eps_grid;
  if (grid.empty()) {
    if (c.grid_points < 1) throw UsageError("--grid-points must be positive");
    for (int k = 1; k <= c.grid_points; ++k) grid.push_back(2.0 * k / c.grid_points);
  }
  for (double e : grid) {
    if (!(e > 0.0 && e <= 2.0)) throw UsageError("eps " + Num(e) + " is outside (0, 2]");
  }
  const NormSpace space(2, *p);
  r.raw() << "hconv " << c.command << '\n';
  r.Section("config");
  r.Field("command", c.command);
  r.Field("space", space.ToString());
  r.Field("grid", std::to_string(grid.size()) + " values of eps");
  r.Field("resolution", std::to_string(c.resolution));

  const PowerTypeConstant pc = PowerType2Constant(space);
  const bool closed = !space.is_infinity() && *p >= 2.0;
  const bool lower = !space.is_infinity() && *p > 1.0 && *p < 2.0;
  r.Section("modulus");
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-16s %-16s %-16s %-16s", "eps", "delta_2d",
                closed ? "closed_form" : (lower ? "lower_bound" : "reference"),
                "c*eps^2");
  r.Line(buf);
  bool grid_holds = true;
  for (double e : grid) {
    const double bf = ModulusBruteForce2d(space, e, c.resolution);
    const double ref = closed ? ModulusClosedForm(space, e)
                              : (lower ? ModulusLowerBound(space, e) : kInfinity);
    const double ce2 = pc.holds() ? *pc.c * e * e : kInfinity;
    if (pc.holds() && bf < ce2 - 1e-12) grid_holds = false;
    std::snprintf(buf, sizeof(buf), "%-16s %-16s %-16s %-16s", Num(e).c_str(),
                  Num(bf).c_str(), std::isinf(ref) ? "-" : Num(ref).c_str(),
                  std::isinf(ce2) ? "-" : Num(ce2).c_str());
    r.Line(buf);
  }
  r.Section("power type 2");
  if (pc.holds()) {
    r.Field("constant c", Num(*pc.c));
    r.Field("delta >= c eps^2 on grid", PassFail(grid_holds));
    r.Field("verdict", grid_holds ? "HOLDS" : "FAILS");
    return grid_holds ? kExitPass : kExitRefuted;
  }
  // delta(eps) / eps^2 -> 0 as eps -> 0: exhibit a small eps where it has
  // dropped below the Hilbert-space constant.
  const double c_probe = 0.125;
  double e = 0.008;
  double ratio = ModulusBruteForce2d(space, e, c.resolution) / (e * e);
  while (ratio >= c_probe && e > 1e-6) {
    e /= 2.0;
    ratio = ModulusBruteForce2d(space, e, c.resolution) / (e * e);
  }
  r.Field("constant c", "none");
  r.Field("probe c", Num(c_probe));
  r.Field("violating eps", Num(e));
  r.Field("delta(eps) / eps^2", Num(ratio));
  r.Field("verdict", "FAILS");
  return kExitRefuted;
}

void PrintRegularity(Report& r, const RegularityCertificate& reg) {
  r.Field("mu", Num(reg.mu));
  r.Field("sigma_min", Num(reg.sigma_min));
  r.Field("delta_mu", Num(reg.delta_mu));
  r.Field("validated", YesNo(reg.validated));
  r.Field("worst ratio", Num(reg.worst_ratio));
  r.Field("validation samples", std::to_string(reg.samples));
}

void PrintWitness(Report& r, const NonconvexityWitness& w) {
  r.Field("x1", Vec(w.x1));
  r.Field("x2", Vec(w.x2));
  r.Field("y1", Vec(w.y1));
  r.Field("y2", Vec(w.y2));
  r.Field("ybar", Vec(w.ybar));
  r.Field("gap lower bound", Num(w.gap_lower_bound));
  r.Field("cell slack", Num(w.cell_slack));
  r.Field("grid resolution", std::to_string(w.resolution));
}

int Certify(const RunConfig& c, Report& r) {
  const ProblemFile f = LoadInput(c);
  const PolyMap map = f.Map();
  const VectorXd x0 = ResolveX0(c, f);
  const std::optional<double> given = ResolveEps(c, f, true);
  EchoConfig(r, c, true);
  r.Field("space", f.space().ToString());
  r.Field("x0", Vec(x0));
  r.Field("eps", given ? Num(*given) : "auto");
  r.Field("emit-samples", c.emit_samples.empty() ? "-" : c.emit_samples);
  double eps = 0.0;
  if (given) {
    eps = *given;
  } else {
    RadiusOptions ro;
    ro.seed = c.seed;
    const RadiusBound b = EstimateRadius(map, x0, f.space(), ro);
    r.Section("radius");
    r.Field("eps0", Num(b.eps0));
    r.Field("r", Num(b.r));
    r.Field("c", Num(b.c));
    r.Field("lip", Num(b.lip) + (b.lip_exact ? " (exact)" : " (estimate)"));
    r.Field("theta", Num(b.theta));
    r.Field("formula", b.formula_used);
    PrintRegularity(r, b.regularity);
    eps = b.eps0;
  }
  CertifyOptions opt;
  opt.n_pairs = c.samples;
  opt.seed = c.seed;
  opt.tol_res = c.tol;
  std::vector<PairRecord> records;
  const ConvexityCertificate cert = CertifyConvexity(
      map, x0, f.space(), eps, opt, c.emit_samples.empty() ? nullptr : &records);
  r.Section("certificate");
  r.Field("eps", Num(cert.eps));
  r.Field("pairs tested", std::to_string(cert.pairs_tested));
  r.Field("pairs skipped", std::to_string(cert.pairs_skipped));
  r.Field("max preimage residual", Num(cert.max_preimage_residual));
  r.Field("max norm excess", Num(cert.max_norm_excess));
  r.Field("tol_res", Num(cert.tol_res));
  r.Field("tol_ball", Num(cert.tol_ball));
  r.Field("unconfirmed candidates", std::to_string(cert.unconfirmed_candidates));
  r.Field("witnesses", std::to_string(cert.witnesses.size()));
  for (size_t i = 0; i < cert.witnesses.size(); ++i) {
    r.Section("witness " + std::to_string(i + 1));
    PrintWitness(r, cert.witnesses[i]);
  }
  if (!c.emit_samples.empty()) {
    std::ofstream out = OpenCsv(c.emit_samples);
    std::vector<std::string> header;
    AppendColumns(header, "x1", map.n_in());
    AppendColumns(header, "x2", map.n_in());
    AppendColumns(header, "ybar", map.n_out());
    header.insert(header.end(), {"residual", "norm_excess"});
    CsvWriter csv(out, header);
    for (const PairRecord& p : records) {
      std::vector<std::string> row;
      AppendValues(row, p.x1);
      AppendValues(row, p.x2);
      AppendValues(row, p.ybar);
      row.push_back(FormatDouble(p.residual));
      row.push_back(FormatDouble(p.norm_excess));
      csv.Row(row);
    }
  }
  r.Section("result");
  r.Field("verdict", ToString(cert.verdict()));
  return cert.verdict() == Verdict::kCertified ? kExitPass : kExitRefuted;
}

int Witness(const RunConfig& c, Report& r) {
  const ProblemFile f = LoadInput(c);
  const PolyMap map = f.Map();
  const VectorXd x0 = ResolveX0(c, f);
  const double eps = *ResolveEps(c, f, false);
  EchoConfig(r, c, true);
  r.Field("space", f.space().ToString());
  r.Field("x0", Vec(x0));
  r.Field("eps", Num(eps));
  const auto w = FindNonconvexityWitness(map, x0, f.space(), eps, c.samples, c.seed);
  r.Section("result");
  if (!w) {
    r.Field("witness", "none found");
    return kExitPass;
  }
  r.Field("witness", "found");
  PrintWitness(r, *w);
  return kExitRefuted;
}

struct Localized {
  ProblemFile file;
  ConstrainedProblem problem;
  VectorXd x0;
  double eps;
  LocalizedSolution sol;
};

Localized Localize(const RunConfig& c, Report& r) {
  ProblemFile f = LoadInput(c);
  ConstrainedProblem p = f.Problem();
  const VectorXd x0 = ResolveX0(c, f);
  const double eps = *ResolveEps(c, f, false);
  EchoConfig(r, c, true);
  r.Field("space", f.space().ToString());
  r.Field("cone", p.cone.ToString());
  r.Field("x0", Vec(x0));
  r.Field("eps", Num(eps));
  if (c.command == "calm") r.Field("radius", Num(c.radius));
  if (c.command == "duality") r.Field("lambda grid", std::to_string(c.lambda_grid));
  if (c.command == "calm") {
    r.Field("emit-samples", c.emit_samples.empty() ? "-" : c.emit_samples);
  }
  SolveOptions so;
  so.seed = c.seed;
  LocalizedSolution sol =
      ComputeMultiplier(p, x0, eps, SolveLocalization(p, x0, eps, so), c.seed, c.samples);
  r.Section("solution");
  r.Field("x_eps", Vec(sol.x_eps));
  r.Field("value", Num(sol.value));
  r.Field("lambda", Vec(sol.lambda));
  r.Field("nu", Num(sol.nu));
  r.Field("boundary gap", Num(sol.boundary_gap));
  const SolveDiagnostics& d = sol.diagnostics;
  r.Section("diagnostics");
  r.Field("feasibility residual", Num(d.feasibility_residual));
  r.Field("stationarity residual", Num(d.stationarity_residual));
  r.Field("starts", std::to_string(d.starts));
  r.Field("polished starts", std::to_string(d.polished_starts));
  r.Field("multiplier method", d.multiplier_method);
  r.Field("least squares residual", Num(d.least_squares_residual));
  r.Field("separation slack", Num(d.separation_slack));
  r.Field("multiplier discrepancy", YesNo(d.multiplier_discrepancy));
  for (const std::string& n : d.notes) r.Field("note", n);
  return {std::move(f), std::move(p), x0, eps, std::move(sol)};
}

void PrintCheck(Report& r, const std::string& name, const CheckResult& res) {
  r.Field(name, PassFail(res.passed) + " (" + std::to_string(res.samples) +
                    " samples, worst slack " + Num(res.worst_slack) + ")");
  if (!res.passed) {
    r.Field("  witness", Vec(res.witness));
    r.Field("  detail", res.detail);
  }
}

int LocalizeCommand(const RunConfig& c, Report& r) {
  const Localized l = Localize(c, r);
  r.Section("checks");
  const CheckResult normal = CheckNormalCone(
      l.sol.lambda, l.problem.cone.Project(l.problem.constraint.Evaluate(l.sol.x_eps)),
      l.problem.cone, c.tol);
  PrintCheck(r, "normal cone", normal);
  const CheckResult lag =
      CheckLagrangianMin(l.problem, l.x0, l.eps, l.sol, c.samples, c.seed, c.tol);
  PrintCheck(r, "lagrangian minimum", lag);
  const bool ok = normal.passed && lag.passed;
  r.Section("result");
  r.Field("verdict", PassFail(ok));
  return ok ? kExitPass : kExitRefuted;
}

int DualityCommand(const RunConfig& c, Report& r) {
  const Localized l = Localize(c, r);
  const double comp = l.sol.lambda.dot(l.problem.constraint.Evaluate(l.sol.x_eps));
  const CheckResult saddle =
      SaddlePointCheck(l.problem, l.x0, l.eps, l.sol, c.samples, c.seed, c.tol);
  const DualityGap gap =
      DualityGapEstimate(l.problem, l.x0, l.eps, l.sol, c.lambda_grid, c.seed);
  const bool gap_ok = gap.gap >= -1e-6 && gap.gap <= 1e-5;
  r.Section("duality");
  r.Field("complementarity", Num(comp));
  PrintCheck(r, "saddle point", saddle);
  r.Field("primal", Num(gap.primal));
  r.Field("dual", Num(gap.dual));
  r.Field("gap", Num(gap.gap) + " " + PassFail(gap_ok) + " (within [-1e-06, 1e-05])");
  r.Field("best lambda", Vec(gap.best_lambda));
  r.Field("lambdas sampled", std::to_string(gap.lambdas));
  const bool ok = saddle.passed && gap_ok;
  r.Section("result");
  r.Field("verdict", PassFail(ok));
  return ok ? kExitPass : kExitRefuted;
}

int CalmCommand(const RunConfig& c, Report& r) {
  if (!(c.radius > 0.0)) throw UsageError("--radius must be positive");
  const Localized l = Localize(c, r);
  std::vector<ValueFunctionSample> trace;
  const CheckResult sub = SubgradientCheck(l.problem, l.x0, l.eps, l.sol, c.radius,
                                           c.samples, c.seed, 1e-6, &trace);
  const CalmnessResult calm =
      CalmnessCheck(l.problem, l.x0, l.eps, l.sol, c.radius, c.samples, c.seed);
  r.Section("value function");
  PrintCheck(r, "subgradient", sub);
  r.Field("infeasible perturbations",
          std::to_string(static_cast<int>(trace.size()) - sub.samples));
  r.Section("calmness");
  r.Field("quotient lower bound", Num(calm.quotient_lower_bound));
  r.Field("required", Num(calm.required));
  r.Field("y samples", std::to_string(calm.y_samples));
  r.Field("x samples", std::to_string(calm.x_samples));
  r.Field("worst y", Vec(calm.worst_y));
  r.Field("calm", PassFail(calm.passed));
  if (!c.emit_samples.empty()) {
    std::ofstream out = OpenCsv(c.emit_samples);
    std::vector<std::string> header;
    AppendColumns(header, "y", l.problem.m());
    header.insert(header.end(), {"v_of_y", "feasible"});
    CsvWriter csv(out, header);
    for (const ValueFunctionSample& s : trace) {
      std::vector<std::string> row;
      AppendValues(row, s.y);
      row.push_back(s.feasible ? FormatDouble(s.v_of_y) : "");
      row.push_back(s.feasible ? "1" : "0");
      csv.Row(row);
    }
  }
  const bool ok = sub.passed && calm.passed;
  r.Section("result");
  r.Field("verdict", PassFail(ok));
  return ok ? kExitPass : kExitRefuted;
}

std::string ErrorKind(const Error& e) {
#define HCONV_KIND(T) \
  if (dynamic_cast<const T*>(&e)) return #T
  HCONV_KIND(ParseError);
  HCONV_KIND(ValidationFailed);
  HCONV_KIND(DomainError);
  HCONV_KIND(UnsupportedExponent);
  HCONV_KIND(PreconditionViolated);
  HCONV_KIND(DimensionMismatch);
  HCONV_KIND(NotSurjective);
  HCONV_KIND(ConditionFails);
  HCONV_KIND(DimensionTooLarge);
  HCONV_KIND(NotRegular);
  HCONV_KIND(Infeasible);
  HCONV_KIND(EpsilonNonpositive);
  HCONV_KIND(MultiplierNotFound);
  HCONV_KIND(PointNotInCone);
  HCONV_KIND(SemanticError);
  HCONV_KIND(NotFound);
#undef HCONV_KIND
  return "Error";
}

void AddCommon(CLI::App* sub, RunConfig& c, bool with_eps) {
  sub->add_option("file", c.file, "problem file (.pkp)");
  sub->add_option("--registry", c.registry, "built-in instance name");
  sub->add_option("--seed", c.seed, "random seed")->capture_default_str();
  sub->add_option("--samples", c.samples, "sample count")->capture_default_str();
  sub->add_option("--tol", c.tol, "residual tolerance")->capture_default_str();
  sub->add_option("--x0", c.x0, "base point, comma separated")->delimiter(',');
  if (with_eps) sub->add_option("--eps", c.eps, "ball radius");
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Hidden convexity of regular maps and localized duality"};
  app.name("hconv");
  app.require_subcommand(1, 1);

  auto* modulus = app.add_subcommand("modulus", "modulus of convexity of l_p^2");
  modulus->add_option("--p", c.p, "exponent, a number >= 1 or inf")->required();
  modulus->add_option("--eps-grid", c.eps_grid, "eps values, comma separated")
      ->delimiter(',');
  modulus->add_option("--grid-points", c.grid_points, "uniform grid size on (0, 2]")
      ->capture_default_str();
  modulus->add_option("--resolution", c.resolution, "angles of the 2D search")
      ->capture_default_str();

  auto* certify = app.add_subcommand("certify", "certify convexity of f(B(x0, eps))");
  AddCommon(certify, c, true);
  certify->add_option("--emit-samples", c.emit_samples, "CSV of tested pairs");

  auto* witness = app.add_subcommand("witness", "search a non-convexity witness");
  AddCommon(witness, c, true);

  auto* localize = app.add_subcommand("localize", "solve the eps-localization");
  AddCommon(localize, c, true);

  auto* duality = app.add_subcommand("duality", "saddle point and duality gap");
  AddCommon(duality, c, true);
  duality->add_option("--lambda-grid", c.lambda_grid, "sampled multipliers")
      ->capture_default_str();

  auto* calm = app.add_subcommand("calm", "value function subgradient and calmness");
  AddCommon(calm, c, true);
  calm->add_option("--radius", c.radius, "perturbation and calmness radius")
      ->capture_default_str();
  calm->add_option("--emit-samples", c.emit_samples, "CSV of (y, v(y)) samples");

  std::vector<std::string> argv_store{"hconv"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const std::string& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitError;
  }
  c.command = app.get_subcommands().front()->get_name();
  if (c.samples < 1) {
    err << "error: --samples must be positive\n";
    return kExitError;
  }

  // The report is buffered so that a failing run prints only the error.
  std::ostringstream buffer;
  Report r(buffer);
  int code = kExitError;
  try {
    if (c.command == "modulus") {
      code = Modulus(c, r);
    } else if (c.command == "certify") {
      code = Certify(c, r);
    } else if (c.command == "witness") {
      code = Witness(c, r);
    } else if (c.command == "localize") {
      code = LocalizeCommand(c, r);
    } else if (c.command == "duality") {
      code = DualityCommand(c, r);
    } else {
      code = CalmCommand(c, r);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitError;
  } catch (const Error& e) {
    err << "error: " << ErrorKind(e) << ": " << e.what() << '\n';
    return kExitError;
  }
  r.Field("exit code", std::to_string(code));
  out << buffer.str();
  return code;
}

}  // namespace hconv::cli
