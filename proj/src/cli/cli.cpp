#include "tmsharp/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "tmsharp/errors.hpp"
#include "tmsharp/expression.hpp"
#include "tmsharp/geometry.hpp"
#include "tmsharp/sobolev.hpp"
#include "tmsharp/soliton.hpp"
#include "tmsharp/variational.hpp"

namespace tmsharp::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Raised for flag combinations CLI11 cannot express.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

double parse_number(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw UsageError("not a number: '" + text + "'");
  }
  while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
  if (used != text.size() || !std::isfinite(v)) throw UsageError("not a finite number: '" + text + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

json jnum(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string csv_num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json config_json(const SolverConfig& c) {
  return json{{"quad_tol", c.quad_tol},       {"newton_tol", c.newton_tol}, {"t_step_core", c.t_step_core},
              {"t_step_tail", c.t_step_tail}, {"t_pad", c.t_pad},           {"crosscheck", c.crosscheck},
              {"precision", to_string(c.precision)}};
}

// Tracks the files a command writes and emits the manifest beside the primary one.
class Run {
 public:
  Run(std::string command, std::vector<std::string> argv, std::optional<std::string> out, bool force)
      : command_(std::move(command)), argv_(std::move(argv)), out_(std::move(out)), force_(force),
        started_(utc_now()) {}

  bool to_file() const { return out_.has_value(); }
  const std::string& out() const { return *out_; }

  /// Fails before any work is done if a target exists and --force is absent.
  void claim(const std::vector<std::string>& paths) {
    for (const auto& p : paths) {
      if (!force_ && fs::exists(p)) throw UsageError("output exists: " + p + " (use --force to overwrite)");
      planned_.push_back(p);
    }
    if (out_) {
      const std::string m = manifest_path(*out_);
      if (!force_ && fs::exists(m)) throw UsageError("output exists: " + m + " (use --force to overwrite)");
    }
  }

  void write(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw UsageError("cannot open " + path + " for writing");
    f << content;
    if (!f) throw UsageError("write failed: " + path);
    written_.push_back(path);
  }

  json snapshot;

  void finish(const std::string& status) {
    if (!out_) return;
    json m{{"schema", kSchemaVersion},
           {"command", command_},
           {"argv", argv_},
           {"config_snapshot", snapshot},
           {"tool_version", kToolVersion},
           {"started_at", started_},
           {"finished_at", utc_now()},
           {"outputs", written_},
           {"status", status}};
    std::ofstream f(manifest_path(*out_), std::ios::trunc);
    f << m.dump(2) << "\n";
  }

 private:
  std::string command_;
  std::vector<std::string> argv_;
  std::optional<std::string> out_;
  bool force_;
  std::string started_;
  std::vector<std::string> planned_;
  std::vector<std::string> written_;
};

// Emits a JSON document to the output file or, without --out, to stdout.
void emit_json(Run& run, std::ostream& out, const json& doc) {
  if (run.to_file())
    run.write(run.out(), doc.dump(2) + "\n");
  else
    out << doc.dump(2) << "\n";
}

SolverConfig load_solver_config(const std::optional<std::string>& path, const std::optional<std::string>& precision) {
  SolverConfig cfg;
  if (path) {
    std::ifstream f(*path);
    if (!f) throw UsageError("cannot read config " + *path);
    std::stringstream ss;
    ss << f.rdbuf();
    cfg = parse_config(ss.str());
  }
  if (precision) cfg.precision = parse_precision(*precision);
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// Subcommands

struct Common {
  std::optional<std::string> out;
  bool force = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--out", c.out, "Output file (stdout when omitted)");
  sub->add_flag("--force", c.force, "Overwrite existing outputs");
}

struct SolverFlags {
  std::optional<std::string> config;
  std::optional<std::string> precision;
};

void add_solver(CLI::App* sub, SolverFlags& s) {
  sub->add_option("--config", s.config, "SolverConfig JSON file");
  sub->add_option("--precision", s.precision, "standard | extended (overrides the config)");
}

const std::vector<std::string> kGeometries{"plane", "disk"};

// mu ------------------------------------------------------------------------

struct MuArgs {
  std::string j;
  bool series = false;
  std::string format = "json";
  Common common;
};

int cmd_mu(const MuArgs& A, const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  const std::vector<double> js = parse_values(A.j);
  for (double j : js)
    if (!(j > 0.0)) throw UsageError("--j values must be positive");
  Run run("mu", argv, A.common.out, A.common.force);
  run.snapshot = {{"j", js}, {"series", A.series}, {"format", A.format}};
  if (run.to_file()) run.claim({run.out()});

  json rows = json::array();
  std::ostringstream csv;
  csv << "j,lambda,theta,mu,log_mu,mu_series_5,rel_diff,ok,error\n";
  int failed = 0;
  for (double j : js) {
    json row{{"j", j}};
    try {
      const MuPoint p = solve_mu(j);
      double ms = std::nan(""), rel = std::nan("");
      // The large-j series is only defined for j > 1.
      if (A.series && j > 1.0) {
        const double lms = log_mu_series(j, 5);
        ms = std::exp(lms);
        rel = std::expm1(lms - p.log_mu);
      }
      row.update({{"lambda", jnum(p.lambda)},
                  {"theta", jnum(p.theta)},
                  {"mu", jnum(p.mu)},
                  {"log_mu", jnum(p.log_mu)},
                  {"mu_series_5", jnum(ms)},
                  {"rel_diff", jnum(rel)},
                  {"ok", true}});
      csv << csv_num(j) << ',' << csv_num(p.lambda) << ',' << csv_num(p.theta) << ',' << csv_num(p.mu) << ','
          << csv_num(p.log_mu) << ',' << (std::isnan(ms) ? std::string() : csv_num(ms)) << ','
          << (std::isnan(rel) ? std::string() : csv_num(rel))
          << ",1,\n";
    } catch (const std::runtime_error& e) {
      ++failed;
      row.update({{"ok", false}, {"error", e.what()}});
      csv << csv_num(j) << ",,,,,,,0," << csv_text(e.what()) << "\n";
      err << "mu: j = " << j << ": " << e.what() << "\n";
    }
    rows.push_back(row);
  }
  const std::string body =
      A.format == "csv" ? csv.str() : json{{"schema", kSchemaVersion}, {"rows", rows}}.dump(2) + "\n";
  if (run.to_file())
    run.write(run.out(), body);
  else
    out << body;
  run.finish(failed == 0 ? "ok" : (failed < static_cast<int>(js.size()) ? "partial" : "failed"));
  return failed == 0 ? kOk : kSolverFailure;
}

// soliton-verify --------------------------------------------------------------

struct VerifyArgs {
  double Ta = 40.0;
  double tol = 1e-10;
  Common common;
};

int cmd_verify(const VerifyArgs& A, const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  if (!(A.tol > 0.0)) throw UsageError("--tol must be positive");
  Run run("soliton-verify", argv, A.common.out, A.common.force);
  run.snapshot = {{"Ta", A.Ta}, {"tol", A.tol}};
  if (run.to_file()) run.claim({run.out()});
  const IdentityReport rep = verify_identities(SolitonFrame::from_Ta(A.Ta), A.tol);

  json checks = json::array();
  char line[256];
  std::snprintf(line, sizeof line, "%-11s %-52s %12s %12s %10s %s\n", "family", "identity", "computed", "expected",
                "deviation", "result");
  out << line;
  for (const IdentityCheck& c : rep.checks) {
    std::snprintf(line, sizeof line, "%-11s %-52s %12.9f %12.9f %10.2e %s\n", c.family.c_str(), c.label.c_str(),
                  c.computed, c.expected, c.deviation, c.pass ? "PASS" : "FAIL");
    out << line;
    checks.push_back({{"family", c.family},
                      {"label", c.label},
                      {"k", c.k},
                      {"j", c.j},
                      {"computed", jnum(c.computed)},
                      {"expected", jnum(c.expected)},
                      {"deviation", jnum(c.deviation)},
                      {"tolerance", c.tolerance},
                      {"pass", c.pass}});
  }
  if (run.to_file()) {
    run.write(run.out(), json{{"schema", kSchemaVersion},
                              {"Ta", A.Ta},
                              {"tol", A.tol},
                              {"all_pass", rep.all_pass},
                              {"checks", checks}}
                             .dump(2) +
                             "\n");
  }
  run.finish(rep.all_pass ? "ok" : "failed");
  if (rep.all_pass) return kOk;
  err << "soliton-verify: failing identities:\n";
  for (const IdentityCheck& c : rep.failures())
    err << "  " << c.family << ": " << c.label << " (deviation " << c.deviation << " > " << c.tolerance << ")\n";
  return kVerifyFailed;
}

// maximize ------------------------------------------------------------------

struct MaximizeArgs {
  std::string geometry = "plane";
  double H = 0.0;
  std::string method = "shoot";
  bool full = false;
  SolverFlags solver;
  Common common;
};

json solution_json(const ProfileSolution& s, bool full) {
  const SolutionChecks c = check_solution(s);
  json j{{"geometry", to_string(s.geometry)},
         {"method", s.method},
         {"H", s.H},
         {"a", s.a},
         {"lagrange", s.lagrange},
         {"T_a", s.T_a},
         {"T_max", s.T_max},
         {"v_inf", s.v_inf},
         {"S0", s.S0},
         {"s_critical", s_critical_from(s)},
         {"residuals", {s.residuals[0], s.residuals[1], s.residuals[2]}},
         {"kinetic", s.kinetic},
         {"iterations", s.iterations},
         {"converged", s.converged},
         {"warnings", s.warnings},
         {"checks",
          {{"v0_zero", c.v0_zero},
           {"v_increasing", c.v_increasing},
           {"vdot_decreasing_positive", c.vdot_decreasing_positive},
           {"concave", c.concave},
           {"schwarz", c.schwarz},
           {"max_identity_residual", c.max_identity_residual},
           {"kinetic_error", c.kinetic_error},
           {"soliton_proximity", c.soliton_proximity}}}};
  if (full) j["grid"] = {{"t", s.t_grid}, {"v", s.v}, {"v_dot", s.v_dot}};
  return j;
}

ProfileSolution solve(Geometry g, double H, const std::string& method, const SolverConfig& cfg) {
  return method == "direct" ? direct_maximize(g, H, cfg) : shoot(g, H, cfg);
}

int cmd_maximize(const MaximizeArgs& A, const std::vector<std::string>& argv, std::ostream& out,
                 std::ostream& err) {
  const Geometry g = parse_geometry(A.geometry);
  if (!(A.H >= 4.0)) throw UsageError("--H must be at least 4");
  const SolverConfig cfg = load_solver_config(A.solver.config, A.solver.precision);
  Run run("maximize", argv, A.common.out, A.common.force);
  run.snapshot = {{"geometry", A.geometry}, {"H", A.H}, {"method", A.method}, {"full", A.full},
                  {"solver", config_json(cfg)}};
  if (run.to_file()) run.claim({run.out()});

  json doc{{"schema", kSchemaVersion}};
  try {
    const ProfileSolution sol = solve(g, A.H, A.method, cfg);
    doc.update(solution_json(sol, A.full));
    doc["ok"] = true;
    if (cfg.crosscheck) {
      const ProfileSolution other = solve(g, A.H, A.method == "direct" ? "shoot" : "direct", cfg);
      const double x = s_critical_from(sol), y = s_critical_from(other);
      const double rel = std::abs(x - y) / std::abs(x);
      doc["crosscheck"] = {{"method", other.method}, {"s_critical", y}, {"relative_difference", rel}};
      if (rel > 1e-8) throw SolverError("crosscheck: methods disagree by " + std::to_string(rel));
    }
  } catch (const SolverError& e) {
    doc["ok"] = false;
    doc["error"] = e.what();
    emit_json(run, out, doc);
    run.finish("failed");
    err << "maximize: " << e.what() << "\n";
    return kSolverFailure;
  }
  emit_json(run, out, doc);
  run.finish("ok");
  return kOk;
}

// sweep ---------------------------------------------------------------------

struct SweepArgs {
  std::string geometry = "plane";
  std::string H;
  bool fit = false;
  std::optional<int> jobs;
  SolverFlags solver;
  Common common;
};

struct Window {
  double lo, hi;
};

int cmd_sweep(const SweepArgs& A, const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  const Geometry g = parse_geometry(A.geometry);
  const std::vector<double> Hs = parse_values(A.H);
  if (Hs.size() < 4) throw UsageError("sweep needs at least 4 H values");
  if (A.fit && !A.common.out) throw UsageError("--fit requires --out");
  const SolverConfig cfg = load_solver_config(A.solver.config, A.solver.precision);
  const int jobs = resolve_jobs(A.jobs);
  Run run("sweep", argv, A.common.out, A.common.force);
  // --jobs only affects scheduling, so it stays out of the snapshot.
  run.snapshot = {{"geometry", A.geometry}, {"H", Hs}, {"fit", A.fit}, {"solver", config_json(cfg)}};
  if (run.to_file()) {
    std::vector<std::string> targets{run.out()};
    if (A.fit) targets.push_back(fit_path(run.out()));
    run.claim(targets);
  }

  const SweepResult res = expansion_sweep(g, Hs, cfg, jobs);
  std::ostringstream csv;
  csv << "H,ok,a,T_a,v_inf,S0,s_critical,resid1,resid2,resid3,kinetic,error\n";
  int ok_rows = 0;
  for (const SweepRow& r : res.rows) {
    csv << csv_num(r.H) << ',' << (r.ok ? 1 : 0);
    if (r.ok) {
      ++ok_rows;
      const ProfileSolution& s = r.solution;
      for (double x : {s.a, s.T_a, s.v_inf, s.S0, r.s_critical, s.residuals[0], s.residuals[1], s.residuals[2],
                       s.kinetic})
        csv << ',' << csv_num(x);
      csv << ",\n";
    } else {
      csv << ",,,,,,,,,," << csv_text(r.error) << "\n";
      err << "sweep: H = " << r.H << ": " << r.error << "\n";
    }
  }
  if (run.to_file())
    run.write(run.out(), csv.str());
  else
    out << csv.str();

  const bool enough = 4 * ok_rows >= 3 * static_cast<int>(res.rows.size());
  bool fits_ok = true;
  if (A.fit) {
    const bool plane = g == Geometry::PlaneCritical;
    const Window c8w = plane ? Window{-0.135, -0.115} : Window{-0.02, 0.02};
    const Window h3w = plane ? Window{0.4, 0.6} : Window{-0.1, 0.1};
    auto scalar = [&](const char* key) -> std::optional<double> {
      const auto it = res.scalars.find(key);
      return it == res.scalars.end() ? std::nullopt : std::optional<double>(it->second);
    };
    auto window = [](std::optional<double> v, double lo, double hi) {
      return json{{"value", v ? jnum(*v) : json(nullptr)},
                  {"lo", jnum(lo)},
                  {"hi", jnum(hi)},
                  {"pass", v.has_value() && *v >= lo && *v <= hi}};
    };
    const auto c8 = scalar("a4_coefficient"), h3 = scalar("H3_coefficient"), slope = scalar("remainder_slope");
    fits_ok = c8 && h3 && slope;
    json windows{{"c8_over_8", window(c8, c8w.lo, c8w.hi)},
                 {"a_H3_coeff", window(h3, h3w.lo, h3w.hi)},
                 {"remainder_slope", window(slope, -std::numeric_limits<double>::infinity(), -5.0)}};
    json doc{{"schema", kSchemaVersion},
             {"geometry", A.geometry},
             {"H", Hs},
             {"rows_ok", ok_rows},
             {"c8_over_8", c8 ? jnum(*c8) : json(nullptr)},
             {"a_H3_coeff", h3 ? jnum(*h3) : json(nullptr)},
             {"remainder_slope", slope ? jnum(*slope) : json(nullptr)},
             {"windows", windows},
             {"scalars", json::object()},
             {"notes", res.notes}};
    if (const auto a2 = scalar("a2_coefficient")) doc["a2_coefficient"] = jnum(*a2);
    for (const auto& [k, v] : res.scalars) doc["scalars"][k] = jnum(v);
    for (const auto& [k, f] : res.fits)
      doc["fits"][k] = {{"powers", f.powers},
                        {"coefficients", f.coefficients},
                        {"residual_rms", jnum(f.residual_rms)},
                        {"condition_estimate", jnum(f.condition_estimate)}};
    run.write(fit_path(run.out()), doc.dump(2) + "\n");
    for (const auto& n : res.notes) err << "sweep: " << n << "\n";
  }
  const bool success = enough && fits_ok;
  run.finish(ok_rows == static_cast<int>(res.rows.size()) && fits_ok ? "ok" : (success ? "partial" : "failed"));
  return success ? kOk : kSolverFailure;
}

// classify --------------------------------------------------------------------

struct ClassifyArgs {
  std::string geometry = "plane";
  std::string expr;
  ClassifyParams params;
  std::string grid = "1e-2:1e4:2000";
  Common common;
};

int cmd_classify(const ClassifyArgs& A, const std::vector<std::string>& argv, std::ostream& out, std::ostream&) {
  const Geometry g = parse_geometry(A.geometry);
  const Nonlinearity nl = Nonlinearity::parse(A.expr);
  const SampleGrid grid = parse_grid(A.grid);
  Run run("classify", argv, A.common.out, A.common.force);
  const ClassifyParams& P = A.params;
  json params{{"p", P.p}, {"q", P.q}, {"a", P.a}, {"b", P.b}, {"L", P.L}, {"L_large", P.L_large},
              {"Cstar", P.Cstar ? json(*P.Cstar) : json(nullptr)}};
  json grid_j{{"s_min", grid.s_min}, {"s_max", grid.s_max}, {"n", grid.n}};
  run.snapshot = {{"geometry", A.geometry}, {"expr", A.expr}, {"params", params}, {"grid", grid_j}};
  if (run.to_file()) run.claim({run.out()});

  const Verdict v = classify(nl, g, P, grid);
  json conditions = json::array();
  for (const ConditionResult& c : v.conditions)
    conditions.push_back({{"tag", c.tag},
                          {"existence", c.existence},
                          {"holds", c.holds},
                          {"worst_margin", jnum(c.worst_margin)},
                          {"worst_s", c.worst_s}});
  json cert = json::array();
  for (const CertificateRow& r : v.certificate)
    cert.push_back({{"s", r.s},
                    {"log_g", jnum(r.log_g)},
                    {"sign_g", r.sign_g},
                    {"log_bound", jnum(r.log_bound)},
                    {"sign_bound", r.sign_bound},
                    {"margin", jnum(r.margin)}});
  const json doc{{"schema", kSchemaVersion},
                 {"geometry", A.geometry},
                 {"expr", A.expr},
                 {"params", params},
                 {"grid", grid_j},
                 {"outcome", to_string(v.outcome)},
                 {"matched_condition", v.matched_condition ? json(*v.matched_condition) : json(nullptr)},
                 {"conditions", conditions},
                 {"certificate_condition", v.certificate_condition},
                 {"certificate", cert},
                 {"reasons", v.reasons},
                 {"caveat", v.caveat}};
  emit_json(run, out, doc);
  if (run.to_file()) {
    out << to_string(v.outcome);
    if (v.matched_condition) out << " " << *v.matched_condition;
    out << "\n";
    for (const auto& r : v.reasons) out << "  " << r << "\n";
  }
  run.finish("ok");
  switch (v.outcome) {
    case Outcome::Existence:
      return kOk;
    case Outcome::NonExistence:
      return kNonExistence;
    case Outcome::Inconclusive:
      return kInconclusive;
  }
  return kInconclusive;
}

// trial -----------------------------------------------------------------------

struct TrialArgs {
  std::string geometry = "plane";
  double H = 0.0;
  std::string expr;
  SolverFlags solver;
  Common common;
};

int cmd_trial(const TrialArgs& A, const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  const Geometry g = parse_geometry(A.geometry);
  const Nonlinearity nl = Nonlinearity::parse(A.expr);
  if (!(A.H >= 6.0)) throw UsageError("--H must be at least 6");
  const SolverConfig cfg = load_solver_config(A.solver.config, A.solver.precision);
  Run run("trial", argv, A.common.out, A.common.force);
  run.snapshot = {{"geometry", A.geometry}, {"H", A.H}, {"expr", A.expr}, {"solver", config_json(cfg)}};
  if (run.to_file()) run.claim({run.out()});

  json doc{{"schema", kSchemaVersion}, {"geometry", A.geometry}, {"H", A.H}, {"expr", A.expr}};
  try {
    const RadialProfile prof = build_trial(g, A.H, cfg);
    const double r = ratio(nl, prof);
    const double thr = s_critical_limit(g);
    doc.update({{"ratio", jnum(r)}, {"threshold", thr}, {"margin", jnum(r - thr)}, {"ok", true}});
  } catch (const SolverError& e) {
    doc.update({{"ok", false}, {"error", e.what()}});
    emit_json(run, out, doc);
    run.finish("failed");
    err << "trial: " << e.what() << "\n";
    return kSolverFailure;
  }
  emit_json(run, out, doc);
  run.finish("ok");
  return kOk;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public helpers

std::vector<double> parse_values(const std::string& text) {
  if (text.find(',') != std::string::npos) {
    std::vector<double> v;
    for (const auto& part : split(text, ',')) v.push_back(parse_number(part));
    return v;
  }
  const std::vector<std::string> parts = split(text, ':');
  if (parts.size() == 1) return {parse_number(parts[0])};
  if (parts.size() != 3) throw UsageError("range must be start:step:stop, got '" + text + "'");
  const double start = parse_number(parts[0]), step = parse_number(parts[1]), stop = parse_number(parts[2]);
  if (!(step > 0.0) || stop < start) throw UsageError("range needs step > 0 and stop >= start: '" + text + "'");
  const double span = (stop - start) / step;
  if (span > 1e6) throw UsageError("range has too many values: '" + text + "'");
  const auto n = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = start + static_cast<double>(i) * step;
  return v;
}

SampleGrid parse_grid(const std::string& text) {
  const std::vector<std::string> parts = split(text, ':');
  if (parts.size() != 3) throw UsageError("grid must be smin:smax:n, got '" + text + "'");
  const double n = parse_number(parts[2]);
  if (n != std::floor(n) || n < 1 || n > 1e7) throw UsageError("grid size must be a positive integer");
  return SampleGrid{parse_number(parts[0]), parse_number(parts[1]), static_cast<int>(n)};
}

SolverConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  SolverConfig c;
  for (const auto& [key, val] : j.items()) {
    auto real = [&](double& field) {
      if (!val.is_number()) throw std::invalid_argument("config: " + key + " must be a number");
      field = val.get<double>();
    };
    if (key == "quad_tol")
      real(c.quad_tol);
    else if (key == "newton_tol")
      real(c.newton_tol);
    else if (key == "t_step_core")
      real(c.t_step_core);
    else if (key == "t_step_tail")
      real(c.t_step_tail);
    else if (key == "t_pad")
      real(c.t_pad);
    else if (key == "crosscheck") {
      if (!val.is_boolean()) throw std::invalid_argument("config: crosscheck must be a boolean");
      c.crosscheck = val.get<bool>();
    } else if (key == "precision") {
      if (!val.is_string()) throw std::invalid_argument("config: precision must be a string");
      c.precision = parse_precision(val.get<std::string>());
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

std::string config_to_json(const SolverConfig& cfg) { return config_json(cfg).dump(2); }

int resolve_jobs(std::optional<int> flag) {
  if (flag) {
    if (*flag < 1) throw UsageError("--jobs must be at least 1");
    return *flag;
  }
  if (const char* env = std::getenv("TM_SHARP_JOBS"); env && *env) {
    const double v = parse_number(env);
    if (v < 1 || v != std::floor(v) || v > 4096) throw UsageError("TM_SHARP_JOBS must be a positive integer");
    return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string manifest_path(const std::string& out) { return out + ".manifest.json"; }

std::string fit_path(const std::string& out) { return out + ".fit.json"; }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"tmsharp: numerical companion for sharp Trudinger-Moser thresholds", "tmsharp"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  MuArgs mu;
  auto* s_mu = app.add_subcommand("mu", "Exponential radial Sobolev function mu(j)");
  s_mu->add_option("--j", mu.j, "j value, start:step:stop range or comma list")->required()->allow_extra_args(false);
  s_mu->add_flag("--series", mu.series, "Compare with the 5-term large-j series");
  s_mu->add_option("--format", mu.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  add_common(s_mu, mu.common);

  VerifyArgs ver;
  auto* s_ver = app.add_subcommand("soliton-verify", "Check the closed-form soliton integrals");
  s_ver->add_option("--Ta", ver.Ta, "Transition time of the frame")->capture_default_str();
  s_ver->add_option("--tol", ver.tol, "Pass tolerance")->capture_default_str();
  add_common(s_ver, ver.common);

  MaximizeArgs mx;
  auto* s_mx = app.add_subcommand("maximize", "Solve the concentrating maximizer at height H");
  s_mx->add_option("--geometry", mx.geometry, "plane | disk")->check(CLI::IsMember(kGeometries));
  s_mx->add_option("--H", mx.H, "Height H >= 4")->required();
  s_mx->add_option("--method", mx.method, "shoot | direct")->check(CLI::IsMember({"shoot", "direct"}));
  s_mx->add_flag("--full", mx.full, "Include the solution grid");
  add_solver(s_mx, mx.solver);
  add_common(s_mx, mx.common);

  SweepArgs sw;
  auto* s_sw = app.add_subcommand("sweep", "Solve over a range of H and fit expansion coefficients");
  s_sw->add_option("--geometry", sw.geometry, "plane | disk")->check(CLI::IsMember(kGeometries));
  s_sw->add_option("--H", sw.H, "start:step:stop or comma list (>= 4 values, each >= 6)")->required();
  s_sw->add_flag("--fit", sw.fit, "Write the fit report next to the CSV");
  s_sw->add_option("--jobs", sw.jobs, "Worker threads (default TM_SHARP_JOBS or all cores)");
  add_solver(s_sw, sw.solver);
  add_common(s_sw, sw.common);

  ClassifyArgs cl;
  std::optional<double> cstar;
  auto* s_cl = app.add_subcommand("classify", "Check a nonlinearity against the threshold conditions");
  s_cl->add_option("--geometry", cl.geometry, "plane | disk")->check(CLI::IsMember(kGeometries));
  s_cl->add_option("--expr", cl.expr, "g(s) as an expression in s")->required();
  s_cl->add_option("--p", cl.params.p, "Exponent p in (0, 3]")->capture_default_str();
  s_cl->add_option("--q", cl.params.q, "Exponent q > p")->capture_default_str();
  s_cl->add_option("--a", cl.params.a, "Coefficient a > 0")->capture_default_str();
  s_cl->add_option("--b", cl.params.b, "Coefficient b")->capture_default_str();
  s_cl->add_option("--L", cl.params.L, "Cutoff level L > 0")->capture_default_str();
  s_cl->add_option("--Cstar", cstar, "Constant C_* for the p = 3 case");
  s_cl->add_flag("--L-large", cl.params.L_large, "Assert L is large enough for non-existence");
  s_cl->add_option("--grid", cl.grid, "smin:smax:n")->capture_default_str();
  add_common(s_cl, cl.common);

  TrialArgs tr;
  auto* s_tr = app.add_subcommand("trial", "Evaluate g on the concentrating trial profile");
  s_tr->add_option("--geometry", tr.geometry, "plane | disk")->check(CLI::IsMember(kGeometries));
  s_tr->add_option("--H", tr.H, "Height H >= 6")->required();
  s_tr->add_option("--expr", tr.expr, "g(s) as an expression in s")->required();
  add_solver(s_tr, tr.solver);
  add_common(s_tr, tr.common);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (s_mu->parsed()) return cmd_mu(mu, args, out, err);
    if (s_ver->parsed()) return cmd_verify(ver, args, out, err);
    if (s_mx->parsed()) return cmd_maximize(mx, args, out, err);
    if (s_sw->parsed()) return cmd_sweep(sw, args, out, err);
    if (s_cl->parsed()) {
      cl.params.Cstar = cstar;
      return cmd_classify(cl, args, out, err);
    }
    if (s_tr->parsed()) return cmd_trial(tr, args, out, err);
  } catch (const ParseError& e) {
    err << "error: expression: " << e.what() << "\n";
    return kUsage;
  } catch (const EvalError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const SolverError& e) {
    err << "error: solver: " << e.what() << "\n";
    return kSolverFailure;
  } catch (const RootBracketError& e) {
    err << "error: solver: " << e.what() << "\n";
    return kSolverFailure;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kSolverFailure;
  }
  return kUsage;
}

}  // namespace tmsharp::cli
