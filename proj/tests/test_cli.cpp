#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "tmsharp/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tmsharp::cli;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result tool(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

// Fresh scratch directory per test case.
struct Scratch {
  fs::path dir;
  Scratch() {
    static int counter = 0;
    dir = fs::temp_directory_path() / ("tmsharp_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json load(const std::string& path) { return json::parse(slurp(path)); }

const char* kWitness1 = "cutoff(30, exp(s)/s*(1 - cE/s^2 + 1/s))";
const char* kWitness3 = "cutoff(30, exp(s)/s*(1 - cE/s^2 - 1/s))";

}  // namespace

TEST_CASE("parse_values and parse_grid") {
  CHECK(parse_values("10") == std::vector<double>{10.0});
  CHECK(parse_values("6:2:12") == std::vector<double>{6, 8, 10, 12});
  CHECK(parse_values("6:2:13") == std::vector<double>{6, 8, 10, 12});
  CHECK(parse_values("0.1:0.1:0.3").size() == 3);
  CHECK(parse_values("6,9,14") == std::vector<double>{6, 9, 14});
  CHECK_THROWS_AS(parse_values("6:0:12"), std::invalid_argument);
  CHECK_THROWS_AS(parse_values("12:2:6"), std::invalid_argument);
  CHECK_THROWS_AS(parse_values("6:2"), std::invalid_argument);
  CHECK_THROWS_AS(parse_values("abc"), std::invalid_argument);
  CHECK_THROWS_AS(parse_values("6,,8"), std::invalid_argument);
  const tmsharp::SampleGrid g = parse_grid("1e-2:1e4:2000");
  CHECK(g.s_min == 1e-2);
  CHECK(g.s_max == 1e4);
  CHECK(g.n == 2000);
  CHECK_THROWS_AS(parse_grid("1:2"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("1:2:3.5"), std::invalid_argument);
}

TEST_CASE("solver config JSON round trip and validation") {
  tmsharp::SolverConfig c;
  c.newton_tol = 3e-12;
  c.t_pad = 25.0;
  c.crosscheck = true;
  c.precision = tmsharp::Precision::Extended;
  const tmsharp::SolverConfig back = parse_config(config_to_json(c));
  CHECK(back.newton_tol == c.newton_tol);
  CHECK(back.t_pad == c.t_pad);
  CHECK(back.crosscheck);
  CHECK(back.precision == tmsharp::Precision::Extended);
  CHECK(parse_config("{}").quad_tol == 1e-12);
  CHECK_THROWS_AS(parse_config(R"({"bogus": 1})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"newton_tol": -1})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"crosscheck": 1})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("[1]"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("{"), std::invalid_argument);
}

TEST_CASE("resolve_jobs: flag, environment, default") {
  CHECK(resolve_jobs(3) == 3);
  CHECK_THROWS_AS(resolve_jobs(0), std::invalid_argument);
  ::setenv("TM_SHARP_JOBS", "2", 1);
  CHECK(resolve_jobs(std::nullopt) == 2);
  CHECK(resolve_jobs(5) == 5);
  ::setenv("TM_SHARP_JOBS", "two", 1);
  CHECK_THROWS_AS(resolve_jobs(std::nullopt), std::invalid_argument);
  ::unsetenv("TM_SHARP_JOBS");
  CHECK(resolve_jobs(std::nullopt) >= 1);
}

TEST_CASE("usage") {
  CHECK(tool({}).code == kUsage);
  CHECK(tool({"--help"}).code == kOk);
  CHECK(tool({"--version"}).out.find(kToolVersion) != std::string::npos);
  CHECK(tool({"frobnicate"}).code == kUsage);
  CHECK(tool({"maximize", "--geometry", "torus", "--H", "10"}).code == kUsage);
  CHECK(tool({"maximize"}).code == kUsage);  // --H required
}

TEST_CASE("mu subcommand") {
  const Result r = tool({"mu", "--j", "40", "--series"});
  REQUIRE(r.code == kOk);
  const json row = json::parse(r.out)["rows"][0];
  CHECK(row["ok"].get<bool>());
  // The 5-term series leaves an O(j^-6) relative error.
  const double rel40 = row["rel_diff"].get<double>();
  const json row20 = json::parse(tool({"mu", "--j", "20", "--series"}).out)["rows"][0];
  const double rel20 = row20["rel_diff"].get<double>();
  const double slope = std::log(std::abs(rel40 / rel20)) / std::log(2.0);
  CHECK(slope == doctest::Approx(-6.0).epsilon(1.0 / 6.0));

  const json small = json::parse(tool({"mu", "--j", "0.05"}).out)["rows"][0];
  CHECK(std::abs(16.0 * small["mu"].get<double>() / (0.05 * 0.05) - 1.0) <= 0.05);
  CHECK(small["mu_series_5"].is_null());

  CHECK(tool({"mu", "--j", "-1"}).code == kUsage);
  CHECK(tool({"mu", "--j", "0"}).code == kUsage);
  CHECK(tool({"mu", "--j", "1", "--format", "xml"}).code == kUsage);

  const Result csv = tool({"mu", "--j", "1:1:3", "--format", "csv", "--series"});
  REQUIRE(csv.code == kOk);
  std::istringstream lines(csv.out);
  std::string header, line;
  std::getline(lines, header);
  CHECK(header == "j,lambda,theta,mu,log_mu,mu_series_5,rel_diff,ok,error");
  int n = 0;
  while (std::getline(lines, line)) {
    ++n;
    // j = 1 lies outside the series range, so its series cells stay empty.
    if (n == 1) CHECK(line.find(",,") != std::string::npos);
    if (n > 1) CHECK(line.find(",,") == std::string::npos);
  }
  CHECK(n == 3);
}

TEST_CASE("soliton-verify subcommand") {
  const Result r = tool({"soliton-verify"});
  CHECK(r.code == kOk);
  CHECK(r.out.find("(zeta(3)-1)/4") != std::string::npos);
  const Result tight = tool({"soliton-verify", "--tol", "1e-16"});
  CHECK(tight.code == kVerifyFailed);
  CHECK(tight.err.find("failing identities") != std::string::npos);
  CHECK(tool({"soliton-verify", "--Ta", "5"}).code == kUsage);
}

TEST_CASE("maximize subcommand") {
  Scratch dir;
  const std::string plane = dir.path("plane.json");
  REQUIRE(tool({"maximize", "--geometry", "plane", "--H", "10", "--out", plane}).code == kOk);
  const json p = load(plane);
  CHECK(p["schema"] == kSchemaVersion);
  CHECK(std::abs(p["s_critical"].get<double>() - 2.3293) <= 1e-3);
  CHECK(p["residuals"].size() == 3);
  CHECK_FALSE(p.contains("grid"));
  const json m = load(manifest_path(plane));
  CHECK(m["schema"] == 1);
  CHECK(m["status"] == "ok");
  CHECK(m["command"] == "maximize");
  CHECK(m["outputs"] == json::array({plane}));
  CHECK(m["config_snapshot"]["solver"]["newton_tol"] == 1e-11);
  CHECK(m.contains("started_at"));
  CHECK(m.contains("finished_at"));
  CHECK(m["tool_version"] == kToolVersion);

  // Collision without --force; identical bytes when forced.
  const std::string before = slurp(plane);
  CHECK(tool({"maximize", "--geometry", "plane", "--H", "10", "--out", plane}).code == kUsage);
  REQUIRE(tool({"maximize", "--geometry", "plane", "--H", "10", "--out", plane, "--force"}).code == kOk);
  CHECK(slurp(plane) == before);

  const Result disk = tool({"maximize", "--geometry", "disk", "--H", "10", "--full", "--method", "direct"});
  REQUIRE(disk.code == kOk);
  const json d = json::parse(disk.out);
  CHECK(std::abs(d["s_critical"].get<double>() - 2.7183) <= 1e-3);
  CHECK(d["method"] == "direct");
  CHECK(d["grid"]["t"].size() == d["grid"]["v"].size());
  CHECK(d["grid"]["t"].size() > 100);

  CHECK(tool({"maximize", "--H", "2"}).code == kUsage);

  // Config file with extended precision and crosscheck.
  const std::string cfg = dir.path("cfg.json");
  std::ofstream(cfg) << R"({"precision": "extended", "crosscheck": true})";
  const Result ext = tool({"maximize", "--H", "8", "--config", cfg});
  REQUIRE(ext.code == kOk);
  const json e = json::parse(ext.out);
  CHECK(e["crosscheck"]["relative_difference"].get<double>() <= 1e-8);

  const std::string bad = dir.path("bad.json");
  std::ofstream(bad) << R"({"quad_tol": 0})";
  CHECK(tool({"maximize", "--H", "8", "--config", bad}).code == kUsage);
  CHECK(tool({"maximize", "--H", "8", "--config", dir.path("missing.json")}).code == kUsage);

  // Unattainable tolerance: exit 2 with the residual report in the output.
  const std::string tiny = dir.path("tiny.json");
  std::ofstream(tiny) << R"({"newton_tol": 1e-30})";
  const std::string failed = dir.path("failed.json");
  const Result f = tool({"maximize", "--H", "8", "--config", tiny, "--out", failed});
  CHECK(f.code == kSolverFailure);
  const json fj = load(failed);
  CHECK_FALSE(fj["ok"].get<bool>());
  CHECK(fj["error"].get<std::string>().find("resid") != std::string::npos);
  CHECK(load(manifest_path(failed))["status"] == "failed");
}

TEST_CASE("sweep subcommand: fits, determinism, failures") {
  Scratch dir;
  const std::string p = dir.path("plane.csv");
  REQUIRE(tool({"sweep", "--geometry", "plane", "--H", "6:2:12", "--fit", "--out", p, "--jobs", "3"}).code == kOk);
  const json pf = load(fit_path(p));
  CHECK(pf["c8_over_8"].get<double>() >= -0.135);
  CHECK(pf["c8_over_8"].get<double>() <= -0.115);
  CHECK(pf["remainder_slope"].get<double>() <= -5.0);
  CHECK(pf["a_H3_coeff"].get<double>() >= 0.4);
  CHECK(pf["a_H3_coeff"].get<double>() <= 0.6);
  CHECK(pf["windows"]["c8_over_8"]["pass"].get<bool>());
  CHECK(pf["windows"]["a_H3_coeff"]["pass"].get<bool>());
  CHECK(pf["windows"]["remainder_slope"]["pass"].get<bool>());
  const json m = load(manifest_path(p));
  CHECK(m["outputs"] == json::array({p, fit_path(p)}));

  std::istringstream csv(slurp(p));
  std::string header, line;
  std::getline(csv, header);
  CHECK(header == "H,ok,a,T_a,v_inf,S0,s_critical,resid1,resid2,resid3,kinetic,error");
  std::vector<std::string> first_cells;
  while (std::getline(csv, line)) first_cells.push_back(line.substr(0, line.find(',')));
  CHECK(first_cells == std::vector<std::string>{"6", "8", "10", "12"});

  // Worker count does not change the bytes written.
  const std::string p1 = dir.path("plane1.csv");
  REQUIRE(tool({"sweep", "--geometry", "plane", "--H", "6,8,10,12", "--fit", "--out", p1, "--jobs", "1"}).code ==
          kOk);
  CHECK(slurp(p1) == slurp(p));
  CHECK(slurp(fit_path(p1)) == slurp(fit_path(p)));
  CHECK(load(manifest_path(p1))["config_snapshot"] == m["config_snapshot"]);

  const std::string d = dir.path("disk.csv");
  REQUIRE(tool({"sweep", "--geometry", "disk", "--H", "6:2:12", "--fit", "--out", d}).code == kOk);
  const json df = load(fit_path(d));
  CHECK(std::abs(df["c8_over_8"].get<double>()) <= 0.02);
  CHECK(std::abs(df["a_H3_coeff"].get<double>()) <= 0.1);
  CHECK(df["windows"]["c8_over_8"]["pass"].get<bool>());

  CHECK(tool({"sweep", "--H", "6:2:10", "--out", dir.path("few.csv")}).code == kUsage);
  CHECK(tool({"sweep", "--H", "6:2:12", "--fit"}).code == kUsage);  // --fit needs --out
  CHECK(tool({"sweep", "--H", "6:2:12", "--out", p}).code == kUsage);  // collision

  const std::string tiny = dir.path("tiny.json");
  std::ofstream(tiny) << R"({"newton_tol": 1e-30})";
  const std::string bad = dir.path("bad.csv");
  const Result r = tool({"sweep", "--H", "6:2:12", "--fit", "--config", tiny, "--out", bad});
  CHECK(r.code == kSolverFailure);
  std::istringstream rows(slurp(bad));
  std::getline(rows, header);
  int marked = 0;
  while (std::getline(rows, line)) marked += line.substr(line.find(',') + 1, 2) == "0,";
  CHECK(marked == 4);
  CHECK(load(manifest_path(bad))["status"] == "failed");
}

TEST_CASE("classify subcommand: documented outcomes and exit codes") {
  Scratch dir;
  const std::string c1 = dir.path("c1.json");
  CHECK(tool({"classify", "--geometry", "plane", "--expr", kWitness1, "--L", "30", "--out", c1}).code == kOk);
  const json v1 = load(c1);
  CHECK(v1["outcome"] == "Existence");
  CHECK(v1["matched_condition"] == "(1)");
  CHECK(v1["certificate"].size() == 2000);
  CHECK_FALSE(v1["caveat"].get<std::string>().empty());

  // Bit-stable certificate.
  const std::string c1b = dir.path("c1b.json");
  REQUIRE(tool({"classify", "--expr", kWitness1, "--L", "30", "--out", c1b}).code == kOk);
  CHECK(slurp(c1) == slurp(c1b));

  const Result r3 = tool({"classify", "--expr", kWitness3, "--L", "30", "--L-large"});
  CHECK(r3.code == kNonExistence);
  CHECK(json::parse(r3.out)["matched_condition"] == "(3)");

  const Result r5 = tool({"classify", "--expr", "s*exp(s)/(cE + s^2)", "--p", "3", "--q", "4", "--L", "30"});
  CHECK(r5.code == kInconclusive);
  CHECK(json::parse(r5.out)["matched_condition"].is_null());

  const Result bad = tool({"classify", "--expr", "s + foo(s)", "--L", "30"});
  CHECK(bad.code == kUsage);
  CHECK(bad.err.find("position 4") != std::string::npos);
  CHECK(tool({"classify", "--expr", "s", "--L", "30", "--grid", "1e-2:1e2:2000"}).code == kUsage);
  CHECK(tool({"classify", "--expr", "s", "--p", "4"}).code == kUsage);
}

TEST_CASE("trial subcommand: margins at H = 10") {
  auto margin = [](const std::string& geometry, const std::string& expr) {
    const Result r = tool({"trial", "--geometry", geometry, "--H", "10", "--expr", expr});
    REQUIRE(r.code == kOk);
    return json::parse(r.out)["margin"].get<double>();
  };
  CHECK(margin("plane", "cutoff(5, exp(s)/s*(1 - cE/s^2 + 1/s))") > 0.0);
  CHECK(margin("plane", "cutoff(5, exp(s)/s*(1 - cE/s^2 - 1/s))") < 0.0);
  CHECK(std::abs(margin("plane", "cutoff(10, exp(s - cE/s^2)/s)")) <= 2e-3);
  CHECK(std::abs(margin("disk", "cutoff(5, exp(s))")) <= 1e-2);
  CHECK(tool({"trial", "--H", "5", "--expr", "s"}).code == kUsage);
  CHECK(tool({"trial", "--H", "10", "--expr", "exp("}).code == kUsage);
}
