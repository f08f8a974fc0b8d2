#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "tmsharp/errors.hpp"
#include "tmsharp/sobolev.hpp"
#include "tmsharp/special.hpp"
#include "tmsharp/threshold.hpp"
#include "tmsharp/variational.hpp"

using namespace tmsharp;

namespace {

const double kCE = 4.0 + 2.0 * 1.2020569031595942854;

SampleGrid default_grid() { return SampleGrid{1e-2, 1e4, 2000}; }

const RadialProfile& trial_plane_10() {
  static const RadialProfile p = build_trial(Geometry::PlaneCritical, 10.0);
  return p;
}

const RadialProfile& trial_disk_10() {
  static const RadialProfile p = build_trial(Geometry::DiskCritical, 10.0);
  return p;
}

RadialProfile dilate(const RadialProfile& p, double lambda) {
  const double shift = std::log(lambda);
  std::vector<double> grid;
  for (double x : p.log_r) grid.push_back(x - shift);
  std::vector<double> breaks;
  for (double x : p.log_r_breaks) breaks.push_back(x - shift);
  auto base = p.evaluator;
  return RadialProfile::sample(
      p.domain, grid,
      [base, shift, lambda](double x) {
        const RadialProfile::Point q = base(x + shift);
        return RadialProfile::Point{q.u, lambda * q.du};
      },
      breaks);
}

}  // namespace

TEST_CASE("LogNum arithmetic matches long double on representable values") {
  const long double xs[] = {-3.5L, -1e-10L, 0.0L, 2.0L, 7.25e5L};
  for (long double x : xs) {
    for (long double y : xs) {
      const LogNum a = LogNum::from_double(x), b = LogNum::from_double(y);
      CHECK((a + b).to_double() == doctest::Approx(static_cast<double>(x + y)).epsilon(1e-14));
      CHECK((a - b).to_double() == doctest::Approx(static_cast<double>(x - y)).epsilon(1e-14));
      CHECK((a * b).to_double() == doctest::Approx(static_cast<double>(x * y)).epsilon(1e-14));
      if (y != 0) CHECK((a / b).to_double() == doctest::Approx(static_cast<double>(x / y)).epsilon(1e-14));
    }
  }
  CHECK_THROWS_AS(LogNum::from_double(1.0) / LogNum{}, std::domain_error);
  CHECK(relative_difference(LogNum::from_double(2.0), LogNum::from_double(1.0)) == doctest::Approx(0.5));
  CHECK(relative_difference(LogNum::from_double(1.0), LogNum::from_double(2.0)) == doctest::Approx(-0.5));
  CHECK(relative_difference(LogNum::from_double(-1.0), LogNum::from_double(1.0)) == doctest::Approx(-2.0));
  CHECK(relative_difference(LogNum{}, LogNum{}) == 0.0);
}

TEST_CASE("expression parser: values, precedence and constants") {
  struct Case {
    const char* text;
    double s, expected;
  };
  const Case cases[] = {
      {"1 + 2*3", 0.0, 7.0},
      {"2^3^2", 0.0, 512.0},
      {"-s^2", 3.0, -9.0},
      {"(1 + s)/(2 - s)", 0.5, 1.0},
      {"exp(s) - log(s)", 2.0, std::exp(2.0) - std::log(2.0)},
      {"pow(s, 1.5) + sqrt(s)", 4.0, 10.0},
      {"cE", 0.0, kCE},
      {"cD + cDp", 0.0, 2 * (1.5 + 2 * 1.2020569031595942854) + 0.5},
      {"pi*e", 0.0, std::numbers::pi * std::numbers::e},
      {"gamma", 0.0, 0.57721566490153286},
      {"s * 1e-3", 2.0, 2e-3},
      {"cutoff(2, s)", 4.5, 4.5},
      {"cutoff(2, s)", 4.0, 0.0},
      {"cutoff(1 + 1, 1)", 3.9, 0.0},
  };
  for (const Case& c : cases) {
    CAPTURE(c.text);
    CHECK(Nonlinearity::parse(c.text)(c.s) == doctest::Approx(c.expected).epsilon(1e-14));
  }
  CHECK(Nonlinearity::parse("cutoff(3, s) + cutoff(0.5, 1)").cutoffs() == std::vector<double>{3.0, 0.5});
  CHECK(Nonlinearity::zero()(5.0) == 0.0);
}

TEST_CASE("expression evaluation does not overflow at large s") {
  const Nonlinearity g = Nonlinearity::parse("exp(s)/s*(1 - cE/s^2)");
  const double s = 1e4;
  const LogNum v = g.eval(s);
  CHECK(v.sign == 1);
  CHECK(static_cast<double>(v.logmag) ==
        doctest::Approx(s - std::log(s) + std::log1p(-kCE / (s * s))).epsilon(1e-15));
  CHECK(std::isinf(g(s)));
  // e^{e^s} keeps a finite log up to the long double range, then is zero or an error.
  CHECK(Nonlinearity::parse("exp(-exp(s))").eval(1e3).sign == 1);
  CHECK(Nonlinearity::parse("exp(-exp(s))").eval(1.2e4).is_zero());
}

TEST_CASE("expression errors report positions and sample points") {
  auto position_of = [](const char* text) -> std::size_t {
    try {
      Nonlinearity::parse(text);
    } catch (const ParseError& e) {
      return e.position();
    }
    return 9999;
  };
  CHECK(position_of("1 + ") == 4);
  CHECK(position_of("s + foo(s)") == 4);
  CHECK(position_of("exp(s") == 5);
  CHECK(position_of("s $ 2") == 2);
  CHECK(position_of("cutoff(s, 1)") == 7);
  CHECK(position_of("cutoff(-1, 1)") == 7);
  CHECK(position_of("") == 0);
  CHECK(position_of("(1))") == 3);
  try {
    Nonlinearity::parse("log(s - 1)").eval(0.5);
    FAIL("expected EvalError");
  } catch (const EvalError& e) {
    CHECK(e.s() == 0.5);
  }
  CHECK_THROWS_AS(Nonlinearity::parse("exp(exp(s))").eval(1.2e4), EvalError);
  CHECK_THROWS_AS(Nonlinearity::parse("1/(s - 2)").eval(2.0), EvalError);
  CHECK_THROWS_AS(Nonlinearity::parse("(0 - s)^0.5").eval(2.0), EvalError);
  CHECK(Nonlinearity::parse("(0 - s)^3").eval(2.0).to_double() == doctest::Approx(-8.0));
}

TEST_CASE("critical nonlinearities") {
  const Nonlinearity gp = critical_plane(10.0);
  CHECK(gp(99.0) == 0.0);
  CHECK(gp(100.5) == doctest::Approx(std::exp(100.5 - kCE / (100.5 * 100.5)) / 100.5).epsilon(1e-13));
  const Nonlinearity gd = critical_disk(10.0);
  const double cDp = 2.0 + 2.0 * 1.2020569031595942854;
  CHECK(gd(120.0) == doctest::Approx(std::exp(120.0 - 1.0 / 120.0 - cDp / (120.0 * 120.0))).epsilon(1e-13));
  REQUIRE(gp.declared_tail);
  CHECK(*gp.declared_tail == 1.0);
}

TEST_CASE("functionals: closed-form profiles") {
  // u = 0 on the plane.
  const RadialProfile zero = RadialProfile::sample(Domain::Plane, {-3.0, -1.0, 0.0, 2.0},
                                                   [](double) { return RadialProfile::Point{0.0, 0.0}; });
  const Functionals f0 = functionals(zero, Nonlinearity::parse("s^2"));
  CHECK(f0.G_int == 0.0);
  CHECK(f0.K == 0.0);
  CHECK(f0.M == 0.0);

  // u = log(1/r)/sqrt(X) on (R, 1), X = log(1/R): K = 1 and
  // M = (1/4 - e^{-2X}(X^2/2 + X/2 + 1/4)) / X.
  const double X = 30.0;
  std::vector<double> grid;
  for (int i = 0; i <= 400; ++i) grid.push_back(-X + X * i / 400.0);
  const double sx = std::sqrt(X);
  const RadialProfile tail = RadialProfile::sample(Domain::Disk, grid, [sx](double x) {
    return RadialProfile::Point{-x / sx, -std::exp(-x) / sx};
  });
  // Start the interval at R so the constant cap below it is excluded.
  const Functionals ft = functionals(tail, Nonlinearity::parse("s"), std::exp(-X), 1.0);
  CHECK(ft.K == doctest::Approx(1.0).epsilon(1e-9));
  const double M_exact = (0.25 - std::exp(-2 * X) * (X * X / 2 + X / 2 + 0.25)) / X;
  CHECK(ft.M == doctest::Approx(M_exact).epsilon(1e-8));
  CHECK(ft.G_int == doctest::Approx(ft.M).epsilon(1e-12));

  CHECK_THROWS_AS(functionals(tail, Nonlinearity::zero(), 0.5, 0.5), DomainError);
}

TEST_CASE("functionals: outer optimizer mass is R^2 mu(2H^2)") {
  for (double H : {6.0, 10.0}) {
    const double R = 1e-20;
    const RadialProfile p = outer_optimizer(H, R);
    const Functionals f = functionals(p, Nonlinearity::zero(), R, std::numeric_limits<double>::infinity());
    CHECK(f.M == doctest::Approx(R * R * solve_mu(2 * H * H).mu).epsilon(1e-6));
    CHECK(f.K == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("profile_diagnostics") {
  std::vector<double> grid;
  for (int i = 0; i < 200; ++i) grid.push_back(-5.0 + 5.0 * i / 199.0);
  const RadialProfile lin = RadialProfile::sample(Domain::Plane, grid, [](double x) {
    const double r = std::exp(x);
    return RadialProfile::Point{std::max(0.0, 1.0 - r), r < 1.0 ? -1.0 : 0.0};
  }, {0.0});
  const ProfileDiagnostics d0 = profile_diagnostics(lin, 4.0);
  CHECK(d0.S == 0.0);
  CHECK(d0.R == 0.0);  // total kinetic energy 1/2 < 1

  const RadialProfile& tr = trial_plane_10();
  const ProfileDiagnostics d5 = profile_diagnostics(tr, 5.0);
  const double H = 10.0;
  CHECK(std::abs(d5.H - H) <= 1e-6);
  CHECK(d5.H == tr.at(d5.log_R).u);
  // R is of order H e^{-H^2}.
  CHECK(std::abs(d5.log_R - (-H * H + std::log(H))) <= 3.0);
  CHECK(d5.S > d5.R);
  CHECK(d5.delta > 0.0);
  CHECK(d5.delta <= 1.0);
  // Raising L moves S inward, so the tail (S, inf) grows.
  const ProfileDiagnostics d8 = profile_diagnostics(tr, 8.0);
  CHECK(d8.S < d5.S);
  CHECK(d8.delta >= d5.delta);
  CHECK(d8.delta <= 1.0);
  CHECK(d8.log_R == d5.log_R);
}

TEST_CASE("profile_diagnostics: delta non-increasing in L" * doctest::should_fail()) {
  const ProfileDiagnostics d5 = profile_diagnostics(trial_plane_10(), 5.0);
  const ProfileDiagnostics d8 = profile_diagnostics(trial_plane_10(), 8.0);
  CHECK(d8.delta <= d5.delta);
}

TEST_CASE("profile_diagnostics: log R window centred on -H^2" * doctest::should_fail()) {
  // The window omits the log H term of R ~ H e^{-H^2}; log R = -96.74 here.
  const ProfileDiagnostics d = profile_diagnostics(trial_plane_10(), 5.0);
  CHECK(d.log_R >= -100.0 - 3.0);
  CHECK(d.log_R <= -100.0 + 3.0);
}

TEST_CASE("build_trial: continuity, kinetic saturation and unit mass") {
  for (Geometry g : {Geometry::PlaneCritical, Geometry::DiskCritical}) {
    const RadialProfile& tr = g == Geometry::PlaneCritical ? trial_plane_10() : trial_disk_10();
    REQUIRE(tr.log_r_breaks.size() == 1);
    const double xR = tr.log_r_breaks[0];
    const double eps = 1e-12;
    CHECK(tr.at(xR).u == 10.0);
    CHECK(std::abs(tr.at(xR - eps).u - tr.at(xR + eps).u) <= 1e-9);
    tr.validate();
    const Functionals f = functionals(tr, Nonlinearity::zero());
    CHECK(f.K == doctest::Approx(2.0).epsilon(1e-6));
    const Functionals fi = functionals(tr, Nonlinearity::zero(), 0.0, std::exp(xR));
    CHECK(fi.K == doctest::Approx(1.0).epsilon(1e-6));
    if (g == Geometry::PlaneCritical) {
      CHECK(f.M <= 1.0);
      CHECK(f.M == doctest::Approx(1.0).epsilon(1e-8));
    }
  }
  CHECK_THROWS_AS(build_trial(Geometry::PlaneCritical, 5.0), DomainError);
}

TEST_CASE("ratio on trial profiles") {
  const RadialProfile& tp = trial_plane_10();
  const double S_inf = std::exp(2.0 - 2.0 * 0.57721566490153286);
  const double crit = ratio(critical_plane(10.0), tp);
  CHECK(std::abs(crit - s_critical(Geometry::PlaneCritical, 10.0)) <= 2e-3);
  CHECK(crit == doctest::Approx(s_critical(Geometry::PlaneCritical, 10.0)).epsilon(1e-8));
  CHECK(std::abs(crit - S_inf) <= 2e-3);

  const Nonlinearity w1 = Nonlinearity::parse("cutoff(5, exp(s)/s*(1 - cE/s^2 + 1/s))");
  const Nonlinearity w3 = Nonlinearity::parse("cutoff(5, exp(s)/s*(1 - cE/s^2 - 1/s))");
  CHECK(ratio(w1, tp) > S_inf);
  CHECK(ratio(w3, tp) < S_inf);
  CHECK(ratio(Nonlinearity::zero(), tp) == 0.0);

  const double disk = ratio(Nonlinearity::parse("cutoff(5, exp(s))"), trial_disk_10());
  CHECK(std::abs(disk - std::numbers::e) <= 1e-2);
  CHECK(ratio(critical_disk(10.0), trial_disk_10()) ==
        doctest::Approx(shoot(Geometry::DiskCritical, 10.0).S0).epsilon(1e-8));
}

TEST_CASE("ratio: dilation invariance and the mass shift") {
  const RadialProfile& tp = trial_plane_10();
  const Nonlinearity w1 = Nonlinearity::parse("cutoff(5, exp(s)/s*(1 - cE/s^2 + 1/s))");
  const double base = ratio(w1, tp);
  for (double lambda : {0.25, 3.0}) CHECK(std::abs(ratio(w1, dilate(tp, lambda)) - base) <= 1e-8);
  for (double m : {0.5, 1.0}) {
    const Nonlinearity shifted = Nonlinearity::parse("(" + w1.text() + ") - " + std::to_string(m) + "*s");
    CHECK(std::abs(ratio(shifted, tp) - (base - m)) <= 1e-8);
  }
  const RadialProfile zero = RadialProfile::sample(Domain::Plane, {-1.0, 0.0, 1.0},
                                                   [](double) { return RadialProfile::Point{0.0, 0.0}; });
  CHECK_THROWS_AS(ratio(Nonlinearity::zero(), zero), DomainError);
}

TEST_CASE("classify: documented plane examples") {
  ClassifyParams P;
  P.p = 1.0;
  P.a = 1.0;
  P.L = 30.0;
  const Nonlinearity w1 = Nonlinearity::parse("cutoff(30, exp(s)/s*(1 - cE/s^2 + 1/s))");
  const Verdict v1 = classify(w1, Geometry::PlaneCritical, P, default_grid());
  CHECK(v1.outcome == Outcome::Existence);
  REQUIRE(v1.matched_condition);
  CHECK(*v1.matched_condition == "(1)");
  CHECK(v1.certificate.size() == 2000);
  for (const auto& row : v1.certificate) CHECK(row.margin >= -1e-12);
  CHECK_FALSE(v1.caveat.empty());

  const Nonlinearity w3 = Nonlinearity::parse("cutoff(30, exp(s)/s*(1 - cE/s^2 - 1/s))");
  const Verdict v3_small = classify(w3, Geometry::PlaneCritical, P, default_grid());
  CHECK(v3_small.outcome == Outcome::Inconclusive);  // L not asserted large
  P.L_large = true;
  const Verdict v3 = classify(w3, Geometry::PlaneCritical, P, default_grid());
  CHECK(v3.outcome == Outcome::NonExistence);
  REQUIRE(v3.matched_condition);
  CHECK(*v3.matched_condition == "(3)");
  for (const auto& row : v3.certificate) CHECK(row.margin <= 1e-12);

  ClassifyParams P3;
  P3.p = 3.0;
  P3.q = 4.0;
  P3.a = 1.0;
  P3.L = 30.0;
  const Nonlinearity mc = Nonlinearity::parse("s*exp(s)/(cE + s^2)");
  CHECK(classify(mc, Geometry::PlaneCritical, P3, default_grid()).outcome == Outcome::Inconclusive);

  // Bit-identical certificates for a fixed grid.
  const Verdict again = classify(w1, Geometry::PlaneCritical, ClassifyParams{1.0, 2.0, 1.0, 0.0, 30.0, {}, false},
                                 default_grid());
  REQUIRE(again.certificate.size() == v1.certificate.size());
  for (std::size_t i = 0; i < again.certificate.size(); ++i) {
    CHECK(again.certificate[i].margin == v1.certificate[i].margin);
    CHECK(again.certificate[i].log_g == v1.certificate[i].log_g);
  }
}

TEST_CASE("classify: p = 3 needs C_*, disk conditions, small-s conditions") {
  ClassifyParams P;
  P.p = 3.0;
  P.q = 4.0;
  P.a = 2.0;
  P.L = 20.0;
  const Nonlinearity g = Nonlinearity::parse("cutoff(20, exp(s)/s*(1 - cE/s^2 + 2/s^3))");
  CHECK(classify(g, Geometry::PlaneCritical, P, default_grid()).outcome == Outcome::Inconclusive);
  P.Cstar = 1.0;
  CHECK(classify(g, Geometry::PlaneCritical, P, default_grid()).outcome == Outcome::Existence);
  P.Cstar = 5.0;
  CHECK(classify(g, Geometry::PlaneCritical, P, default_grid()).outcome == Outcome::Inconclusive);

  ClassifyParams D;
  D.p = 1.0;
  D.a = 0.5;
  D.L = 20.0;
  const Nonlinearity gd = Nonlinearity::parse("cutoff(20, exp(s)*(1 - 1/s - cD/s^2 + 0.5/s))");
  const Verdict vd = classify(gd, Geometry::DiskCritical, D, default_grid());
  CHECK(vd.outcome == Outcome::Existence);
  CHECK(*vd.matched_condition == "(i)");

  // g = s^{-1} 1l_L [1 - cE s^-2] + s^2 meets (2) with b = 0 and a = 1, p = 1.
  ClassifyParams S;
  S.p = 1.0;
  S.q = 2.0;
  S.a = 1.0;
  S.b = 0.0;
  S.L = 20.0;
  const Nonlinearity gs = Nonlinearity::parse("cutoff(20, exp(s)/s*(1 - cE/s^2)) + s^2");
  const Verdict vs = classify(gs, Geometry::PlaneCritical, S, default_grid());
  CHECK(vs.outcome == Outcome::Existence);
  CHECK(*vs.matched_condition == "(2)");
  S.L_large = true;
  const Nonlinearity gn = Nonlinearity::parse("cutoff(20, exp(s)/s*(1 - cE/s^2)) - s^2");
  const Verdict vn = classify(gn, Geometry::PlaneCritical, S, default_grid());
  CHECK(vn.outcome == Outcome::NonExistence);
  CHECK(*vn.matched_condition == "(4)");
}

TEST_CASE("classify: parameter and grid validation") {
  const Nonlinearity g = Nonlinearity::parse("s");
  ClassifyParams P;
  P.L = 5.0;
  auto run = [&](ClassifyParams p, SampleGrid s) { return classify(g, Geometry::PlaneCritical, p, s); };
  ClassifyParams bad = P;
  bad.p = 3.5;
  CHECK_THROWS_AS(run(bad, default_grid()), DomainError);
  bad = P;
  bad.q = 0.5;
  CHECK_THROWS_AS(run(bad, default_grid()), DomainError);
  bad = P;
  bad.a = 0.0;
  CHECK_THROWS_AS(run(bad, default_grid()), DomainError);
  CHECK_THROWS_AS(run(P, SampleGrid{1e-2, 1e4, 999}), DomainError);
  CHECK_THROWS_AS(run(P, SampleGrid{1e-2, 200.0, 2000}), DomainError);
  CHECK_THROWS_AS(classify(Nonlinearity::parse("log(s - 1)"), Geometry::PlaneCritical, P, default_grid()),
                  EvalError);
}
