#include <cmath>
#include <numbers>

#include "doctest.h"
#include "tmsharp/quadrature.hpp"
#include "tmsharp/series_fit.hpp"
#include "tmsharp/special.hpp"

using namespace tmsharp;
using doctest::Approx;

namespace {

// Independent oracle: H_n - log n - 1/(2n) + 1/(12 n^2) at n = 10^6.
double gamma_oracle() {
  constexpr long n = 1000000;
  long double h = 0.0L;
  for (long k = n; k >= 1; --k) h += 1.0L / static_cast<long double>(k);
  const long double nn = n;
  return static_cast<double>(h - std::log(nn) - 1.0L / (2 * nn) + 1.0L / (12 * nn * nn));
}

// Partial sum to N plus the Euler-Maclaurin tail of the remainder.
double zeta_oracle(double k) {
  constexpr int N = 100000;
  long double s = 0.0L;
  for (int n = N - 1; n >= 1; --n) s += std::pow(static_cast<long double>(n), -static_cast<long double>(k));
  const long double nn = N;
  s += std::pow(nn, 1 - k) / (k - 1) + 0.5L * std::pow(nn, -k) + k / 12.0L * std::pow(nn, -k - 1);
  return static_cast<double>(s);
}

}  // namespace

TEST_CASE("euler_gamma matches the harmonic-number oracle") {
  const double g = euler_gamma();
  CHECK(std::abs(g - 0.5772156649) < 1e-10);
  CHECK(std::abs(g - gamma_oracle()) < 1e-12);
  CHECK(g > 0.5);
  CHECK(g < 0.6);
  CHECK(constants().S_inf_plane == std::exp(2.0 - 2.0 * g));
}

TEST_CASE("zeta against partial sums and closed forms") {
  const double pi = std::numbers::pi;
  CHECK(std::abs(zeta(2.0) - 1.6449340668) < 1e-9);
  CHECK(std::abs(zeta(3.0) - 1.2020569032) < 1e-9);
  CHECK(std::abs(zeta(2.0) / (pi * pi / 6.0) - 1.0) < 1e-12);
  CHECK(std::abs(zeta(4.0) / (std::pow(pi, 4) / 90.0) - 1.0) < 1e-12);
  for (double k : {1.5, 2.0, 2.5, 3.0, 4.0, 7.0}) {
    CAPTURE(k);
    CHECK(std::abs(zeta(k) / zeta_oracle(k) - 1.0) < 1e-12);
  }
  CHECK_THROWS_AS(zeta(1.0), DomainError);
  CHECK_THROWS_AS(zeta(0.5), DomainError);
}

TEST_CASE("dilog against direct and alternating series") {
  const double pi = std::numbers::pi;
  CHECK(dilog(0.0) == 0.0);
  CHECK(std::abs(dilog(1.0) - pi * pi / 6.0) < 1e-12);
  CHECK(std::abs(dilog(1.0) - zeta(2.0)) < 1e-12);
  // Alternating series for Li2(-1) with averaged consecutive partial sums.
  long double s = 0.0L, prev = 0.0L;
  for (int k = 1; k <= 200000; ++k) {
    prev = s;
    s += ((k % 2) ? -1.0L : 1.0L) / (static_cast<long double>(k) * k);
  }
  const double alt = static_cast<double>(0.5L * (s + prev));
  CHECK(std::abs(dilog(-1.0) - alt) < 1e-10);
  CHECK(std::abs(dilog(-1.0) + pi * pi / 12.0) < 1e-12);
  for (double x : {-0.9, -0.6, -0.3, 0.2, 0.45, 0.55, 0.8, 0.9}) {
    long double direct = 0.0L, xk = x;
    for (int k = 1; k <= 2000; ++k) {
      direct += xk / (static_cast<long double>(k) * k);
      xk *= x;
    }
    CAPTURE(x);
    CHECK(std::abs(dilog(x) / static_cast<double>(direct) - 1.0) < 1e-12);
  }
  // Inversion branch against the functional identity of Li2(-x) + Li2(-1/x).
  for (double x : {1.5, 4.0, 100.0, 1e6}) {
    const double l = std::log(x);
    CHECK(std::abs(dilog(-x) + dilog(-1.0 / x) + pi * pi / 6.0 + 0.5 * l * l) < 1e-12 * (1 + l * l));
  }
  CHECK_THROWS_AS(dilog(1.0001), DomainError);
}

TEST_CASE("gamma_fn values") {
  CHECK(gamma_fn(3.0) == 2.0);
  CHECK(gamma_fn(5.0) == 24.0);
  CHECK(gamma_fn(1.0) == 1.0);
  // Oracle: Gamma(1/2) = int t^{-1/2} e^{-t} dt = 2 int e^{-s^2} ds.
  const QuadResult r = integrate([](double s) { return 2.0 * std::exp(-s * s); }, 0.0, kInf, 1e-14);
  CHECK(std::abs(gamma_fn(0.5) - r.value) < 1e-10);
  CHECK(std::abs(gamma_fn(0.5) / std::sqrt(std::numbers::pi) - 1.0) < 1e-12);
  // Recurrence across the Stirling shift.
  for (double x : {0.3, 1.7, 4.25, 9.5, 12.5}) {
    CAPTURE(x);
    CHECK(std::abs(gamma_fn(x + 1.0) / (x * gamma_fn(x)) - 1.0) < 1e-12);
  }
  CHECK(std::abs(gamma_fn(4.5) / (3.5 * 2.5 * 1.5 * 0.5 * std::sqrt(std::numbers::pi)) - 1.0) < 1e-13);
  CHECK_THROWS_AS(gamma_fn(0.0), DomainError);
  CHECK_THROWS_AS(gamma_fn(-1.0), DomainError);
}

TEST_CASE("constant table identities") {
  const auto& c = constants();
  CHECK(std::abs((c.cDp - c.cD) - 0.5) <= 1e-15);
  CHECK(std::abs((c.cE - c.cDp) - 2.0) <= 1e-15);
  CHECK(std::abs(c.c1 - (2.0 * c.c0 + 1.0 - std::log(2.0))) <= 1e-15);
  CHECK(std::abs(c.c0 - std::numbers::pi * std::numbers::pi / 24.0) < 1e-14);
  CHECK(std::abs(c.cE - (4.0 + 2.0 * zeta_oracle(3.0))) < 1e-12);
  CHECK(std::abs(c.cInf - (1.0 - c.c1) / 2.0) == 0.0);
  CHECK(c.S_inf_disk == std::exp(1.0));
}

TEST_CASE("integrate: closed-form examples") {
  CHECK(std::abs(integrate([](double s) { return s; }, 0.0, 1.0, 1e-12).value - 0.5) < 1e-14);
  CHECK(std::abs(integrate([](double t) { return std::exp(-t); }, 0.0, kInf, 1e-12).value - 1.0) < 1e-12);
  const QuadResult r = integrate(
      [](double t) {
        const double c = std::cosh(t);
        return 1.0 / (c * c);
      },
      0.0, kInf, 1e-12);
  CHECK(std::abs(r.value - 1.0) < 1e-12);
  CHECK(r.converged);
}

TEST_CASE("integrate polynomial-times-exponential family within err_est") {
  double fact = 1.0;
  for (int n = 0; n <= 8; ++n) {
    if (n > 0) fact *= n;
    for (double c : {0.5, 1.0, 3.0}) {
      const QuadResult r = integrate([n, c](double t) { return std::pow(t, n) * std::exp(-c * t); }, 0.0, kInf);
      const double exact = fact / std::pow(c, n + 1);
      CAPTURE(n);
      CAPTURE(c);
      CHECK(std::abs(r.value - exact) <= std::max(r.err_est, 1e-12 * exact) + 1e-15);
    }
  }
}

TEST_CASE("Kronrod rule integrates low-degree polynomials in one panel") {
  for (int deg = 0; deg <= 31; ++deg) {
    QuadOptions o;
    o.max_subdivisions = 0;
    const QuadResult r = integrate([deg](double x) { return std::pow(x, deg); }, 0.0, 1.0, o);
    CAPTURE(deg);
    CHECK(std::abs(r.value - 1.0 / (deg + 1)) < 1e-15);
  }
}

TEST_CASE("integrate reports non-convergence with best estimate") {
  QuadOptions o;
  o.max_subdivisions = 3;
  o.abs_tol = 1e-15;
  o.rel_tol = 1e-15;
  auto f = [](double x) { return std::sin(200.0 * x); };
  const QuadResult r = integrate(f, 0.0, 10.0, o);
  CHECK_FALSE(r.converged);
  CHECK_THROWS_AS(integrate_or_throw(f, 0.0, 10.0, o), QuadratureError);
  // Reversed limits flip the sign.
  CHECK(integrate([](double x) { return x * x; }, 1.0, 0.0).value == Approx(-1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("gauss_legendre nodes and weights") {
  for (int n : {1, 2, 5, 16, 33}) {
    const auto rule = gauss_legendre(n);
    double wsum = 0.0;
    for (double w : rule.weights) wsum += w;
    CHECK(std::abs(wsum - 2.0) < 1e-14);
    for (int deg = 0; deg <= 2 * n - 1; ++deg) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += rule.weights[i] * std::pow(rule.nodes[i], deg);
      const double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
      CAPTURE(n);
      CAPTURE(deg);
      CHECK(std::abs(s - exact) < 1e-14);
    }
  }
}

TEST_CASE("fit_series recovers planted coefficients") {
  std::vector<Sample> s1, s2;
  for (double x : {2.0, 3.0, 5.0, 7.0, 11.0}) {
    s1.emplace_back(x, 1.0 / x);
    s2.emplace_back(x, 2.0 / x + 3.0 / (x * x * x));
  }
  const SeriesFit f1 = fit_series(s1, {1});
  CHECK(std::abs(f1.coefficients[0] - 1.0) < 1e-12);
  CHECK(std::isfinite(f1.residual_slope));
  const SeriesFit f2 = fit_series(s2, {1, 3});
  CHECK(std::abs(f2.coefficients[0] - 2.0) < 1e-9);
  CHECK(std::abs(f2.coefficients[1] - 3.0) < 1e-9);
  CHECK(f2.condition_estimate > 1.0);

  std::vector<Sample> s3;
  for (double a : {0.1, 0.12, 0.15, 0.2, 0.25, 0.3}) s3.emplace_back(a, -0.125 * std::pow(a, 4) + 0.7 * std::pow(a, 6));
  const SeriesFit f3 = fit_series(s3, {4, 6}, PowerDirection::Direct);
  CHECK(std::abs(f3.coefficients[0] / -0.125 - 1.0) < 1e-8);
  CHECK(std::abs(f3.coefficients[1] / 0.7 - 1.0) < 1e-8);
}

TEST_CASE("fit_series failure modes") {
  std::vector<Sample> s;
  for (double x : {2.0, 3.0, 5.0, 7.0}) s.emplace_back(x, 1.0 / x);
  CHECK_THROWS_AS(fit_series(s, {1, 1}), RankDeficientFit);
  CHECK_THROWS_AS(fit_series(s, {1, 2, 3}), std::invalid_argument);
  std::vector<Sample> dup = {{2.0, 1.0}, {2.0, 1.0}, {3.0, 1.0}, {4.0, 1.0}};
  CHECK_THROWS_AS(fit_series(dup, {1}), std::invalid_argument);
  try {
    fit_series(s, {1, 1});
  } catch (const RankDeficientFit& e) {
    CHECK(e.powers() == std::vector<int>{1, 1});
  }
}

TEST_CASE("loglog_slope of a pure power") {
  std::vector<Sample> s;
  for (double x : {6.0, 8.0, 10.0, 12.0, 14.0}) s.emplace_back(x, 5.0 * std::pow(x, -6.0));
  CHECK(loglog_slope(s) == Approx(-6.0).epsilon(1e-12));
}
