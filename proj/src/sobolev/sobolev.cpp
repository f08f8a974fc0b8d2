#include "tmsharp/sobolev.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "tmsharp/errors.hpp"
#include "tmsharp/quadrature.hpp"
#include "tmsharp/special.hpp"

namespace tmsharp {

namespace {

constexpr double kSeriesSwitch = 1e-6;
const double kLogSeriesSwitch = std::log(kSeriesSwitch);

// e^r K0(r) and r e^r K1(r), the two quantities every caller needs.
struct Scaled {
  double g;    // 2 pi e^r G
  double rg1;  // -2 pi r e^r G_r
  double d;    // Theta - r = r (g1 - g) / g, computed without cancellation
};

// Convergent series of K0, K1 at small argument, parametrised by log r.
Scaled scaled_series(double log_r) {
  const double gamma = euler_gamma();
  const double r = std::exp(log_r);
  const double q = 0.25 * r * r;
  const double L = log_r - std::log(2.0) + gamma;  // log(r/2) + gamma
  // K0 = -L I0 + sum_{k>=1} q^k/(k!)^2 H_k
  // r K1 = 1 + r I1 (L - gamma) - (r^2/4) sum_{k>=0} (psi(k+1)+psi(k+2)) q^k/(k!(k+1)!)
  double i0 = 0.0, s0 = 0.0, ri1 = 0.0, s1 = 0.0;
  double term = 1.0;  // q^k / (k!)^2
  double hk = 0.0;    // H_k
  for (int k = 0; k < 30; ++k) {
    if (k > 0) {
      term *= q / (static_cast<double>(k) * k);
      hk += 1.0 / k;
    }
    const double t1 = term * q / (k + 1.0) * 2.0;  // r I1 term: 2 q^{k+1}/(k!(k+1)!)
    i0 += term;
    s0 += term * hk;
    ri1 += t1;
    const double psi_sum = (hk - gamma) + (hk + 1.0 / (k + 1.0) - gamma);
    s1 += psi_sum * term / (k + 1.0);
    if (term < 1e-18 * i0) break;
  }
  const double k0 = -L * i0 + s0;
  const double rk1 = 1.0 + ri1 * (L - gamma) - q * s1;
  const double er = std::exp(r);
  const double theta = rk1 / k0;
  return {er * k0, er * rk1, theta - r};
}

// tau = sigma^2 form: 2 pi e^r G = 2 int e^{-s^2} (s^2+2r)^{-1/2} ds and
// -2 pi e^r G_r = 2 int e^{-s^2} (s^2+2r)^{-1/2} [1 + 1/(s^2+2r)] ds.
Scaled scaled_quadrature(double r) {
  const double c = std::sqrt(2.0 * r);
  std::vector<double> breaks;
  for (double b = c; b < 9.0; b *= 4.0) breaks.push_back(b);
  QuadOptions opts;
  opts.abs_tol = 0.0;
  opts.rel_tol = 1e-15;
  const double two_r = 2.0 * r;
  const QuadResult j0 = integrate(
      [two_r](double s) { return 2.0 * std::exp(-s * s) / std::sqrt(s * s + two_r); }, 0.0, 9.0, breaks, opts);
  const QuadResult j1 = integrate(
      [two_r](double s) {
        const double w = s * s + two_r;
        return 2.0 * std::exp(-s * s) / (w * std::sqrt(w));
      },
      0.0, 9.0, breaks, opts);
  if (!j0.converged || !j1.converged)
    throw QuadratureError("bessel_G: quadrature did not converge", j0.converged ? j1 : j0);
  return {j0.value, r * (j0.value + j1.value), r * j1.value / j0.value};
}

Scaled scaled_log(double log_r) {
  if (log_r < kLogSeriesSwitch) return scaled_series(log_r);
  const double r = std::exp(log_r);
  if (!std::isfinite(r)) throw DomainError("bessel_G: argument overflow");
  return scaled_quadrature(r);
}

// F(x) = lambda^2/2 + Theta - Theta^2/2 - 2/j with Theta = lambda + d:
// lambda (1 - d) + d - d^2/2 - 2/j.
struct Residual {
  double f;
  double df;  // dF/dx = lambda^2 + (Theta^2 - lambda^2)(1 - Theta)
  double lambda;
  double d;
};

Residual residual(double x, double j) {
  const double lambda = std::exp(x);
  const Scaled s = scaled_log(x);
  const double d = s.d;
  const double th = lambda + d;
  Residual out;
  out.lambda = lambda;
  out.d = d;
  out.f = lambda * (1.0 - d) + d - 0.5 * d * d - 2.0 / j;
  out.df = lambda * lambda + d * (2.0 * lambda + d) * (1.0 - th);
  return out;
}

}  // namespace

BesselValue bessel_G(double r) {
  if (!(r > 0.0)) throw DomainError("bessel_G: requires r > 0");
  const Scaled s = scaled_log(std::log(r));
  const double pref = std::exp(-r) / (2.0 * std::numbers::pi);
  return {pref * s.g, -pref * s.rg1 / r};
}

BesselValue bessel_G_scaled(double r) {
  if (!(r > 0.0)) throw DomainError("bessel_G_scaled: requires r > 0");
  const Scaled s = scaled_log(std::log(r));
  return {s.g, -s.rg1 / r};
}

double theta_log(double log_lambda) {
  const Scaled s = scaled_log(log_lambda);
  return std::exp(log_lambda) + s.d;
}

double theta(double lambda) {
  if (!(lambda > 0.0)) throw DomainError("theta: requires lambda > 0");
  return theta_log(std::log(lambda));
}

MuPoint solve_mu(double j, double tol) {
  if (!(j > 0.0)) throw DomainError("solve_mu: requires j > 0");
  if (j > 1400.0) throw DomainError("solve_mu: j > 1400 puts lambda below the double range");
  if (!(tol > 0.0)) throw DomainError("solve_mu: tol must be positive");
  // Seeds from the two asymptotic regimes.
  const double x_small = std::log(4.0 / j);
  double lo = x_small, hi = x_small;
  if (j > 4.0) {
    const double chi = 1.0 / (1.0 + std::sqrt(1.0 - 4.0 / j));
    const double x_large = std::log(2.0) - euler_gamma() - 0.5 * j + chi;
    lo = std::min(lo, x_large);
    hi = std::max(hi, x_large);
  }
  lo = std::max(lo - 3.0, -705.0);
  hi += 3.0;

  // Coarse scan for sign changes.
  constexpr int kScan = 64;
  std::array<double, kScan> xs{}, fs{};
  for (int i = 0; i < kScan; ++i) {
    xs[i] = lo + (hi - lo) * i / (kScan - 1);
    fs[i] = residual(xs[i], j).f;
  }
  int changes = 0, idx = -1;
  for (int i = 0; i + 1 < kScan; ++i) {
    if ((fs[i] < 0.0) != (fs[i + 1] < 0.0) || fs[i] == 0.0) {
      ++changes;
      if (idx < 0) idx = i;
    }
  }
  if (changes == 0)
    throw RootBracketError("solve_mu: no sign change of the j-lambda relation on the scan bracket", lo, hi, fs.front(),
                           fs.back());
  if (changes > 1)
    throw RootBracketError("solve_mu: multiple roots of the j-lambda relation detected", lo, hi, fs.front(), fs.back());

  double a = xs[idx], b = xs[idx + 1];
  double fa = fs[idx];
  double x = 0.5 * (a + b);
  Residual r = residual(x, j);
  int it = 0;
  for (; it < 200; ++it) {
    if (r.f == 0.0) break;
    if ((r.f < 0.0) == (fa < 0.0)) {
      a = x;
      fa = r.f;
    } else {
      b = x;
    }
    double xn = x - r.f / r.df;
    if (!(xn > std::min(a, b) && xn < std::max(a, b)) || !std::isfinite(xn)) xn = 0.5 * (a + b);
    const double step = std::abs(xn - x);
    x = xn;
    r = residual(x, j);
    if (step <= 4e-16 * std::max(1.0, std::abs(x))) break;
  }
  if (!(std::abs(r.f) <= tol))
    throw SolverError("solve_mu: residual " + std::to_string(r.f) + " above tolerance at j = " + std::to_string(j));

  MuPoint p;
  p.j = j;
  p.log_lambda = x;
  p.lambda = r.lambda;
  p.theta = r.lambda + r.d;
  p.residual = r.f;
  p.iterations = it;
  // mu = j d (2 lambda + d) / (4 lambda^2)
  p.log_mu = std::log(j) + std::log(r.d) + std::log(2.0 * r.lambda + r.d) - 2.0 * x - std::log(4.0);
  p.mu = std::exp(p.log_mu);
  if (!(r.d > 0.0)) throw SolverError("solve_mu: Theta <= lambda at the root");
  return p;
}

const std::vector<Rational>& mu_series_coefficients() {
  static const std::vector<Rational> c = {{1, 1}, {-1, 1}, {-1, 2}, {-5, 6}, {-43, 24}, {-529, 120}};
  return c;
}

double mu_series_polynomial(double j, int n_terms) {
  if (n_terms < 0 || n_terms > 5) throw DomainError("mu_series: n_terms must be in [0, 5]");
  const auto& c = mu_series_coefficients();
  double p = 0.0;
  for (int k = n_terms; k >= 0; --k) p = p / j + c[static_cast<std::size_t>(k)].value();
  return p;
}

double log_mu_series(double j, int n_terms) {
  if (!(j > 1.0)) throw DomainError("mu_series: requires j > 1");
  if (n_terms < 1 || n_terms > 5) throw DomainError("mu_series: n_terms must be in [1, 5]");
  const double p = mu_series_polynomial(j, n_terms);
  if (!(p > 0.0)) throw DomainError("mu_series: truncated series is not positive at this j");
  return -(std::log(4.0 * j) + 1.0 - 2.0 * euler_gamma() - j + std::log(p));
}

double mu_series(double j, int n_terms) { return std::exp(log_mu_series(j, n_terms)); }

double mu_hat(double s) {
  if (!(s > 0.0)) throw DomainError("mu_hat: requires s > 0");
  const MuPoint m = solve_mu(s);
  const double log_num = s > 1.0 ? s + std::log(2.0 / s + s * s * std::exp(-s)) : 2.0 * std::log(s);
  return std::exp(log_num - m.log_mu);
}

RadialProfile outer_optimizer(double H, double R, int n_points) {
  if (!(H > 0.0) || !(R > 0.0)) throw DomainError("outer_optimizer: requires H, R > 0");
  if (n_points < 3) throw DomainError("outer_optimizer: need at least 3 points");
  const MuPoint m = solve_mu(2.0 * H * H);
  const double log_R = std::log(R);
  const double log_lam = m.log_lambda;
  const Scaled at_R = scaled_log(log_lam);
  const double lam = m.lambda;
  // u = H G(rho)/G(lambda) with rho = lambda r / R; G = e^{-rho} g / (2 pi).
  auto ev = [H, log_R, log_lam, lam, at_R](double log_r) -> RadialProfile::Point {
    const double log_rho = log_r - log_R + log_lam;
    const double rho = std::exp(log_rho);
    if (rho > 700.0) return {0.0, 0.0};
    const Scaled s = scaled_log(log_rho);
    const double ratio = std::exp(lam - rho);
    const double u = H * ratio * s.g / at_R.g;
    const double r_du = -H * ratio * s.rg1 / at_R.g;
    return {u, r_du * std::exp(-log_r)};
  };
  constexpr double kRhoMax = 60.0;
  const double span = std::log(kRhoMax) - log_lam;
  std::vector<double> grid(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i) grid[static_cast<std::size_t>(i)] = log_R + span * i / (n_points - 1);
  RadialProfile p = RadialProfile::sample(Domain::Plane, std::move(grid), ev);
  p.u.front() = H;  // exact normalisation at the gluing radius
  return p;
}

}  // namespace tmsharp
