#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "tmsharp/profile.hpp"

namespace tmsharp {

/// Bessel potential G = K0 / (2 pi) and its radial derivative.
struct BesselValue {
  double G = 0.0;
  double G_r = 0.0;
};

/// Evaluates G(r) and G_r(r) from the tau-integral representation (with
/// tau = sigma^2 removing the endpoint singularity). Below r = 1e-6 the
/// convergent small-argument series of K0, K1 is used instead.
BesselValue bessel_G(double r);

/// Same, with the e^{-r} / (2 pi) prefactor removed: returns
/// (2 pi e^r G, 2 pi e^r G_r). Finite for any r > 0.
BesselValue bessel_G_scaled(double r);

/// Theta(lambda) = -lambda G_r(lambda) / G(lambda).
double theta(double lambda);
/// Theta as a function of x = log(lambda); avoids exp/log round trips for
/// exponentially small lambda.
double theta_log(double log_lambda);

struct MuPoint {
  double j = 0.0;
  double lambda = 0.0;
  double log_lambda = 0.0;
  double theta = 0.0;
  double mu = 0.0;      // may overflow to +inf for j beyond ~700; log_mu stays finite
  double log_mu = 0.0;
  double residual = 0.0;  // of 2/j = lambda^2/2 + Theta - Theta^2/2
  int iterations = 0;
};

class RootBracketError : public std::runtime_error {
 public:
  RootBracketError(const std::string& what, double lo, double hi, double f_lo, double f_hi)
      : std::runtime_error(what), lo_(lo), hi_(hi), f_lo_(f_lo), f_hi_(f_hi) {}
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  double f_lo() const noexcept { return f_lo_; }
  double f_hi() const noexcept { return f_hi_; }

 private:
  double lo_, hi_, f_lo_, f_hi_;
};

/// Solves 2/j = lambda^2/2 + Theta - Theta^2/2 for lambda (bracket scan in
/// log lambda followed by safeguarded Newton) and returns the optimum
/// mu(j) = j (Theta^2 - lambda^2) / (4 lambda^2).
MuPoint solve_mu(double j, double tol = 1e-12);

struct Rational {
  long num;
  long den;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Coefficients {1, -1, -1/2, -5/6, -43/24, -529/120} of the large-j series.
const std::vector<Rational>& mu_series_coefficients();

/// Polynomial P_n(j) = sum_{k<=n} c_k j^{-k}.
double mu_series_polynomial(double j, int n_terms);

/// mu from the truncated series 1/mu = 4 j e^{1 - 2 gamma - j} P_n(j);
/// n_terms is the highest inverse power kept (1..5).
double mu_series(double j, int n_terms);
double log_mu_series(double j, int n_terms);

/// mu_hat(s) = (2 s^{-1} e^s [s > 1] + s^2) / mu(s).
double mu_hat(double s);

/// Exterior optimizer for j = 2 H^2: u(r) = H G(lambda r / R) / G(lambda) on
/// r >= R, sampled on n log-spaced points out to where u drops below
/// 1e-300 or r = R e^{span}.
RadialProfile outer_optimizer(double H, double R, int n_points = 2000);

}  // namespace tmsharp
