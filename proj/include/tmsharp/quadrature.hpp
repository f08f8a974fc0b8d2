#pragma once

#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tmsharp {

struct QuadOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  int max_subdivisions = 4000;
};

struct QuadResult {
  double value = 0.0;
  double err_est = 0.0;
  int evaluations = 0;
  int subdivisions = 0;
  bool converged = true;
};

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, QuadResult best)
      : std::runtime_error(what), best_(best) {}
  const QuadResult& best_estimate() const noexcept { return best_; }

 private:
  QuadResult best_;
};

using RealFunction = std::function<double(double)>;

/// Adaptive Gauss-Kronrod (10/21) with global bisection. An infinite upper
/// limit is mapped to [0, 1) by t = a + u / (1 - u). Never throws on
/// non-convergence; inspect QuadResult::converged.
QuadResult integrate(const RealFunction& f, double a, double b, const QuadOptions& opts = {});

QuadResult integrate(const RealFunction& f, double a, double b, double tol);

/// Same, split at the given interior breakpoints (sorted, inside (a, b)).
QuadResult integrate(const RealFunction& f, double a, double b, std::span<const double> breaks,
                     const QuadOptions& opts = {});

/// Throws QuadratureError when the subdivision budget is exhausted.
double integrate_or_throw(const RealFunction& f, double a, double b, const QuadOptions& opts = {});

/// n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussLegendreRule gauss_legendre(int n);

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace tmsharp
