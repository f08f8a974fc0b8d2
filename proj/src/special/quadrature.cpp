#include "tmsharp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>

namespace tmsharp {

namespace {

// Kronrod 21-point abscissae (non-negative half); odd indices are the
// 10-point Gauss nodes.
constexpr double kXgk[11] = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
constexpr double kWgk[11] = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525452442, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr double kWg[5] = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Panel {
  double a, b, value, err, resabs;
  bool operator<(const Panel& o) const { return err < o.err; }
};

Panel gk21(const RealFunction& f, double a, double b, int& evals) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double resk = fc * kWgk[10];
  double resg = 0.0;
  double resabs = std::abs(resk);
  for (int j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    resk += kWgk[j] * (f1 + f2);
    resabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  evals += 21;
  Panel p{a, b, resk * half, std::abs((resk - resg) * half), resabs * std::abs(half)};
  // Panels at the roundoff floor are not worth splitting.
  const double floor = 50.0 * std::numeric_limits<double>::epsilon() * p.resabs;
  if (p.err < floor) p.err = 0.0;
  if (!std::isfinite(p.value)) p.err = std::numeric_limits<double>::infinity();
  return p;
}

QuadResult adaptive_finite(const RealFunction& f, double a, double b, const QuadOptions& opts) {
  QuadResult out;
  if (a == b) return out;
  std::priority_queue<Panel> heap;
  heap.push(gk21(f, a, b, out.evaluations));
  double total = heap.top().value;
  double total_err = heap.top().err;
  while (true) {
    const double target = std::max(opts.abs_tol, opts.rel_tol * std::abs(total));
    if (total_err <= target) break;
    if (out.subdivisions >= opts.max_subdivisions) {
      out.converged = false;
      break;
    }
    const Panel worst = heap.top();
    if (worst.err == 0.0) break;
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Interval exhausted at machine resolution.
      out.converged = false;
      heap.push(Panel{worst.a, worst.b, worst.value, 0.0, worst.resabs});
      continue;
    }
    const Panel left = gk21(f, worst.a, mid, out.evaluations);
    const Panel right = gk21(f, mid, worst.b, out.evaluations);
    ++out.subdivisions;
    heap.push(left);
    heap.push(right);
    // Re-sum from scratch periodically to avoid drift in the running total.
    total += left.value + right.value - worst.value;
    total_err += left.err + right.err - worst.err;
    if (out.subdivisions % 64 == 0) {
      auto copy = heap;
      total = 0.0;
      total_err = 0.0;
      while (!copy.empty()) {
        total += copy.top().value;
        total_err += copy.top().err;
        copy.pop();
      }
    }
  }
  // Final accurate sum, smallest panels first.
  std::vector<Panel> panels;
  panels.reserve(heap.size());
  while (!heap.empty()) {
    panels.push_back(heap.top());
    heap.pop();
  }
  std::sort(panels.begin(), panels.end(),
            [](const Panel& x, const Panel& y) { return std::abs(x.value) < std::abs(y.value); });
  out.value = 0.0;
  out.err_est = 0.0;
  for (const auto& p : panels) {
    out.value += p.value;
    out.err_est += p.err;
  }
  if (!std::isfinite(out.value)) out.converged = false;
  return out;
}

}  // namespace

QuadResult integrate(const RealFunction& f, double a, double b, const QuadOptions& opts) {
  if (b < a) {
    QuadResult r = integrate(f, b, a, opts);
    r.value = -r.value;
    return r;
  }
  if (std::isinf(b)) {
    // t = a + u / (1 - u), dt = du / (1 - u)^2
    auto mapped = [&f, a](double u) {
      const double om = 1.0 - u;
      const double t = a + u / om;
      if (!std::isfinite(t)) return 0.0;
      const double ft = f(t);
      if (ft == 0.0) return 0.0;
      return ft / (om * om);
    };
    return adaptive_finite(mapped, 0.0, 1.0, opts);
  }
  return adaptive_finite(f, a, b, opts);
}

QuadResult integrate(const RealFunction& f, double a, double b, double tol) {
  QuadOptions opts;
  opts.abs_tol = tol;
  opts.rel_tol = tol;
  return integrate(f, a, b, opts);
}

QuadResult integrate(const RealFunction& f, double a, double b, std::span<const double> breaks,
                     const QuadOptions& opts) {
  QuadResult total;
  double lo = a;
  auto add = [&](double x0, double x1) {
    if (x1 <= x0) return;
    const QuadResult r = integrate(f, x0, x1, opts);
    total.value += r.value;
    total.err_est += r.err_est;
    total.evaluations += r.evaluations;
    total.subdivisions += r.subdivisions;
    total.converged = total.converged && r.converged;
  };
  for (double x : breaks) {
    if (x <= lo || x >= b) continue;
    add(lo, x);
    lo = x;
  }
  add(lo, b);
  return total;
}

double integrate_or_throw(const RealFunction& f, double a, double b, const QuadOptions& opts) {
  const QuadResult r = integrate(f, a, b, opts);
  if (!r.converged) throw QuadratureError("integrate: subdivision budget exhausted", r);
  return r.value;
}

GaussLegendreRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n >= 1 required");
  GaussLegendreRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute derivative at the converged node.
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

}  // namespace tmsharp
