#include "tmsharp/soliton.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tmsharp/quadrature.hpp"
#include "tmsharp/special.hpp"

namespace tmsharp {

namespace {

// log(1 + e^x) without overflow.
double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

// 1 / (1 + e^{-x}) without overflow.
double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

}  // namespace

Geometry parse_geometry(std::string_view name) {
  if (name == "plane") return Geometry::PlaneCritical;
  if (name == "disk") return Geometry::DiskCritical;
  throw std::invalid_argument("unknown geometry '" + std::string(name) + "' (expected plane or disk)");
}

SolitonFrame SolitonFrame::from_H(double H, Geometry geometry) {
  if (!(H > std::sqrt(2.0))) throw DomainError("SolitonFrame::from_H: H must exceed sqrt(2)");
  const auto& c = constants();
  SolitonFrame f;
  f.H = H;
  f.geometry = geometry;
  // Plane: H = 1/a + a/2 inverted exactly; disk: H = 1/a.
  f.a = geometry == Geometry::PlaneCritical ? 2.0 / (H + std::sqrt(H * H - 2.0)) : 1.0 / H;
  const double a2 = f.a * f.a;
  f.T_a = 1.0 / a2 + 0.5 + 0.25 * a2 * (2.0 * c.c0 + std::log(2.0));
  return f;
}

SolitonFrame SolitonFrame::from_Ta(double T_a, Geometry geometry) {
  if (!(T_a > 1.0)) throw DomainError("SolitonFrame::from_Ta: T_a must exceed 1");
  SolitonFrame f;
  f.T_a = T_a;
  f.geometry = geometry;
  f.a = 1.0 / std::sqrt(T_a - 0.5);
  f.H = geometry == Geometry::PlaneCritical ? 1.0 / f.a + 0.5 * f.a : 1.0 / f.a;
  return f;
}

BasisValues eval_basis_ta(double t_a, double T_a) {
  const auto& c = constants();
  const double log2 = std::log(2.0);
  BasisValues b;
  const double th = std::tanh(t_a);
  b.w0 = 2.0 * sigmoid(-2.0 * t_a);      // 1 - tanh t_a
  const double wm2 = -2.0 * sigmoid(2.0 * t_a);  // w0 - 2
  const double sp_plus = softplus(2.0 * t_a);    // log(1 + e^{2 t_a})
  const double sp_minus = softplus(-2.0 * t_a);  // log(1 + e^{-2 t_a})
  b.v_plus = -sp_minus;
  b.v_minus = 2.0 * (t_a + T_a) - sp_plus;
  b.dw0 = b.w0 * wm2;

  if (t_a >= 0.0) {
    const double delta = -0.5 * dilog(-std::exp(-2.0 * t_a));  // nu0 - nu_inf >= 0
    const double nu_inf = -c.c0 + 0.5 * log2;
    b.nu0 = nu_inf + delta;
    // Cancellation-free form of -2 nu0 tanh - 2c0 + log2 - v_+^2/2.
    b.v1 = 2.0 * nu_inf * b.w0 - 2.0 * delta * th - 0.5 * b.v_plus * b.v_plus;
  } else {
    // Inversion of Li2 keeps the argument in [-1, 0).
    const double li = dilog(-std::exp(2.0 * t_a));
    b.nu0 = t_a * t_a + c.c0 + 0.5 * log2 + 0.5 * li;
    const double eps = -wm2;  // 1 + tanh t_a
    b.v1 = 2.0 * log2 + li - 2.0 * eps * b.nu0 + 2.0 * t_a * sp_plus - 0.5 * sp_plus * sp_plus;
  }
  const double inner = 2.0 * b.w0 * b.nu0 + b.v_plus;
  b.w1 = wm2 * inner;
  b.dw1 = b.dw0 * inner + wm2 * (2.0 * b.dw0 * b.nu0 + 2.0 * b.w0 * b.v_plus + b.w0);
  return b;
}

BasisValues eval_basis(const SolitonFrame& frame, double t) { return eval_basis_ta(t - frame.T_a, frame.T_a); }

ExactRational appendixA_exact(int k, int j) {
  if (k < 1 || j < 0) throw DomainError("appendixA_integral: requires k >= 1, j >= 0");
  if (k > 30 || j > 15) throw DomainError("appendixA_integral: exact form limited to k <= 30, j <= 15");
  std::uint64_t num = std::uint64_t{1} << k;
  for (int i = 2; i <= j; ++i) num *= static_cast<std::uint64_t>(i);
  std::uint64_t den = 1;
  for (int i = 0; i <= j; ++i) {
    if (den > (std::uint64_t{1} << 62) / static_cast<std::uint64_t>(k))
      throw DomainError("appendixA_integral: denominator overflow");
    den *= static_cast<std::uint64_t>(k);
  }
  const std::uint64_t g = std::gcd(num, den);
  return ExactRational{((k + j) % 2 == 0) ? 1 : -1, num / g, den / g};
}

double appendixA_integral(int k, int j) {
  if (k < 1 || j < 0) throw DomainError("appendixA_integral: requires k >= 1, j >= 0");
  // 2^k (-1)^{k+j} k^{-j-1} j!
  double v = std::ldexp(1.0, k) / k;
  for (int i = 1; i <= j; ++i) v *= static_cast<double>(i) / k;
  return ((k + j) % 2 == 0) ? v : -v;
}

double zeta_integral(int j, double k) {
  if (j < 1 || !(k > 0.0)) throw DomainError("zeta_integral: requires j >= 1, k > 0");
  double partial = 0.0;
  for (int n = j - 1; n >= 1; --n) partial += std::pow(static_cast<double>(n), -k - 1.0);
  return std::ldexp(1.0, j - 1) * gamma_fn(k + 1.0) * (zeta(k + 1.0) - partial);
}

std::vector<IdentityCheck> IdentityReport::failures() const {
  std::vector<IdentityCheck> out;
  std::copy_if(checks.begin(), checks.end(), std::back_inserter(out), [](const auto& c) { return !c.pass; });
  return out;
}

IdentityReport verify_identities(const SolitonFrame& frame, double tol) {
  if (!(frame.T_a >= 20.0)) throw DomainError("verify_identities: requires T_a >= 20");
  if (!(tol > 0.0)) throw DomainError("verify_identities: tol must be positive");
  IdentityReport rep;
  QuadOptions q;
  q.abs_tol = 1e-15;
  q.rel_tol = 1e-15;
  const double T = frame.T_a;
  const double t_end = T + 40.0;
  const double brk[] = {T - 10.0, T, T + 10.0};

  auto push = [&rep](IdentityCheck c) {
    c.pass = std::isfinite(c.deviation) && c.deviation <= c.tolerance;
    rep.all_pass = rep.all_pass && c.pass;
    rep.checks.push_back(std::move(c));
  };

  for (int k = 1; k <= 2; ++k) {
    for (int j = 0; j <= 4; ++j) {
      auto f = [&](double t) {
        const BasisValues b = eval_basis(frame, t);
        return b.dw0 * ipow(b.w0 - 2.0, k - 1) * ipow(b.v_plus, j);
      };
      const QuadResult r = integrate(f, 0.0, t_end, brk, q);
      IdentityCheck c;
      c.family = "appendixA";
      c.label = "int dw0 (w0-2)^" + std::to_string(k - 1) + " v+^" + std::to_string(j);
      c.k = k;
      c.j = j;
      c.computed = r.value;
      c.expected = appendixA_integral(k, j);
      c.deviation = std::abs(r.value - c.expected);
      c.tolerance = tol;
      rep.max_appendixA_deviation = std::max(rep.max_appendixA_deviation, c.deviation);
      push(c);
    }
  }

  const double W = T;
  const double zbrk[] = {-10.0, 0.0, 10.0};
  auto zeta_quad = [&](int j, int k) {
    auto f = [&](double t_a) {
      const BasisValues b = eval_basis_ta(t_a, T);
      return ipow(2.0 - b.w0, j) * ipow(std::abs(b.v_plus), k);
    };
    return integrate(f, -W, W, zbrk, q).value;
  };
  for (int j = 1; j <= 3; ++j) {
    for (int k = 1; k <= 3; ++k) {
      IdentityCheck c;
      c.family = "zeta";
      c.label = "int (2-w0)^" + std::to_string(j) + " |v+|^" + std::to_string(k);
      c.k = k;
      c.j = j;
      c.computed = zeta_quad(j, k);
      c.expected = zeta_integral(j, k);
      c.deviation = std::abs(c.computed / c.expected - 1.0);
      c.tolerance = tol;
      rep.max_zeta_deviation = std::max(rep.max_zeta_deviation, c.deviation);
      push(c);
    }
  }
  {
    // The hard integral: (1/16) int (w0-2)^2 v_+^2 = (zeta(3) - 1) / 4.
    IdentityCheck c;
    c.family = "hard";
    c.label = "(1/16) int (w0-2)^2 v+^2 = (zeta(3)-1)/4";
    c.k = 2;
    c.j = 2;
    c.computed = zeta_quad(2, 2) / 16.0;
    c.expected = (constants().zeta3 - 1.0) / 4.0;
    c.deviation = std::abs(c.computed / c.expected - 1.0);
    c.tolerance = tol;
    push(c);
  }

  // Pointwise identities on 20 points spread over |t_a| <= 8.
  constexpr double h = 1e-4;
  constexpr double fd_tol = 1e-6;
  constexpr double lin_tol = 1e-8;
  for (int i = 0; i < 20; ++i) {
    const double t_a = -8.0 + 16.0 * i / 19.0;
    const double t = T + t_a;
    const BasisValues b = eval_basis(frame, t);
    const BasisValues bp = eval_basis(frame, t + h);
    const BasisValues bm = eval_basis(frame, t - h);
    const struct {
      const char* name;
      double fd;
      double exact;
    } rows[] = {
        {"d nu0/dt = v+", (bp.nu0 - bm.nu0) / (2 * h), b.v_plus},
        {"d v1/dt = w1", (bp.v1 - bm.v1) / (2 * h), b.w1},
        {"d w0/dt = w0(w0-2)", (bp.w0 - bm.w0) / (2 * h), b.dw0},
        {"d v+/dt = w0", (bp.v_plus - bm.v_plus) / (2 * h), b.w0},
        {"d v-/dt = w0", (bp.v_minus - bm.v_minus) / (2 * h), b.w0},
        {"d w1/dt = dw1", (bp.w1 - bm.w1) / (2 * h), b.dw1},
    };
    for (const auto& row : rows) {
      IdentityCheck c;
      c.family = "derivative";
      c.label = row.name;
      c.computed = row.fd;
      c.expected = row.exact;
      c.deviation = std::abs(row.fd - row.exact);
      c.tolerance = fd_tol;
      rep.max_derivative_residual = std::max(rep.max_derivative_residual, c.deviation);
      push(c);
    }
    IdentityCheck c;
    c.family = "linearized";
    c.label = "dw1 + 2 tanh(t_a) w1 = v+(w0^2-4) + w0(w0-2)";
    c.computed = b.dw1 + 2.0 * std::tanh(t_a) * b.w1;
    c.expected = b.v_plus * (b.w0 * b.w0 - 4.0) + b.w0 * (b.w0 - 2.0);
    c.deviation = std::abs(c.computed - c.expected);
    c.tolerance = lin_tol;
    rep.max_linearized_residual = std::max(rep.max_linearized_residual, c.deviation);
    push(c);
  }
  return rep;
}

double reconstruct_v_inf(const SolitonFrame& frame, ReconstructionOrder order) {
  const double a = frame.a;
  const double base = a * frame.T_a;
  return order == ReconstructionOrder::Leading ? base : base - a * a * a * std::log(2.0) / 4.0;
}

std::function<double(double)> reconstruct_v(const SolitonFrame& frame, ReconstructionOrder order) {
  const double a = frame.a;
  const double a3 = a * a * a;
  const double v_inf = reconstruct_v_inf(frame, order);
  const bool third = order == ReconstructionOrder::Third;
  const double log2 = std::log(2.0);
  return [frame, a, a3, v_inf, third, log2](double t) {
    const BasisValues b = eval_basis(frame, t);
    if (t < frame.T_a) return 0.5 * a * b.v_minus + (third ? a3 / 8.0 * (b.v1 - 2.0 * log2) : 0.0);
    return v_inf + 0.5 * a * b.v_plus + (third ? a3 / 8.0 * b.v1 : 0.0);
  };
}

std::function<double(double)> reconstruct_vdot(const SolitonFrame& frame, ReconstructionOrder order) {
  const double a = frame.a;
  const bool third = order == ReconstructionOrder::Third;
  return [frame, a, third](double t) {
    const BasisValues b = eval_basis(frame, t);
    return 0.5 * a * b.w0 + (third ? a * a * a / 8.0 * b.w1 : 0.0);
  };
}

}  // namespace tmsharp
