#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "psi.hpp"
#include "tmsharp/errors.hpp"
#include "tmsharp/quadrature.hpp"
#include "tmsharp/soliton.hpp"
#include "tmsharp/variational.hpp"

namespace tmsharp {

namespace {

constexpr int kNodes = 16;

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Legendre P_0..P_{n} at x.
std::vector<double> legendre_all(int n, double x) {
  std::vector<double> p(static_cast<std::size_t>(n + 1));
  p[0] = 1.0;
  if (n >= 1) p[1] = x;
  for (int k = 2; k <= n; ++k) p[k] = ((2.0 * k - 1.0) * x * p[k - 1] - (k - 1.0) * p[k - 2]) / k;
  return p;
}

// Per-panel spectral operators on the reference interval [-1, 1].
struct PanelRule {
  std::vector<double> x, wq;
  MatrixXd C;        // (C w)_i = int_{-1}^{x_i} interpolant of w
  VectorXd left;     // interpolant value at -1
  VectorXd right;    // interpolant value at +1
  MatrixXd coeffs;   // Legendre coefficients from nodal values
};

PanelRule make_rule() {
  PanelRule r;
  const GaussLegendreRule gl = gauss_legendre(kNodes);
  r.x = gl.nodes;
  r.wq = gl.weights;
  MatrixXd V(kNodes, kNodes), Iv(kNodes, kNodes);
  for (int i = 0; i < kNodes; ++i) {
    const auto p = legendre_all(kNodes, r.x[i]);
    for (int k = 0; k < kNodes; ++k) {
      V(i, k) = p[k];
      // int_{-1}^{x} P_k = (P_{k+1} - P_{k-1}) / (2k + 1), and x + 1 for k = 0.
      Iv(i, k) = k == 0 ? r.x[i] + 1.0 : (p[k + 1] - p[k - 1]) / (2.0 * k + 1.0);
    }
  }
  r.coeffs = V.inverse();
  r.C = Iv * r.coeffs;
  VectorXd pl(kNodes), pr(kNodes);
  for (int k = 0; k < kNodes; ++k) {
    pl(k) = (k % 2 == 0) ? 1.0 : -1.0;
    pr(k) = 1.0;
  }
  r.left = r.coeffs.transpose() * pl;
  r.right = r.coeffs.transpose() * pr;
  return r;
}

struct Discretization {
  std::vector<double> edges;  // panel boundaries
  VectorXd t, q;              // nodes and quadrature weights
  MatrixXd B;                 // v = B w
};

void append_panels(std::vector<double>& edges, double hi, double max_len) {
  const double lo = edges.back();
  if (hi <= lo) return;
  const int n = std::max(1, static_cast<int>(std::ceil((hi - lo) / max_len - 1e-9)));
  for (int i = 1; i <= n; ++i) edges.push_back(i == n ? hi : lo + (hi - lo) * i / n);
}

Discretization discretize(const PanelRule& rule, double T_est, double T_max) {
  Discretization d;
  d.edges = {0.0};
  const double core_lo = std::max(0.0, T_est - 10.0);
  const double core_hi = std::min(T_max, T_est + 10.0);
  append_panels(d.edges, core_lo, 3.0);
  append_panels(d.edges, core_hi, 0.8);
  append_panels(d.edges, T_max, 3.0);
  const int P = static_cast<int>(d.edges.size()) - 1;
  const int N = P * kNodes;
  d.t.resize(N);
  d.q.resize(N);
  d.B = MatrixXd::Zero(N, N);
  for (int p = 0; p < P; ++p) {
    const double lo = d.edges[p], hi = d.edges[p + 1];
    const double half = 0.5 * (hi - lo);
    for (int i = 0; i < kNodes; ++i) {
      const int row = p * kNodes + i;
      d.t(row) = lo + half * (rule.x[i] + 1.0);
      d.q(row) = half * rule.wq[i];
      // Full earlier panels contribute their quadrature sums.
      for (int pp = 0; pp < p; ++pp) {
        const double hh = 0.5 * (d.edges[pp + 1] - d.edges[pp]);
        for (int j = 0; j < kNodes; ++j) d.B(row, pp * kNodes + j) = hh * rule.wq[j];
      }
      for (int j = 0; j < kNodes; ++j) d.B(row, p * kNodes + j) = half * rule.C(i, j);
    }
  }
  return d;
}

struct Eval {
  VectorXd v, e, psi_v, psi_vv;
  double F = 0.0;
};

Eval evaluate(Geometry g, double H, const Discretization& d, const VectorXd& w) {
  Eval ev;
  ev.v = d.B * w;
  const Eigen::Index N = w.size();
  ev.e.resize(N);
  ev.psi_v.resize(N);
  ev.psi_vv.resize(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const double u = H + ev.v(i);
    if (!(u > 0.0)) {
      ev.F = -std::numeric_limits<double>::infinity();
      return ev;
    }
    const auto p = detail::psi_eval<double>(g, H, ev.v(i), d.t(i));
    ev.e(i) = std::exp(p.psi);
    ev.psi_v(i) = p.psi_v;
    ev.psi_vv(i) = p.psi_vv;
  }
  ev.F = d.q.dot(ev.e);
  return ev;
}

VectorXd normalized(const VectorXd& w, const VectorXd& q) {
  return w / std::sqrt(w.cwiseProduct(w).dot(q));
}

// Interpolated velocity at t from the nodal values.
double velocity_at(const PanelRule& rule, const Discretization& d, const VectorXd& w, double t) {
  const int P = static_cast<int>(d.edges.size()) - 1;
  int p = static_cast<int>(std::upper_bound(d.edges.begin(), d.edges.end(), t) - d.edges.begin()) - 1;
  p = std::clamp(p, 0, P - 1);
  const double lo = d.edges[p], hi = d.edges[p + 1];
  const double x = 2.0 * (t - lo) / (hi - lo) - 1.0;
  const auto pl = legendre_all(kNodes - 1, x);
  double value = 0.0;
  for (int k = 0; k < kNodes; ++k) {
    double ck = 0.0;
    for (int j = 0; j < kNodes; ++j) ck += rule.coeffs(k, j) * w(p * kNodes + j);
    value += ck * pl[k];
  }
  return value;
}

}  // namespace

ProfileSolution direct_maximize(Geometry geometry, double H, const SolverConfig& cfg) {
  cfg.validate();
  if (!(H >= 4.0)) throw DomainError("direct_maximize: H >= 4 required");
  const double T_est = H * H + 0.5;
  const double T_max = T_est + cfg.t_pad;
  const PanelRule rule = make_rule();
  const Discretization d = discretize(rule, T_est, T_max);
  const Eigen::Index N = d.t.size();

  ProfileSolution sol;
  sol.geometry = geometry;
  sol.method = "direct";
  sol.H = H;
  sol.T_max = T_max;

  const SolitonFrame frame = SolitonFrame::from_H(H, geometry);
  const auto vdot0 = reconstruct_vdot(frame, ReconstructionOrder::Third);
  VectorXd w(N);
  for (Eigen::Index i = 0; i < N; ++i) w(i) = vdot0(d.t(i));
  w = normalized(w, d.q);
  Eval ev = evaluate(geometry, H, d, w);
  sol.objective_history.push_back(ev.F);

  constexpr int kMaxIter = 500;
  const double grad_tol = 1e-11;
  double mu = 0.0;
  int iter = 0;
  bool converged = false;
  for (; iter < kMaxIter; ++iter) {
    const VectorXd s = d.q.cwiseProduct(ev.psi_v).cwiseProduct(ev.e);
    const VectorXd g = d.B.transpose() * s;
    const VectorXd Qw = d.q.cwiseProduct(w);
    mu = 0.5 * w.dot(g);
    const VectorXd pg = g - 2.0 * mu * Qw;
    // Size of the projected gradient in the Q^{-1} norm, relative to g.
    const double pg_norm = std::sqrt(pg.cwiseProduct(pg).cwiseQuotient(d.q).sum());
    const double g_norm = std::sqrt(g.cwiseProduct(g).cwiseQuotient(d.q).sum());
    if (pg_norm <= grad_tol * g_norm) {
      converged = true;
      break;
    }

    // Newton step on the Lagrangian, linearized constraint 2 (Qw)^T dw = 0.
    const VectorXd D = d.q.cwiseProduct(ev.psi_vv + ev.psi_v.cwiseProduct(ev.psi_v)).cwiseProduct(ev.e);
    MatrixXd K = MatrixXd::Zero(N + 1, N + 1);
    K.topLeftCorner(N, N) = d.B.transpose() * D.asDiagonal() * d.B;
    K.topLeftCorner(N, N).diagonal() -= 2.0 * mu * d.q;
    K.block(0, N, N, 1) = 2.0 * Qw;
    K.block(N, 0, 1, N) = 2.0 * Qw.transpose();
    VectorXd rhs = VectorXd::Zero(N + 1);
    rhs.head(N) = -pg;
    const VectorXd step = K.partialPivLu().solve(rhs);
    VectorXd dir = step.head(N);
    if (!dir.allFinite() || dir.dot(pg) <= 0.0) dir = pg.cwiseQuotient(d.q);  // ascent fallback

    // Backtracking until F does not decrease; then try a gradient step.
    auto search = [&](const VectorXd& direction, double alpha0) {
      double alpha = alpha0;
      for (int k = 0; k < 40; ++k, alpha *= 0.5) {
        const VectorXd trial = normalized(w + alpha * direction, d.q);
        Eval te = evaluate(geometry, H, d, trial);
        if (std::isfinite(te.F) && te.F >= ev.F) return std::make_pair(trial, te);
      }
      return std::make_pair(VectorXd(), Eval{});
    };
    auto found = search(dir, 1.0);
    if (found.first.size() == 0) {
      const VectorXd gdir = pg.cwiseQuotient(d.q);
      found = search(gdir, 0.1 / std::max(g_norm, 1e-300));
    }
    if (found.first.size() == 0) {
      sol.warnings.push_back("stagnation: no ascent step found at iteration " + std::to_string(iter));
      break;
    }
    const double F_old = ev.F;
    w = found.first;
    ev = found.second;
    sol.objective_history.push_back(ev.F);
    if (ev.F - F_old < 1e-14 * std::abs(F_old) && pg_norm > grad_tol * g_norm) {
      // Ascent has flattened out at roundoff; accept if the gradient is small.
      if (pg_norm <= 1e-8 * g_norm) {
        converged = true;
        ++iter;
        break;
      }
    }
  }
  if (!converged && sol.warnings.empty()) sol.warnings.push_back("iteration budget exhausted");
  sol.iterations = iter;
  sol.converged = converged;

  // Outputs on the node grid, with t = 0 prepended.
  const double a = velocity_at(rule, d, w, 0.0);
  const double wT = velocity_at(rule, d, w, T_max);
  sol.a = a;
  sol.t_grid.reserve(N + 1);
  sol.t_grid.push_back(0.0);
  sol.v.push_back(0.0);
  sol.v_dot.push_back(a);
  for (Eigen::Index i = 0; i < N; ++i) {
    sol.t_grid.push_back(d.t(i));
    sol.v.push_back(ev.v(i));
    sol.v_dot.push_back(w(i));
  }
  const VectorXd s = ev.e.cwiseProduct(d.q);
  const VectorXd dv = ev.v.array() - H;
  sol.I0 = ev.F;
  sol.I1 = s.dot(dv);
  sol.I2 = s.dot(dv.cwiseProduct(dv));
  sol.S0 = (geometry == Geometry::DiskCritical ? 2.0 : 1.0) * ev.F;
  sol.kinetic = w.cwiseProduct(w).dot(d.q);
  sol.tail_velocity = wT;
  sol.v_inf = (d.B.bottomRows(1) * w)(0) + wT / 2.0;
  const double e0 = std::exp(detail::psi_eval<double>(geometry, H, 0.0, 0.0).psi);
  // Multiplier from the first necessary identity; the KKT value checks it.
  sol.lagrange = 2.0 * (2.0 * ev.F - e0) / (a * a);
  const double lam_kkt = 2.0 * mu;
  const double J1 = s.dot(ev.psi_v);
  const double J2 = s.dot(ev.psi_v.cwiseProduct(ev.v));
  sol.residuals[0] = std::abs(lam_kkt * a * a / 2.0 - (2.0 * ev.F - e0)) / (lam_kkt * a * a / 2.0);
  sol.residuals[1] = std::abs(lam_kkt * a - J1) / (lam_kkt * a);
  sol.residuals[2] = std::abs(lam_kkt - J2) / lam_kkt;

  // T_a by bisection on the interpolated velocity.
  double lo = 0.0, hi = T_max;
  if (velocity_at(rule, d, w, hi) > a / 2.0) throw SolverError("direct_maximize: velocity never reaches a/2");
  for (int k = 0; k < 200 && hi - lo > 1e-13 * T_max; ++k) {
    const double mid = 0.5 * (lo + hi);
    (velocity_at(rule, d, w, mid) > a / 2.0 ? lo : hi) = mid;
  }
  sol.T_a = 0.5 * (lo + hi);
  return sol;
}

}  // namespace tmsharp
