#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <boost/numeric/odeint/stepper/runge_kutta_fehlberg78.hpp>

#include "psi.hpp"
#include "tmsharp/errors.hpp"
#include "tmsharp/variational.hpp"

namespace tmsharp {

namespace {

// v, w = v_dot, K = int w^2, S = int e^psi, I1, I2, J1 = int psi_v e^psi,
// J2 = int v psi_v e^psi.
enum Slot { kV, kW, kK, kS, kI1, kI2, kJ1, kJ2, kSlots };

template <class Real>
using State = std::array<Real, kSlots>;

template <class Real>
struct Rhs {
  Geometry geometry;
  Real H;
  Real inv_lambda;

  void operator()(const State<Real>& x, State<Real>& dx, Real t) const {
    const Real v = x[kV];
    const auto p = detail::psi_eval<Real>(geometry, H, v, t);
    using std::exp;
    const Real e = exp(p.psi);
    const Real d = v - H;
    dx[kV] = x[kW];
    dx[kW] = -inv_lambda * p.psi_v * e;
    dx[kK] = x[kW] * x[kW];
    dx[kS] = e;
    dx[kI1] = d * e;
    dx[kI2] = d * d * e;
    dx[kJ1] = p.psi_v * e;
    dx[kJ2] = v * p.psi_v * e;
  }
};

// Fixed step sequence: tail step away from the transition estimate, core step
// within 10 of it. Each segment is divided evenly.
std::vector<double> build_time_grid(double T_est, double T_max, const SolverConfig& cfg) {
  std::vector<double> grid{0.0};
  auto segment = [&grid](double lo, double hi, double h) {
    if (hi <= lo) return;
    const int n = static_cast<int>(std::ceil((hi - lo) / h - 1e-9));
    for (int i = 1; i <= n; ++i) grid.push_back(i == n ? hi : lo + (hi - lo) * i / n);
  };
  const double core_lo = std::max(0.0, T_est - 10.0);
  const double core_hi = std::min(T_max, T_est + 10.0);
  segment(0.0, core_lo, cfg.t_step_tail);
  segment(core_lo, core_hi, cfg.t_step_core);
  segment(core_hi, T_max, cfg.t_step_tail);
  return grid;
}

template <class Real>
struct Trajectory {
  std::vector<double> t;
  std::vector<State<Real>> x;
};

template <class Real>
class Shooter {
 public:
  Shooter(Geometry g, double H, const SolverConfig& cfg)
      : geometry_(g), H_(H), cfg_(cfg), T_est_(H * H + 0.5), T_max_(T_est_ + cfg.t_pad),
        grid_(build_time_grid(T_est_, T_max_, cfg)) {}

  double T_max() const { return T_max_; }
  const std::vector<double>& grid() const { return grid_; }

  /// Integrates to T_max; stores the trajectory when requested.
  State<Real> run(Real a, Real lambda, Trajectory<Real>* traj = nullptr) const {
    boost::numeric::odeint::runge_kutta_fehlberg78<State<Real>, Real, State<Real>, Real> stepper;
    const Rhs<Real> rhs{geometry_, static_cast<Real>(H_), Real(1) / lambda};
    State<Real> x{};
    x[kW] = a;
    if (traj) {
      traj->t.assign(grid_.begin(), grid_.end());
      traj->x.clear();
      traj->x.reserve(grid_.size());
      traj->x.push_back(x);
    }
    for (std::size_t i = 1; i < grid_.size(); ++i) {
      const Real t0 = static_cast<Real>(grid_[i - 1]);
      const Real dt = static_cast<Real>(grid_[i]) - t0;
      stepper.do_step(rhs, x, t0, dt);
      if (traj) traj->x.push_back(x);
    }
    return x;
  }

  /// Residuals w(T_max)/a and (kinetic with analytic tail) - 1.
  std::array<Real, 2> residual(Real a, Real log_lambda) const {
    using std::exp;
    const State<Real> x = run(a, exp(log_lambda));
    const Real w = x[kW];
    return {w / a, x[kK] + w * w / Real(2) - Real(1)};
  }

  /// Single step of length dt from a stored state (used to refine T_a).
  State<Real> advance(const State<Real>& x0, Real t0, Real dt, Real lambda) const {
    boost::numeric::odeint::runge_kutta_fehlberg78<State<Real>, Real, State<Real>, Real> stepper;
    const Rhs<Real> rhs{geometry_, static_cast<Real>(H_), Real(1) / lambda};
    State<Real> x = x0;
    stepper.do_step(rhs, x, t0, dt);
    return x;
  }

 private:
  Geometry geometry_;
  double H_;
  SolverConfig cfg_;
  double T_est_;
  double T_max_;
  std::vector<double> grid_;
};

template <class Real>
ProfileSolution shoot_impl(Geometry geometry, double H, const SolverConfig& cfg) {
  using std::abs;
  using std::exp;
  using std::log;
  const Shooter<Real> sh(geometry, H, cfg);

  Real a, log_lambda;
  if (geometry == Geometry::PlaneCritical) {
    a = Real(1) / H + Real(1) / (2 * H * H * H);
    log_lambda = log(static_cast<Real>(std::exp(1.0) / 2.0 * H * H));
  } else {
    a = Real(1) / H;
    log_lambda = log(static_cast<Real>(2.0 * std::exp(1.0) * H * H));
  }

  constexpr int kMaxIter = 60;
  const Real tol = static_cast<Real>(cfg.newton_tol);
  const Real max_dlog = log(Real(1.1));
  std::array<Real, 2> r = sh.residual(a, log_lambda);
  int iter = 0;
  bool converged = false;
  for (; iter < kMaxIter; ++iter) {
    if (!std::isfinite(static_cast<double>(r[0])) || !std::isfinite(static_cast<double>(r[1]))) break;
    if (abs(r[0]) < tol && abs(r[1]) < tol) {
      converged = true;
      break;
    }
    // Central-difference Jacobian in (a, log lambda).
    const Real ha = Real(1e-6) * a;
    const Real hl = Real(1e-6) * std::max(Real(1), abs(log_lambda));
    const auto ra_p = sh.residual(a + ha, log_lambda);
    const auto ra_m = sh.residual(a - ha, log_lambda);
    const auto rl_p = sh.residual(a, log_lambda + hl);
    const auto rl_m = sh.residual(a, log_lambda - hl);
    const Real j00 = (ra_p[0] - ra_m[0]) / (2 * ha);
    const Real j10 = (ra_p[1] - ra_m[1]) / (2 * ha);
    const Real j01 = (rl_p[0] - rl_m[0]) / (2 * hl);
    const Real j11 = (rl_p[1] - rl_m[1]) / (2 * hl);
    const Real det = j00 * j11 - j01 * j10;
    if (det == Real(0) || !std::isfinite(static_cast<double>(det))) break;
    Real da = -(j11 * r[0] - j01 * r[1]) / det;
    Real dl = -(-j10 * r[0] + j00 * r[1]) / det;
    // Damping: at most 10% relative change in a and in lambda per step.
    Real scale = 1;
    if (abs(da) > Real(0.1) * a) scale = std::min(scale, Real(0.1) * a / abs(da));
    if (abs(dl) > max_dlog) scale = std::min(scale, max_dlog / abs(dl));
    da *= scale;
    dl *= scale;
    a += da;
    log_lambda += dl;
    r = sh.residual(a, log_lambda);
  }
  if (!converged) {
    throw SolverError("shoot: Newton did not converge for H = " + std::to_string(H) + " (residuals " +
                      std::to_string(static_cast<double>(r[0])) + ", " + std::to_string(static_cast<double>(r[1])) +
                      ")");
  }

  const Real lambda = exp(log_lambda);
  Trajectory<Real> traj;
  const State<Real> end = sh.run(a, lambda, &traj);
  const Real wT = end[kW];
  const Real T_max = static_cast<Real>(sh.T_max());

  ProfileSolution sol;
  sol.geometry = geometry;
  sol.method = "shoot";
  sol.H = H;
  sol.a = static_cast<double>(a);
  sol.lagrange = static_cast<double>(lambda);
  sol.T_max = sh.T_max();
  sol.iterations = iter;
  sol.converged = true;
  sol.t_grid = traj.t;
  sol.v.reserve(traj.x.size());
  sol.v_dot.reserve(traj.x.size());
  for (const auto& x : traj.x) {
    sol.v.push_back(static_cast<double>(x[kV]));
    sol.v_dot.push_back(static_cast<double>(x[kW]));
  }

  const auto pT = detail::psi_eval<Real>(geometry, static_cast<Real>(H), end[kV], T_max);
  const Real S_half = end[kS] + exp(pT.psi) / Real(2);
  const Real factor = geometry == Geometry::DiskCritical ? Real(2) : Real(1);
  sol.I0 = static_cast<double>(S_half);
  sol.I1 = static_cast<double>(end[kI1]);
  sol.I2 = static_cast<double>(end[kI2]);
  sol.S0 = static_cast<double>(factor * S_half);
  sol.kinetic = static_cast<double>(end[kK] + wT * wT / Real(2));
  sol.tail_velocity = static_cast<double>(wT);
  sol.v_inf = static_cast<double>(end[kV] + wT / Real(2));

  if (abs(wT) > Real(1e-12) * a) {
    sol.warnings.push_back("tail velocity " + std::to_string(static_cast<double>(wT)) + " exceeds 1e-12 a");
  }
  if (abs(sol.kinetic - 1.0) > 1e-9) {
    throw SolverError("shoot: kinetic constraint violated (" + std::to_string(sol.kinetic) + ")");
  }

  const auto p0 = detail::psi_eval<Real>(geometry, static_cast<Real>(H), Real(0), Real(0));
  const Real lhs1 = lambda * a * a / Real(2);
  sol.residuals[0] = static_cast<double>(abs(lhs1 - (Real(2) * S_half - exp(p0.psi))) / lhs1);
  sol.residuals[1] = static_cast<double>(abs(lambda * a - end[kJ1]) / (lambda * a));
  sol.residuals[2] = static_cast<double>(abs(lambda - end[kJ2]) / lambda);

  // T_a: bracket w = a/2 on the grid, then Newton within the step.
  const Real half = a / Real(2);
  std::size_t k = 0;
  while (k + 1 < traj.x.size() && traj.x[k + 1][kW] > half) ++k;
  if (k + 1 >= traj.x.size()) throw SolverError("shoot: velocity never reaches a/2");
  const Real t0 = static_cast<Real>(traj.t[k]);
  const Real h = static_cast<Real>(traj.t[k + 1]) - t0;
  const Real w0 = traj.x[k][kW];
  const Real w1 = traj.x[k + 1][kW];
  Real s = h * (w0 - half) / (w0 - w1);
  Rhs<Real> rhs{geometry, static_cast<Real>(H), Real(1) / lambda};
  for (int it = 0; it < 20; ++it) {
    const State<Real> xs = s > Real(0) ? sh.advance(traj.x[k], t0, s, lambda) : traj.x[k];
    State<Real> dx{};
    rhs(xs, dx, t0 + s);
    const Real f = xs[kW] - half;
    const Real ds = -f / dx[kW];
    s += ds;
    if (s < Real(0)) s = 0;
    if (s > h) s = h;
    if (abs(ds) < Real(1e-15) * (Real(1) + t0)) break;
  }
  sol.T_a = static_cast<double>(t0 + s);
  return sol;
}

}  // namespace

ProfileSolution shoot(Geometry geometry, double H, const SolverConfig& cfg) {
  cfg.validate();
  if (!(H >= 4.0)) throw DomainError("shoot: H >= 4 required");
  if (cfg.precision == Precision::Extended) return shoot_impl<long double>(geometry, H, cfg);
  return shoot_impl<double>(geometry, H, cfg);
}

}  // namespace tmsharp
