#include "tmsharp/variational.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "psi.hpp"
#include "tmsharp/errors.hpp"
#include "tmsharp/sobolev.hpp"
#include "tmsharp/soliton.hpp"
#include "tmsharp/special.hpp"

namespace tmsharp {

PsiValue psi(Geometry geometry, double H, double v, double t) {
  if (!(H + v > 0.0)) throw DomainError("psi: requires u = H + v > 0");
  const auto p = detail::psi_eval<double>(geometry, H, v, t);
  return {p.psi, p.psi_v, p.psi_vv};
}

SolutionChecks check_solution(const ProfileSolution& sol) {
  SolutionChecks c;
  const std::size_t n = sol.t_grid.size();
  if (n < 2 || sol.v.size() != n || sol.v_dot.size() != n) return c;
  const double eps_tail = 1e-12 * sol.a;
  c.v0_zero = std::abs(sol.v[0]) <= 1e-14;
  c.v_increasing = true;
  c.vdot_decreasing_positive = true;
  c.concave = true;
  c.schwarz = true;
  // Monotonicity up to eps_tail: before T_a the velocity is flat to machine
  // precision, and after it the tail velocity is only zero to solver tolerance.
  for (std::size_t i = 0; i < n; ++i) {
    if (i + 1 < n) {
      const double dt = sol.t_grid[i + 1] - sol.t_grid[i];
      if (sol.v[i + 1] < sol.v[i] - eps_tail * dt) c.v_increasing = false;
      if (sol.v_dot[i + 1] > sol.v_dot[i] + eps_tail) c.vdot_decreasing_positive = false;
    }
    if (sol.v_dot[i] < -eps_tail) c.vdot_decreasing_positive = false;
    const double t = sol.t_grid[i];
    const PsiValue p = psi(sol.geometry, sol.H, sol.v[i], t);
    // v'' = -psi_v e^psi / lambda; strictly negative unless e^psi underflows.
    if (t > 0.0 && i + 1 < n && !(p.psi_v > 0.0 && sol.lagrange > 0.0)) c.concave = false;
    if (t - sol.v[i] * sol.v[i] < -1e-8) c.schwarz = false;
  }
  c.max_identity_residual = std::max({sol.residuals[0], sol.residuals[1], sol.residuals[2]});
  c.kinetic_error = std::abs(sol.kinetic - 1.0);
  double sup = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const BasisValues b = eval_basis_ta(sol.t_grid[i] - sol.T_a, sol.T_a);
    sup = std::max(sup, std::abs(2.0 * sol.v_dot[i] - sol.a * b.w0));
  }
  c.soliton_proximity = sup / (sol.a * sol.a * sol.a);
  return c;
}

double s_critical_from(const ProfileSolution& sol) {
  if (sol.geometry == Geometry::PlaneCritical) return mu_hat(2.0 * sol.H * sol.H) * sol.S0;
  return sol.S0;
}

double s_critical(Geometry geometry, double H, const SolverConfig& cfg) {
  const ProfileSolution sol = shoot(geometry, H, cfg);
  if (cfg.crosscheck) {
    const ProfileSolution alt = direct_maximize(geometry, H, cfg);
    if (std::abs(alt.S0 - sol.S0) > 1e-8 * std::abs(sol.S0))
      throw SolverError("s_critical: shoot and direct disagree on S0 at H = " + std::to_string(H));
  }
  return s_critical_from(sol);
}

double s_critical_limit(Geometry geometry) {
  return geometry == Geometry::PlaneCritical ? constants().S_inf_plane : constants().S_inf_disk;
}

SweepResult expansion_sweep(Geometry geometry, const std::vector<double>& H_list, const SolverConfig& cfg,
                            int jobs) {
  cfg.validate();
  if (H_list.size() < 4) throw DomainError("expansion_sweep: at least 4 values of H required");
  for (double H : H_list)
    if (!(H >= 6.0)) throw DomainError("expansion_sweep: every H must be >= 6");

  SweepResult out;
  out.geometry = geometry;
  std::vector<double> Hs = H_list;
  std::sort(Hs.begin(), Hs.end());
  out.rows.resize(Hs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < Hs.size(); i = next++) {
      SweepRow& row = out.rows[i];
      row.H = Hs[i];
      try {
        row.solution = shoot(geometry, row.H, cfg);
        if (cfg.crosscheck) {
          const ProfileSolution alt = direct_maximize(geometry, row.H, cfg);
          if (std::abs(alt.S0 - row.solution.S0) > 1e-8 * std::abs(row.solution.S0))
            throw SolverError("shoot and direct disagree on S0");
        }
        row.s_critical = s_critical_from(row.solution);
        row.ok = true;
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
      }
    }
  };
  const int n_threads = std::clamp(jobs, 1, static_cast<int>(Hs.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  const double e = std::exp(1.0);
  const double c0 = constants().c0;
  const double limit = s_critical_limit(geometry);
  std::vector<Sample> s0_samples, a_samples, rem_samples, ta_samples, vinf_samples;
  double ta_dev = 0.0, vinf_dev = 0.0;
  for (const SweepRow& row : out.rows) {
    if (!row.ok) continue;
    const double a = row.solution.a;
    if (geometry == Geometry::PlaneCritical)
      s0_samples.emplace_back(a, 8.0 * row.solution.S0 / e - 1.0 - a * a / 2.0);
    else
      s0_samples.emplace_back(a, row.solution.S0 / e - 1.0);
    a_samples.emplace_back(row.H, a - 1.0 / row.H);
    rem_samples.emplace_back(row.H, std::abs(row.s_critical - limit));
    const double ta_base = 1.0 / (a * a) + 0.5;
    ta_samples.emplace_back(a, row.solution.T_a - ta_base);
    vinf_samples.emplace_back(a, row.solution.v_inf - 1.0 / a - a / 2.0);
    const double ta_pred = ta_base + a * a / 4.0 * (2.0 * c0 + std::log(2.0));
    ta_dev = std::max(ta_dev, std::abs(row.solution.T_a - ta_pred));
    vinf_dev = std::max(vinf_dev, std::abs(row.solution.v_inf - (1.0 / a + a / 2.0 + c0 / 2.0 * a * a * a)));
  }

  auto try_fit = [&](const std::string& key, const std::vector<Sample>& samples, std::vector<int> powers,
                     PowerDirection dir) -> const SeriesFit* {
    if (samples.size() < powers.size() + 1) {
      out.notes.push_back(key + ": too few samples (" + std::to_string(samples.size()) + ")");
      return nullptr;
    }
    try {
      return &(out.fits[key] = fit_series(samples, powers, dir));
    } catch (const std::exception& ex) {
      out.notes.push_back(key + ": " + ex.what());
      return nullptr;
    }
  };

  // The a^6 column absorbs the next order so the a^4 coefficient is not
  // biased by it; the disk needs the a^2 column as well.
  if (geometry == Geometry::PlaneCritical) {
    if (const SeriesFit* f = try_fit("S0_expansion", s0_samples, {4, 6}, PowerDirection::Direct))
      out.scalars["a4_coefficient"] = f->coefficients[0];
  } else {
    // With four rows [2, 4, 6] is underdetermined for the fit, so the a^2
    // column (zero in the expansion) is dropped rather than the a^6 one.
    if (s0_samples.size() >= 5) {
      if (const SeriesFit* f = try_fit("S0_expansion", s0_samples, {2, 4, 6}, PowerDirection::Direct)) {
        out.scalars["a2_coefficient"] = f->coefficients[0];
        out.scalars["a4_coefficient"] = f->coefficients[1];
      }
    } else {
      out.notes.push_back("S0_expansion: fewer than 5 rows, a^2 column dropped");
      if (const SeriesFit* f = try_fit("S0_expansion", s0_samples, {4, 6}, PowerDirection::Direct))
        out.scalars["a4_coefficient"] = f->coefficients[0];
    }
  }
  if (const SeriesFit* f = try_fit("a_minus_inv_H", a_samples, {3, 5}, PowerDirection::Inverse))
    out.scalars["H3_coefficient"] = f->coefficients[0];
  if (const SeriesFit* f = try_fit("T_a_expansion", ta_samples, {2, 4}, PowerDirection::Direct))
    out.scalars["T_a_a2_coefficient"] = f->coefficients[0];
  if (const SeriesFit* f = try_fit("v_inf_expansion", vinf_samples, {3, 5}, PowerDirection::Direct))
    out.scalars["v_inf_a3_coefficient"] = f->coefficients[0];
  if (rem_samples.size() >= 2) out.scalars["remainder_slope"] = loglog_slope(rem_samples);
  out.scalars["T_a_max_deviation"] = ta_dev;
  out.scalars["v_inf_max_deviation"] = vinf_dev;
  return out;
}

}  // namespace tmsharp
