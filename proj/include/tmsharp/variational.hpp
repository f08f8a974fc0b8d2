#pragma once

#include <map>
#include <string>
#include <vector>

#include "tmsharp/config.hpp"
#include "tmsharp/geometry.hpp"
#include "tmsharp/series_fit.hpp"

namespace tmsharp {

/// psi(v, t) and its v-derivative for u = H + v.
struct PsiValue {
  double psi;
  double psi_v;
  double psi_vv;
};
PsiValue psi(Geometry geometry, double H, double v, double t);

/// Solved maximizer of the concentrating half-energy problem. S0 carries the
/// disk's factor 2.
struct ProfileSolution {
  Geometry geometry = Geometry::PlaneCritical;
  std::string method;  // "shoot" or "direct"
  double H = 0.0;
  double a = 0.0;
  double lagrange = 0.0;
  std::vector<double> t_grid;
  std::vector<double> v;
  std::vector<double> v_dot;
  double S0 = 0.0;
  double T_a = 0.0;
  double T_max = 0.0;
  double v_inf = 0.0;
  double I0 = 0.0;
  double I1 = 0.0;
  double I2 = 0.0;
  /// Relative residuals of  lambda a^2/2 = 2 int e^psi - e^psi(0),
  /// lambda a = int psi_v e^psi,  lambda = int v psi_v e^psi.
  double residuals[3] = {0.0, 0.0, 0.0};
  double kinetic = 0.0;
  double tail_velocity = 0.0;  // v_dot(T_max)
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_history;  // accepted iterates (direct only)
  std::vector<std::string> warnings;
};

/// Checks of the structural properties of an accepted solution.
struct SolutionChecks {
  bool v0_zero = false;
  bool v_increasing = false;
  bool vdot_decreasing_positive = false;
  bool concave = false;
  bool schwarz = false;  // t >= v^2 on the grid
  double max_identity_residual = 0.0;
  double kinetic_error = 0.0;
  double soliton_proximity = 0.0;  // a^{-1} sup |2 v_dot - a w0(t - T_a)| / a^2
};
SolutionChecks check_solution(const ProfileSolution& sol);

/// Shooting on (a, log lambda) for v'' = -(1/lambda) psi_v e^psi, v(0) = 0,
/// with v_dot(T_max) = 0 and int v_dot^2 = 1. Throws SolverError on failure.
ProfileSolution shoot(Geometry geometry, double H, const SolverConfig& cfg = {});

/// Direct constrained maximization of int e^psi over velocity profiles with
/// unit kinetic energy, discretised on Gauss-Legendre panels.
ProfileSolution direct_maximize(Geometry geometry, double H, const SolverConfig& cfg = {});

/// Plane: mu_hat(2 H^2) S0(H). Disk: S0(H).
double s_critical(Geometry geometry, double H, const SolverConfig& cfg = {});
double s_critical_from(const ProfileSolution& sol);
/// Limit of s_critical as H -> inf: e^{2-2 gamma} (plane), e (disk).
double s_critical_limit(Geometry geometry);

struct SweepRow {
  double H = 0.0;
  bool ok = false;
  std::string error;
  ProfileSolution solution;
  double s_critical = 0.0;
};

struct SweepResult {
  Geometry geometry = Geometry::PlaneCritical;
  std::vector<SweepRow> rows;  // ordered by H
  std::map<std::string, SeriesFit> fits;
  std::map<std::string, double> scalars;
  std::vector<std::string> notes;  // fits that could not be formed
};

/// Solves each H (concurrently when jobs > 1), then fits the expansion
/// coefficients. Failed rows are kept, marked and excluded from fits.
SweepResult expansion_sweep(Geometry geometry, const std::vector<double>& H_list, const SolverConfig& cfg = {},
                            int jobs = 1);

}  // namespace tmsharp
