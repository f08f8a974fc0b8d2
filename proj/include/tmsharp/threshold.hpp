#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tmsharp/config.hpp"
#include "tmsharp/expression.hpp"
#include "tmsharp/geometry.hpp"
#include "tmsharp/profile.hpp"

namespace tmsharp {

/// {g}_I = int g(u^2) r dr, K_I = int u'^2 r dr, M_I = int u^2 r dr.
struct Functionals {
  double G_int = 0.0;
  double K = 0.0;
  double M = 0.0;
  int levels = 0;  // grid doublings used
};

/// Functionals over (r1, r2), integrated in log r. The sampled range is
/// refined by repeated midpoint doubling (trapezoid with Richardson
/// correction) until each value changes by less than 1e-8 relative. Below the
/// first sample u is taken constant. r1 = 0 and r2 = inf are allowed.
Functionals functionals(const RadialProfile& profile, const Nonlinearity& g, double r1, double r2);
Functionals functionals(const RadialProfile& profile, const Nonlinearity& g);

/// S, delta, R, H of a radial profile at cutoff level L. S = 0 when u never
/// exceeds L; R = 0 when the whole kinetic energy is at most 1.
struct ProfileDiagnostics {
  double S = 0.0;
  double log_S = -std::numeric_limits<double>::infinity();
  double delta = 0.0;
  double R = 0.0;
  double log_R = -std::numeric_limits<double>::infinity();
  double H = 0.0;
};
ProfileDiagnostics profile_diagnostics(const RadialProfile& profile, double L);

enum class Outcome { Existence, NonExistence, Inconclusive };
std::string to_string(Outcome o);

struct ClassifyParams {
  double p = 1.0;  // in (0, 3]
  double q = 2.0;  // > p
  double a = 1.0;  // > 0
  double b = 0.0;
  double L = 1.0;  // > 0
  std::optional<double> Cstar;
  bool L_large = false;  // caller asserts L is large enough for non-existence
};

struct SampleGrid {
  double s_min = 1e-2;
  double s_max = 1e4;
  int n = 2000;  // log-spaced
};

struct CertificateRow {
  double s = 0.0;
  double log_g = 0.0;  // log |g(s)|; -inf when g(s) = 0
  int sign_g = 0;
  double log_bound = 0.0;
  int sign_bound = 0;
  double margin = 0.0;  // (g - bound) / max(|g|, |bound|)
};

struct ConditionResult {
  std::string tag;  // "(1)".."(4)" or "(i)".."(iv)"
  bool existence = false;
  bool holds = false;
  double worst_margin = 0.0;  // signed so that negative means violated
  double worst_s = 0.0;
};

struct Verdict {
  Outcome outcome = Outcome::Inconclusive;
  std::optional<std::string> matched_condition;
  std::vector<ConditionResult> conditions;
  /// Rows for the matched condition, or for the first existence condition.
  std::string certificate_condition;
  std::vector<CertificateRow> certificate;
  std::vector<std::string> reasons;
  std::string caveat;
};

/// Tests g against the four threshold conditions on a log-spaced grid. A
/// condition holds when its inequality is met at every sample up to a
/// relative margin of 1e-12. Throws EvalError if g fails at a sample and
/// DomainError on invalid parameters or grid.
Verdict classify(const Nonlinearity& g, Geometry geometry, const ClassifyParams& params, const SampleGrid& grid);

/// Concentrating trial profile of height H: the solved inner profile glued at
/// R to the optimal outer tail (plane, with mass 1) or to H log(1/r)/log(1/R)
/// with R = e^{-H^2} (disk).
RadialProfile build_trial(Geometry geometry, double H, const SolverConfig& cfg = {});

/// Plane: {g}(u) / M(u). Disk: 2 int_0^1 g(u^2) r dr.
double ratio(const Nonlinearity& g, const RadialProfile& profile);

}  // namespace tmsharp
