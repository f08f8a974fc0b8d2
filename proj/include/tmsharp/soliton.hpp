#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tmsharp/geometry.hpp"

namespace tmsharp {

/// Parameters of the soliton family: initial slope a, transition time T_a
/// (where the velocity drops to a/2) and height H.
struct SolitonFrame {
  double a = 0.0;
  double T_a = 0.0;
  double H = 0.0;
  Geometry geometry = Geometry::PlaneCritical;

  /// Frame implied by the asymptotic relations between a, T_a and H.
  static SolitonFrame from_H(double H, Geometry geometry);
  /// Frame with a prescribed transition time; a and H follow from it.
  static SolitonFrame from_Ta(double T_a, Geometry geometry = Geometry::PlaneCritical);
};

struct BasisValues {
  double w0 = 0.0;
  double v_minus = 0.0;
  double v_plus = 0.0;
  double nu0 = 0.0;
  double v1 = 0.0;
  double w1 = 0.0;
  double dw0 = 0.0;
  double dw1 = 0.0;
};

/// Basis functions at time t, expressed through t_a = t - T_a.
BasisValues eval_basis(const SolitonFrame& frame, double t);
/// Same, parametrised directly by t_a (v_minus then uses t = t_a + T_a).
BasisValues eval_basis_ta(double t_a, double T_a);

/// Exact value sign * numerator / denominator.
struct ExactRational {
  int sign = 1;
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 1;
  double value() const { return sign * static_cast<double>(numerator) / static_cast<double>(denominator); }
};

/// Closed form of int_0^inf dw0 (w0-2)^{k-1} v_+^j dt in the T_a -> inf limit.
double appendixA_integral(int k, int j);
ExactRational appendixA_exact(int k, int j);

/// Closed form of int_R (2-w0)^j |v_+|^k dt.
double zeta_integral(int j, double k);

struct IdentityCheck {
  std::string family;  // "appendixA", "zeta", "hard", "derivative", "linearized"
  std::string label;
  int k = 0;
  int j = 0;
  double computed = 0.0;
  double expected = 0.0;
  double deviation = 0.0;  // absolute for appendixA and pointwise checks, relative for zeta
  double tolerance = 0.0;
  bool pass = false;
};

struct IdentityReport {
  std::vector<IdentityCheck> checks;
  double max_appendixA_deviation = 0.0;
  double max_zeta_deviation = 0.0;
  double max_derivative_residual = 0.0;
  double max_linearized_residual = 0.0;
  bool all_pass = true;
  std::vector<IdentityCheck> failures() const;
};

/// Recomputes the closed-form tables by quadrature and checks the pointwise
/// derivative identities. Requires frame.T_a >= 20.
IdentityReport verify_identities(const SolitonFrame& frame, double tol);

enum class ReconstructionOrder { Leading, Third };

/// Two-branch reconstruction of v(t) glued at t = T_a.
std::function<double(double)> reconstruct_v(const SolitonFrame& frame, ReconstructionOrder order);
/// Matching velocity (a/2) w0 [+ (a^3/8) w1].
std::function<double(double)> reconstruct_vdot(const SolitonFrame& frame, ReconstructionOrder order);
/// Limit value v(inf) used by the reconstruction of the given order.
double reconstruct_v_inf(const SolitonFrame& frame, ReconstructionOrder order);

}  // namespace tmsharp
