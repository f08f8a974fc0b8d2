#pragma once

#include <functional>
#include <optional>
#include <vector>

namespace tmsharp {

enum class Domain { Plane, Disk };

/// Radial function u(r) on a strictly increasing grid. Radii span many
/// decades for concentrating profiles, so log r is stored alongside r and
/// integrals are taken in the log r variable. An optional evaluator gives
/// pointwise values (u, u') of the underlying smooth profile; functionals
/// use it when present and fall back to the samples otherwise.
struct RadialProfile {
  struct Point {
    double u;
    double du;  // du/dr
  };
  using Evaluator = std::function<Point(double log_r)>;

  Domain domain = Domain::Plane;
  std::vector<double> log_r;
  std::vector<double> r;
  std::vector<double> u;
  std::vector<double> du;
  Evaluator evaluator;
  /// Points where the evaluator is only piecewise smooth (e.g. a gluing radius).
  std::vector<double> log_r_breaks;

  std::size_t size() const { return log_r.size(); }
  /// Value and derivative at log r, via the evaluator or cubic Hermite
  /// interpolation of the samples. Outside the grid u is held at its first
  /// value on the left and is 0 on the right; du is 0 on both sides.
  Point at(double log_r_value) const;
  /// Throws std::invalid_argument if the grid or monotonicity invariants fail.
  void validate() const;
  /// Fills r, u, du from log_r and the evaluator.
  static RadialProfile sample(Domain domain, std::vector<double> log_r, Evaluator evaluator,
                              std::vector<double> breaks = {});
};

}  // namespace tmsharp
