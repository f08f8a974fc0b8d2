#pragma once

#include <string>

namespace tmsharp {

enum class Precision { Standard, Extended };

struct SolverConfig {
  double quad_tol = 1e-12;
  double newton_tol = 1e-11;
  double t_step_core = 0.01;
  double t_step_tail = 0.1;
  double t_pad = 40.0;
  bool crosscheck = false;
  Precision precision = Precision::Standard;

  /// Throws std::invalid_argument unless every tolerance and step is positive.
  void validate() const;
};

std::string to_string(Precision p);
Precision parse_precision(const std::string& s);

}  // namespace tmsharp
