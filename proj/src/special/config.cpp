#include "tmsharp/config.hpp"

#include <stdexcept>

namespace tmsharp {

void SolverConfig::validate() const {
  auto positive = [](double x, const char* name) {
    if (!(x > 0.0)) throw std::invalid_argument(std::string("SolverConfig: ") + name + " must be positive");
  };
  positive(quad_tol, "quad_tol");
  positive(newton_tol, "newton_tol");
  positive(t_step_core, "t_step_core");
  positive(t_step_tail, "t_step_tail");
  positive(t_pad, "t_pad");
}

std::string to_string(Precision p) { return p == Precision::Extended ? "extended" : "standard"; }

Precision parse_precision(const std::string& s) {
  if (s == "standard" || s == "double") return Precision::Standard;
  if (s == "extended" || s == "long-double") return Precision::Extended;
  throw std::invalid_argument("unknown precision '" + s + "' (expected standard or extended)");
}

}  // namespace tmsharp
