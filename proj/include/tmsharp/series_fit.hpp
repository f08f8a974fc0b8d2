#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tmsharp {

enum class PowerDirection { Inverse, Direct };

/// Least-squares fit y ~ sum_i c_i x^{-p_i} (Inverse) or x^{+p_i} (Direct).
struct SeriesFit {
  std::vector<int> powers;
  std::vector<double> coefficients;
  PowerDirection direction = PowerDirection::Inverse;
  double residual_slope = 0.0;      // slope of log|residual| against log x
  double condition_estimate = 0.0;  // of the column-scaled normal matrix
  double residual_rms = 0.0;
};

class RankDeficientFit : public std::runtime_error {
 public:
  RankDeficientFit(const std::string& what, std::vector<int> powers)
      : std::runtime_error(what), powers_(std::move(powers)) {}
  const std::vector<int>& powers() const noexcept { return powers_; }

 private:
  std::vector<int> powers_;
};

using Sample = std::pair<double, double>;

SeriesFit fit_series(const std::vector<Sample>& samples, const std::vector<int>& powers,
                     PowerDirection direction = PowerDirection::Inverse);

/// Ordinary least-squares slope of log|y| against log x. Zero residuals are
/// floored at 1e-300 so the slope stays finite.
double loglog_slope(const std::vector<Sample>& samples);

}  // namespace tmsharp
