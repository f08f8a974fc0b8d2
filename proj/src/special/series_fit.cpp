#include "tmsharp/series_fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>

namespace tmsharp {

namespace {

std::string power_list(const std::vector<int>& powers) {
  std::string s = "[";
  for (std::size_t i = 0; i < powers.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(powers[i]);
  }
  return s + "]";
}

}  // namespace

double loglog_slope(const std::vector<Sample>& samples) {
  if (samples.size() < 2) throw std::invalid_argument("loglog_slope: need >= 2 samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(samples.size());
  for (const auto& [x, y] : samples) {
    if (!(x > 0)) throw std::invalid_argument("loglog_slope: x must be positive");
    const double lx = std::log(x);
    const double ly = std::log(std::max(std::abs(y), 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw std::invalid_argument("loglog_slope: x values not distinct");
  return (n * sxy - sx * sy) / den;
}

SeriesFit fit_series(const std::vector<Sample>& samples, const std::vector<int>& powers,
                     PowerDirection direction) {
  const auto m = static_cast<Eigen::Index>(powers.size());
  if (powers.empty()) throw std::invalid_argument("fit_series: empty power set");
  if (samples.size() < powers.size() + 2)
    throw std::invalid_argument("fit_series: need at least powers.size() + 2 samples");
  if (std::set<int>(powers.begin(), powers.end()).size() != powers.size())
    throw RankDeficientFit("fit_series: duplicate powers " + power_list(powers), powers);
  std::set<double> xs;
  for (const auto& s : samples) {
    if (!(s.first > 0)) throw std::invalid_argument("fit_series: x values must be positive");
    xs.insert(s.first);
  }
  if (xs.size() != samples.size()) throw std::invalid_argument("fit_series: x values not distinct");

  const auto n = static_cast<Eigen::Index>(samples.size());
  const double sign = direction == PowerDirection::Inverse ? -1.0 : 1.0;
  Eigen::MatrixXd A(n, m);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& [x, yi] = samples[static_cast<std::size_t>(i)];
    y(i) = yi;
    for (Eigen::Index k = 0; k < m; ++k)
      A(i, k) = std::pow(x, sign * powers[static_cast<std::size_t>(k)]);
  }
  // Column scaling to unit norm keeps the normal matrix well balanced.
  Eigen::VectorXd scale = A.colwise().norm().transpose();
  for (Eigen::Index k = 0; k < m; ++k) {
    if (scale(k) == 0.0)
      throw RankDeficientFit("fit_series: zero column for powers " + power_list(powers), powers);
    A.col(k) /= scale(k);
  }
  const Eigen::MatrixXd N = A.transpose() * A;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(N);
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  const double cond = lmin > 0 ? lmax / lmin : std::numeric_limits<double>::infinity();
  if (!(cond < 1e14))
    throw RankDeficientFit("fit_series: rank-deficient design for powers " + power_list(powers),
                           powers);
  const Eigen::VectorXd c = N.ldlt().solve(A.transpose() * y);

  SeriesFit fit;
  fit.powers = powers;
  fit.direction = direction;
  fit.condition_estimate = cond;
  fit.coefficients.resize(powers.size());
  for (Eigen::Index k = 0; k < m; ++k) fit.coefficients[static_cast<std::size_t>(k)] = c(k) / scale(k);

  const Eigen::VectorXd res = y - A * c;
  std::vector<Sample> rs;
  for (Eigen::Index i = 0; i < n; ++i) rs.emplace_back(samples[static_cast<std::size_t>(i)].first, res(i));
  fit.residual_slope = loglog_slope(rs);
  fit.residual_rms = std::sqrt(res.squaredNorm() / static_cast<double>(n));
  return fit;
}

}  // namespace tmsharp
