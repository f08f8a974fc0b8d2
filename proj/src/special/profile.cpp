#include "tmsharp/profile.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tmsharp {

RadialProfile::Point RadialProfile::at(double x) const {
  if (evaluator) return evaluator(x);
  const std::size_t n = log_r.size();
  if (n == 0) throw std::invalid_argument("RadialProfile::at: empty profile");
  if (x <= log_r.front()) return {u.front(), x == log_r.front() ? du.front() : 0.0};
  if (x >= log_r.back()) return x == log_r.back() ? Point{u.back(), du.back()} : Point{0.0, 0.0};
  const auto it = std::upper_bound(log_r.begin(), log_r.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - log_r.begin()) - 1;
  // Cubic Hermite in log r with slopes r u'(r).
  const double h = log_r[i + 1] - log_r[i];
  const double s = (x - log_r[i]) / h;
  const double m0 = r[i] * du[i] * h;
  const double m1 = r[i + 1] * du[i + 1] * h;
  const double s2 = s * s, s3 = s2 * s;
  const double val = (2 * s3 - 3 * s2 + 1) * u[i] + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * u[i + 1] +
                     (s3 - s2) * m1;
  const double dval_ds = (6 * s2 - 6 * s) * u[i] + (3 * s2 - 4 * s + 1) * m0 + (-6 * s2 + 6 * s) * u[i + 1] +
                         (3 * s2 - 2 * s) * m1;
  return {val, dval_ds / h / std::exp(x)};
}

void RadialProfile::validate() const {
  const std::size_t n = log_r.size();
  if (n < 2) throw std::invalid_argument("RadialProfile: need at least 2 grid points");
  if (r.size() != n || u.size() != n || du.size() != n)
    throw std::invalid_argument("RadialProfile: grid arrays differ in length");
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && !(log_r[i] > log_r[i - 1])) throw std::invalid_argument("RadialProfile: grid not increasing");
    if (!(u[i] >= 0.0)) throw std::invalid_argument("RadialProfile: u must be non-negative");
    if (i > 0 && u[i] > u[i - 1] * (1.0 + 1e-12) + 1e-300)
      throw std::invalid_argument("RadialProfile: u must be non-increasing");
  }
  if (domain == Domain::Disk) {
    if (log_r.back() > 1e-14) throw std::invalid_argument("RadialProfile: disk grid must lie in (0, 1]");
    if (std::abs(log_r.back()) <= 1e-14 && std::abs(u.back()) > 1e-12)
      throw std::invalid_argument("RadialProfile: disk profile must vanish at r = 1");
  }
}

RadialProfile RadialProfile::sample(Domain domain, std::vector<double> lr, Evaluator ev, std::vector<double> breaks) {
  RadialProfile p;
  p.domain = domain;
  p.log_r = std::move(lr);
  p.evaluator = std::move(ev);
  p.log_r_breaks = std::move(breaks);
  const std::size_t n = p.log_r.size();
  p.r.resize(n);
  p.u.resize(n);
  p.du.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    p.r[i] = std::exp(p.log_r[i]);
    const Point q = p.evaluator(p.log_r[i]);
    p.u[i] = q.u;
    p.du[i] = q.du;
  }
  return p;
}

}  // namespace tmsharp
