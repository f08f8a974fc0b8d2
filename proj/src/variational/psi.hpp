#pragma once

#include <cmath>

#include "tmsharp/geometry.hpp"
#include "tmsharp/special.hpp"

namespace tmsharp::detail {

template <class Real>
struct PsiT {
  Real psi;
  Real psi_v;
  Real psi_vv;
};

/// Plane: psi = -2(t - v^2) - (v - H)^2 - 2 log(1 + v/H) - cE u^-4.
/// Disk:  psi = -2(t - v^2) - (v - H)^2 - u^-2 - cD' u^-4.
template <class Real>
PsiT<Real> psi_eval(Geometry g, Real H, Real v, Real t) {
  using std::log1p;
  const Real u = H + v;
  const Real iu = Real(1) / u;
  const Real iu2 = iu * iu;
  const Real iu4 = iu2 * iu2;
  const Real base = Real(-2) * (t - v * v) - (v - H) * (v - H);
  if (g == Geometry::PlaneCritical) {
    const Real cE = static_cast<Real>(constants().cE);
    return {base - Real(2) * log1p(v / H) - cE * iu4, Real(2) * u - Real(2) * iu + Real(4) * cE * iu4 * iu,
            Real(2) + Real(2) * iu2 - Real(20) * cE * iu4 * iu2};
  }
  const Real cDp = static_cast<Real>(constants().cDp);
  return {base - iu2 - cDp * iu4, Real(2) * u + Real(2) * iu2 * iu + Real(4) * cDp * iu4 * iu,
          Real(2) - Real(6) * iu4 - Real(20) * cDp * iu4 * iu2};
}

}  // namespace tmsharp::detail
