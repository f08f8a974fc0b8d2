#pragma once

#include "tmsharp/errors.hpp"

namespace tmsharp {

/// Constants that recur throughout the expansions. Filled once from the
/// series implementations below; see constants().
struct ConstantTable {
  double gamma_euler;
  double zeta2;
  double zeta3;
  double c0;           // zeta2 / 4 = int_0^inf log(1 + e^{-2t}) dt
  double c1;           // zeta2 / 2 + 1 - log 2
  double cE;           // 4 + 2 zeta3, plane threshold constant
  double cD;           // 3/2 + 2 zeta3, disk threshold constant
  double cDp;          // cD + 1/2
  double cInf;         // (1 - c1) / 2, limit of nu0 at +inf
  double S_inf_plane;  // exp(2 - 2 gamma)
  double S_inf_disk;   // e
};

const ConstantTable& constants();

double euler_gamma();

/// Riemann zeta for real k > 1 (Euler-Maclaurin summation).
double zeta(double k);

/// Li_2(x) for x <= 1.
double dilog(double x);

double gamma_fn(double x);

/// Bernoulli number B_{2k} for 1 <= k <= 11.
double bernoulli_even(int k);

}  // namespace tmsharp
