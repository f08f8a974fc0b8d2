#include "tmsharp/special.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace tmsharp {

namespace {

constexpr std::array<double, 12> kBernoulliEven = {
    1.0,                  // B_0
    1.0 / 6.0,            // B_2
    -1.0 / 30.0,          // B_4
    1.0 / 42.0,           // B_6
    -1.0 / 30.0,          // B_8
    5.0 / 66.0,           // B_10
    -691.0 / 2730.0,      // B_12
    7.0 / 6.0,            // B_14
    -3617.0 / 510.0,      // B_16
    43867.0 / 798.0,      // B_18
    -174611.0 / 330.0,    // B_20
    854513.0 / 138.0,     // B_22
};

// Li_2 on [0, 1/2] by its power series; ratio <= 1/2 so 60 terms suffice.
double dilog_series(double x) {
  double sum = 0.0;
  double xk = x;
  for (int k = 1; k <= 200; ++k) {
    const double term = xk / (static_cast<double>(k) * k);
    sum += term;
    if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
    xk *= x;
  }
  return sum;
}

}  // namespace

double bernoulli_even(int k) {
  if (k < 0 || k >= static_cast<int>(kBernoulliEven.size()))
    throw DomainError("bernoulli_even: index out of table range");
  return kBernoulliEven[static_cast<std::size_t>(k)];
}

double euler_gamma() {
  // H_n - log n - 1/(2n) + sum_k B_{2k} / (2k n^{2k}) at n = 20; the
  // truncated tail is below 1e-25.
  static const double value = [] {
    constexpr int n = 20;
    double harmonic = 0.0;
    for (int k = n; k >= 1; --k) harmonic += 1.0 / k;
    const double nn = n;
    double corr = 0.0;
    double pw = 1.0;
    for (int k = 1; k <= 8; ++k) {
      pw *= nn * nn;
      corr += kBernoulliEven[k] / (2.0 * k * pw);
    }
    return harmonic - std::log(nn) - 1.0 / (2.0 * nn) + corr;
  }();
  return value;
}

double zeta(double k) {
  if (!(k > 1.0)) throw DomainError("zeta: requires k > 1");
  constexpr int N = 16;
  double head = 0.0;
  for (int n = N - 1; n >= 1; --n) head += std::pow(static_cast<double>(n), -k);
  const double nn = N;
  double tail = std::pow(nn, 1.0 - k) / (k - 1.0) + 0.5 * std::pow(nn, -k);
  // Euler-Maclaurin: B_{2j}/(2j)! * k (k+1) ... (k+2j-2) * N^{-k-2j+1}
  double rising = k;  // k (k+1) ... (k + 2j - 2)
  double fact = 2.0;  // (2j)!
  double npow = std::pow(nn, -k - 1.0);
  for (int j = 1; j <= 10; ++j) {
    const double term = kBernoulliEven[j] / fact * rising * npow;
    tail += term;
    if (std::abs(term) < 1e-20 * head) break;
    rising *= (k + 2.0 * j - 1.0) * (k + 2.0 * j);
    fact *= (2.0 * j + 1.0) * (2.0 * j + 2.0);
    npow /= nn * nn;
  }
  return head + tail;
}

double dilog(double x) {
  constexpr double pi2_6 = std::numbers::pi * std::numbers::pi / 6.0;
  if (x > 1.0) throw DomainError("dilog: requires x <= 1");
  if (x == 1.0) return pi2_6;
  if (x == 0.0) return 0.0;
  if (x < -1.0) {
    // Inversion: Li2(x) = -pi^2/6 - log^2(-x)/2 - Li2(1/x)
    const double l = std::log(-x);
    return -pi2_6 - 0.5 * l * l - dilog(1.0 / x);
  }
  if (x < 0.0) {
    // Landen: Li2(x) = -Li2(x/(x-1)) - log^2(1-x)/2, maps [-1,0) to (0,1/2]
    const double l = std::log1p(-x);
    return -dilog_series(x / (x - 1.0)) - 0.5 * l * l;
  }
  if (x <= 0.5) return dilog_series(x);
  // Reflection: Li2(x) = pi^2/6 - log(x) log(1-x) - Li2(1-x)
  return pi2_6 - std::log(x) * std::log1p(-x) - dilog_series(1.0 - x);
}

double gamma_fn(double x) {
  if (!(x > 0.0)) throw DomainError("gamma_fn: requires x > 0");
  if (x > 171.0) throw DomainError("gamma_fn: overflow for x > 171");
  // Exact for small integers.
  if (x == std::floor(x) && x <= 21.0) {
    double f = 1.0;
    for (int k = 2; k < static_cast<int>(x); ++k) f *= k;
    return f;
  }
  double shift = 1.0;
  double y = x;
  while (y < 10.0) {
    shift *= y;
    y += 1.0;
  }
  // Stirling series for log Gamma(y), y >= 10.
  double series = 0.0;
  double ypow = y;
  const double y2 = y * y;
  for (int k = 1; k <= 9; ++k) {
    series += kBernoulliEven[k] / (2.0 * k * (2.0 * k - 1.0) * ypow);
    ypow *= y2;
  }
  const double lg = (y - 0.5) * std::log(y) - y + 0.5 * std::log(2.0 * std::numbers::pi) + series;
  return std::exp(lg) / shift;
}

const ConstantTable& constants() {
  static const ConstantTable table = [] {
    ConstantTable t{};
    t.gamma_euler = euler_gamma();
    t.zeta2 = zeta(2.0);
    t.zeta3 = zeta(3.0);
    t.c0 = t.zeta2 / 4.0;
    t.c1 = t.zeta2 / 2.0 + 1.0 - std::log(2.0);
    t.cE = 4.0 + 2.0 * t.zeta3;
    t.cD = 1.5 + 2.0 * t.zeta3;
    t.cDp = t.cD + 0.5;
    t.cInf = (1.0 - t.c1) / 2.0;
    t.S_inf_plane = std::exp(2.0 - 2.0 * t.gamma_euler);
    t.S_inf_disk = std::exp(1.0);
    return t;
  }();
  return table;
}

}  // namespace tmsharp
