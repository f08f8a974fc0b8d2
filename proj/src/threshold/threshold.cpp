#include "tmsharp/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "tmsharp/errors.hpp"
#include "tmsharp/quadrature.hpp"
#include "tmsharp/sobolev.hpp"
#include "tmsharp/special.hpp"
#include "tmsharp/variational.hpp"

namespace tmsharp {

namespace {

constexpr double kRefineTol = 1e-8;
constexpr std::size_t kMaxNodes = std::size_t{1} << 21;

struct Integrands {
  double G, K, M;
};

Integrands integrands(const RadialProfile& prof, const Nonlinearity& g, double x) {
  const RadialProfile::Point p = prof.at(x);
  const double ru = p.du * std::exp(x);  // r u'(r)
  const LogNum gv = g.eval(p.u * p.u);
  const double G = gv.is_zero() ? 0.0 : LogNum::from_log(gv.logmag + 2.0L * x, gv.sign).to_double();
  return {G, ru * ru, p.u * p.u * std::exp(2.0 * x)};
}

// Smallest x in [lo, hi] with u(x) <= level, for non-increasing u with
// u(lo) > level >= u(hi).
double crossing(const RadialProfile& prof, double level, double lo, double hi) {
  for (int k = 0; k < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++k) {
    const double mid = 0.5 * (lo + hi);
    (prof.at(mid).u > level ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace

Functionals functionals(const RadialProfile& prof, const Nonlinearity& g, double r1, double r2) {
  if (prof.size() < 2) throw DomainError("functionals: profile has fewer than 2 points");
  if (!(r2 > r1) || r1 < 0.0) throw DomainError("functionals: empty interval");
  const double x1 = r1 > 0.0 ? std::log(r1) : -kInf;
  const double x2 = std::isinf(r2) ? kInf : std::log(r2);
  const double front = prof.log_r.front(), back = prof.log_r.back();
  Functionals out;

  // Constant-u cap below the first sample.
  if (x1 < front) {
    const double xe = std::min(front, x2);
    const double u0 = prof.at(front).u;
    // (r_e^2 - r_1^2) / 2 with r_1 possibly 0.
    const double w = 0.5 * std::exp(2.0 * xe) * (std::isinf(x1) ? 1.0 : -std::expm1(2.0 * (x1 - xe)));
    const LogNum gv = g.eval(u0 * u0);
    out.G_int += (gv * LogNum::from_double(w)).to_double();
    out.M += u0 * u0 * w;
  }
  const double lo = std::max(x1, front), hi = std::min(x2, back);
  if (!(hi > lo)) return out;

  // Hard nodes (ends, breaks, cutoff crossings) are evaluated as one-sided
  // limits from inside each interval; a jump there would otherwise leave an
  // O(h) error that refinement cannot remove.
  std::vector<double> hard{lo, hi};
  for (double x : prof.log_r_breaks)
    if (x > lo && x < hi) hard.push_back(x);
  for (double L : g.cutoffs()) {
    if (prof.at(lo).u > L && prof.at(hi).u <= L) hard.push_back(crossing(prof, L, lo, hi));
  }
  std::sort(hard.begin(), hard.end());
  hard.erase(std::unique(hard.begin(), hard.end()), hard.end());

  Integrands total{0, 0, 0};
  int max_level = 0;
  for (std::size_t seg = 0; seg + 1 < hard.size(); ++seg) {
    const double a = hard[seg], b = hard[seg + 1];
    std::vector<double> nodes{a};
    for (double x : prof.log_r)
      if (x > a && x < b) nodes.push_back(x);
    nodes.push_back(b);
    const double nudge = [&] {
      const double eps = 1e-13 * (1.0 + std::max(std::abs(a), std::abs(b)));
      return std::min(eps, 0.25 * (b - a));
    }();
    const Integrands fa = integrands(prof, g, a + nudge);
    const Integrands fb = integrands(prof, g, b - nudge);

    auto value = [&](std::size_t i) {
      if (i == 0) return fa;
      if (i + 1 == nodes.size()) return fb;
      return integrands(prof, g, nodes[i]);
    };
    Integrands T{0, 0, 0};
    Integrands prev = fa;
    for (std::size_t i = 1; i < nodes.size(); ++i) {
      const Integrands cur = value(i);
      const double h = 0.5 * (nodes[i] - nodes[i - 1]);
      T.G += h * (prev.G + cur.G);
      T.K += h * (prev.K + cur.K);
      T.M += h * (prev.M + cur.M);
      prev = cur;
    }
    // T_{k+1} = T_k / 2 + (midpoint sum) * h / 2 on every interval.
    Integrands E_prev{0, 0, 0};
    bool have_prev = false;
    for (int level = 1;; ++level) {
      if (nodes.size() * 2 > kMaxNodes) throw SolverError("functionals: refinement did not converge");
      Integrands mid{0, 0, 0};
      std::vector<double> refined;
      refined.reserve(nodes.size() * 2);
      for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const double xm = 0.5 * (nodes[i] + nodes[i + 1]);
        const double h = 0.5 * (nodes[i + 1] - nodes[i]);
        const Integrands f = integrands(prof, g, xm);
        mid.G += h * f.G;
        mid.K += h * f.K;
        mid.M += h * f.M;
        refined.push_back(nodes[i]);
        refined.push_back(xm);
      }
      refined.push_back(nodes.back());
      const Integrands Tn{0.5 * T.G + mid.G, 0.5 * T.K + mid.K, 0.5 * T.M + mid.M};
      const Integrands E{Tn.G + (Tn.G - T.G) / 3.0, Tn.K + (Tn.K - T.K) / 3.0, Tn.M + (Tn.M - T.M) / 3.0};
      T = Tn;
      nodes.swap(refined);
      auto close = [](double x, double y) { return std::abs(x - y) <= kRefineTol * std::abs(x) || x == y; };
      if (have_prev && close(E.G, E_prev.G) && close(E.K, E_prev.K) && close(E.M, E_prev.M)) {
        total.G += E.G;
        total.K += E.K;
        total.M += E.M;
        max_level = std::max(max_level, level);
        break;
      }
      E_prev = E;
      have_prev = true;
    }
  }
  out.G_int += total.G;
  out.K += total.K;
  out.M += total.M;
  out.levels = max_level;
  return out;
}

Functionals functionals(const RadialProfile& profile, const Nonlinearity& g) {
  return functionals(profile, g, 0.0, kInf);
}

ProfileDiagnostics profile_diagnostics(const RadialProfile& prof, double L) {
  if (!(L > 0.0)) throw DomainError("profile_diagnostics: L must be positive");
  prof.validate();
  ProfileDiagnostics d;
  const Nonlinearity zero = Nonlinearity::zero();
  const double front = prof.log_r.front(), back = prof.log_r.back();

  if (prof.at(front).u > L) {
    d.log_S = prof.at(back).u > L ? back : crossing(prof, L, front, back);
    d.S = std::exp(d.log_S);
    d.delta = functionals(prof, zero, d.S, kInf).K;
  } else {
    d.delta = functionals(prof, zero).K;
  }

  auto K_tail = [&](double x) { return functionals(prof, zero, std::exp(x), kInf).K; };
  if (functionals(prof, zero).K <= 1.0) return d;  // R = 0
  double lo = front, hi = back;
  if (K_tail(lo) <= 1.0) {
    d.log_R = lo;
  } else {
    for (int k = 0; k < 200 && hi - lo > 1e-13 * (1.0 + std::abs(lo)); ++k) {
      const double mid = 0.5 * (lo + hi);
      (K_tail(mid) > 1.0 ? lo : hi) = mid;
    }
    d.log_R = hi;
  }
  d.R = std::exp(d.log_R);
  d.H = prof.at(d.log_R).u;
  return d;
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Existence:
      return "Existence";
    case Outcome::NonExistence:
      return "NonExistence";
    case Outcome::Inconclusive:
      return "Inconclusive";
  }
  return "Inconclusive";
}

Verdict classify(const Nonlinearity& g, Geometry geometry, const ClassifyParams& P, const SampleGrid& grid) {
  if (!(P.p > 0.0 && P.p <= 3.0)) throw DomainError("classify: p must lie in (0, 3]");
  if (!(P.q > P.p)) throw DomainError("classify: q must exceed p");
  if (!(P.a > 0.0)) throw DomainError("classify: a must be positive");
  if (!(P.L > 0.0)) throw DomainError("classify: L must be positive");
  if (!std::isfinite(P.b)) throw DomainError("classify: b must be finite");
  if (!(grid.s_min > 0.0 && grid.s_max > grid.s_min)) throw DomainError("classify: need 0 < s_min < s_max");
  if (grid.n < 1000) throw DomainError("classify: grid needs at least 1000 points");
  if (grid.s_max < 10.0 * P.L * P.L) throw DomainError("classify: s_max must be at least 10 L^2");

  const bool plane = geometry == Geometry::PlaneCritical;
  const double cE = constants().cE, cD = constants().cD;
  const double L2 = P.L * P.L;
  constexpr double kMarginTol = 1e-12;

  struct Condition {
    std::string tag;
    bool existence;
    double coef;      // coefficient of s^{-expo} inside the bracket
    double expo;
    double poly;      // coefficient of the additive power term (0 if absent)
  };
  const std::vector<Condition> table =
      plane ? std::vector<Condition>{{"(1)", true, P.a, P.p, 0.0},
                                     {"(2)", true, P.b, P.q, P.a},
                                     {"(3)", false, -P.a, P.p, 0.0},
                                     {"(4)", false, P.b, P.q, -P.a}}
            : std::vector<Condition>{{"(i)", true, P.a, P.p, 0.0},
                                     {"(ii)", true, P.b, P.q, P.a},
                                     {"(iii)", false, -P.a, P.p, 0.0},
                                     {"(iv)", false, P.b, P.q, -P.a}};

  std::vector<double> s_grid(static_cast<std::size_t>(grid.n));
  const double span = std::log(grid.s_max / grid.s_min);
  for (int i = 0; i < grid.n; ++i) s_grid[static_cast<std::size_t>(i)] = grid.s_min * std::exp(span * i / (grid.n - 1));
  s_grid.back() = grid.s_max;
  std::vector<LogNum> g_vals;
  g_vals.reserve(s_grid.size());
  for (double s : s_grid) g_vals.push_back(g.eval(s));

  auto bound = [&](const Condition& sp, double s) {
    LogNum b;
    if (s > L2) {
      const long double ls = std::log(static_cast<long double>(s));
      const double corr = plane ? 1.0 - cE / (s * s) : 1.0 - 1.0 / s - cD / (s * s);
      const double bracket = corr + sp.coef * std::pow(s, -sp.expo);
      // s^{-1} e^s (plane) or e^s (disk) times the bracket.
      b = LogNum::from_log(plane ? s - ls : static_cast<long double>(s)) * LogNum::from_double(bracket);
    }
    if (sp.poly != 0.0) {
      const double e = plane ? 1.0 + P.p : P.p;
      b = b + LogNum::from_log(std::log(static_cast<long double>(std::abs(sp.poly))) +
                                   e * std::log(static_cast<long double>(s)),
                               sp.poly > 0 ? 1 : -1);
    }
    return b;
  };

  Verdict v;
  std::vector<std::vector<CertificateRow>> rows(table.size());
  for (std::size_t c = 0; c < table.size(); ++c) {
    ConditionResult res;
    res.tag = table[c].tag;
    res.existence = table[c].existence;
    res.worst_margin = kInf;
    rows[c].reserve(s_grid.size());
    for (std::size_t i = 0; i < s_grid.size(); ++i) {
      const LogNum b = bound(table[c], s_grid[i]);
      const double rel = relative_difference(g_vals[i], b);
      const double signed_margin = table[c].existence ? rel : -rel;
      if (signed_margin < res.worst_margin) {
        res.worst_margin = signed_margin;
        res.worst_s = s_grid[i];
      }
      rows[c].push_back({s_grid[i], static_cast<double>(g_vals[i].logmag), g_vals[i].sign,
                         static_cast<double>(b.logmag), b.sign, rel});
    }
    res.holds = res.worst_margin >= -kMarginTol;
    v.conditions.push_back(res);
  }

  int ex = -1, nex = -1;
  for (std::size_t c = 0; c < table.size(); ++c) {
    if (!v.conditions[c].holds) continue;
    if (table[c].existence && ex < 0) ex = static_cast<int>(c);
    if (!table[c].existence && nex < 0) nex = static_cast<int>(c);
  }
  int chosen = -1;
  if (ex >= 0 && nex >= 0) {
    v.reasons.push_back("existence condition " + table[ex].tag + " and non-existence condition " + table[nex].tag +
                        " both hold on the grid");
  } else if (ex >= 0) {
    chosen = ex;
    if (P.p == 3.0 && !P.Cstar) {
      v.reasons.push_back("p = 3 requires a >= C_*, and C_* was not supplied");
      chosen = -1;
    } else if (P.p == 3.0 && P.a < *P.Cstar) {
      v.reasons.push_back("p = 3 requires a >= C_*, but a < Cstar");
      chosen = -1;
    }
  } else if (nex >= 0) {
    chosen = nex;
    if (!P.L_large) {
      v.reasons.push_back("non-existence condition " + table[nex].tag +
                          " holds on the grid, but L was not asserted to be large enough");
      chosen = -1;
    }
  } else {
    v.reasons.push_back("no condition holds on the grid");
  }
  if (P.p == 3.0 && ex < 0 && !P.Cstar) v.reasons.push_back("p = 3 also needs the unspecified constant C_*");

  if (chosen >= 0) {
    v.outcome = table[chosen].existence ? Outcome::Existence : Outcome::NonExistence;
    v.matched_condition = table[chosen].tag;
    v.reasons.push_back("condition " + table[chosen].tag + " holds at every grid sample");
  }
  const std::size_t cert = chosen >= 0 ? static_cast<std::size_t>(chosen) : 0;
  v.certificate_condition = table[cert].tag;
  v.certificate = std::move(rows[cert]);
  v.caveat =
      "Conditions are checked on a finite grid of s values. A failed sample disproves a condition; passing every "
      "sample is evidence, not a proof, of the inequality for all s > 0.";
  return v;
}

namespace {

// Quintic Hermite interpolation of a solved profile through (v, v_dot, v_ddot).
class InnerProfile {
 public:
  explicit InnerProfile(const ProfileSolution& sol) : sol_(sol) {
    acc_.resize(sol.t_grid.size());
    for (std::size_t i = 0; i < acc_.size(); ++i) {
      const PsiValue p = psi(sol.geometry, sol.H, sol.v[i], sol.t_grid[i]);
      acc_[i] = -p.psi_v * std::exp(p.psi) / sol.lagrange;
    }
  }

  /// (v, v_dot) at t; constant continuation past the last sample.
  std::pair<double, double> operator()(double t) const {
    const auto& tg = sol_.t_grid;
    if (t >= tg.back()) return {sol_.v.back(), 0.0};
    if (t <= tg.front()) return {sol_.v.front(), sol_.v_dot.front()};
    const std::size_t i = static_cast<std::size_t>(std::upper_bound(tg.begin(), tg.end(), t) - tg.begin()) - 1;
    const double h = tg[i + 1] - tg[i];
    const double s = (t - tg[i]) / h;
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
    const double p0 = sol_.v[i], p1 = sol_.v[i + 1];
    const double m0 = h * sol_.v_dot[i], m1 = h * sol_.v_dot[i + 1];
    const double c0 = h * h * acc_[i], c1 = h * h * acc_[i + 1];
    const double v = (1 - 10 * s3 + 15 * s4 - 6 * s5) * p0 + (s - 6 * s3 + 8 * s4 - 3 * s5) * m0 +
                     (0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5) * c0 + (0.5 * s3 - s4 + 0.5 * s5) * c1 +
                     (-4 * s3 + 7 * s4 - 3 * s5) * m1 + (10 * s3 - 15 * s4 + 6 * s5) * p1;
    const double dv = (-30 * s2 + 60 * s3 - 30 * s4) * p0 + (1 - 18 * s2 + 32 * s3 - 15 * s4) * m0 +
                      (s - 4.5 * s2 + 6 * s3 - 2.5 * s4) * c0 + (1.5 * s2 - 4 * s3 + 2.5 * s4) * c1 +
                      (-12 * s2 + 28 * s3 - 15 * s4) * m1 + (30 * s2 - 60 * s3 + 30 * s4) * p1;
    return {v, dv / h};
  }

  double T_max() const { return sol_.t_grid.back(); }

 private:
  ProfileSolution sol_;
  std::vector<double> acc_;
};

void append_linspace(std::vector<double>& x, double a, double b, int n, bool include_end) {
  const int denom = include_end ? n - 1 : n;
  for (int i = 0; i < n; ++i) x.push_back(a + (b - a) * i / denom);
}

}  // namespace

RadialProfile build_trial(Geometry geometry, double H, const SolverConfig& cfg) {
  if (!(H >= 6.0)) throw DomainError("build_trial: H >= 6 required");
  constexpr int kPointsPerSide = 2000;
  const ProfileSolution sol = shoot(geometry, H, cfg);
  auto inner = std::make_shared<const InnerProfile>(sol);
  const double T_max = inner->T_max();

  if (geometry == Geometry::DiskCritical) {
    const double log_R = -H * H;
    auto ev = [inner, log_R, H](double x) -> RadialProfile::Point {
      if (x <= log_R) {
        const auto [v, w] = (*inner)(log_R - x);
        return {H + v, -w * std::exp(-x)};
      }
      if (x > 0.0) return {0.0, 0.0};
      return {-x / H, -std::exp(-x) / H};
    };
    std::vector<double> grid;
    grid.reserve(2 * kPointsPerSide);
    append_linspace(grid, log_R - T_max, log_R, kPointsPerSide, false);
    append_linspace(grid, log_R, 0.0, kPointsPerSide, true);
    RadialProfile p = RadialProfile::sample(Domain::Disk, std::move(grid), ev, {log_R});
    p.u.back() = 0.0;
    return p;
  }

  // Inner mass per R^2: int (H + v)^2 e^{-2t} dt, with the constant tail.
  auto inner_mass = [inner, H](double t) {
    const double u = H + (*inner)(t).first;
    return u * u * std::exp(-2.0 * t);
  };
  QuadOptions qo;
  qo.abs_tol = 0.0;
  qo.rel_tol = 1e-14;
  const double m_breaks[] = {1.0, 4.0, 16.0};
  double m_in = integrate(inner_mass, 0.0, T_max, m_breaks, qo).value;
  const double uT = H + sol.v.back();
  m_in += 0.5 * uT * uT * std::exp(-2.0 * T_max);

  // R^2 (mu(2H^2) + m_in) = 1 makes the total mass 1.
  const MuPoint mu = solve_mu(2.0 * H * H);
  double log_R = -0.5 * (mu.log_mu + std::log1p(m_in * std::exp(-mu.log_mu)));
  const RadialProfile outer = outer_optimizer(H, std::exp(log_R), kPointsPerSide);

  auto assemble = [&](double lr, const RadialProfile& out_prof) {
    auto outer_ptr = std::make_shared<const RadialProfile>(out_prof);
    auto ev = [inner, outer_ptr, lr, H](double x) -> RadialProfile::Point {
      if (x <= lr) {
        const auto [v, w] = (*inner)(lr - x);
        return {H + v, -w * std::exp(-x)};
      }
      return outer_ptr->at(x);
    };
    std::vector<double> grid;
    grid.reserve(kPointsPerSide + out_prof.size());
    append_linspace(grid, lr - T_max, lr, kPointsPerSide, false);
    for (double x : out_prof.log_r) grid.push_back(x);
    RadialProfile p = RadialProfile::sample(Domain::Plane, std::move(grid), ev, {lr});
    return p;
  };
  RadialProfile trial = assemble(log_R, outer);
  // Dilate if quadrature puts the mass above 1; M scales like R^2.
  const double M = functionals(trial, Nonlinearity::zero()).M;
  if (M > 1.0) {
    log_R -= 0.5 * std::log(M) + 1e-12;
    trial = assemble(log_R, outer_optimizer(H, std::exp(log_R), kPointsPerSide));
  }
  return trial;
}

double ratio(const Nonlinearity& g, const RadialProfile& profile) {
  const Functionals f = functionals(profile, g);
  if (profile.domain == Domain::Disk) return 2.0 * f.G_int;
  if (!(f.M > 0.0)) throw DomainError("ratio: profile has zero mass");
  return f.G_int / f.M;
}

}  // namespace tmsharp
