#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <lrb/couplings.hpp>
#include <lrb/hopseries.hpp>

// Closed-form bounds on Q_r(t): the two-term hybrid bound with its split
// parameter mu, the hk bound, causal-region contours, and the crossover
// distance where the long-range term takes over.  Everything is evaluated
// in log space first; e^{v t} overflows a double long before the physics
// gets interesting.

namespace lrb {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log(e^x - 1), stable for both tails
inline double log_expm1(double x) {
  if (x <= 0.0) return -kInf;
  if (x > 36.0) return x + std::log1p(-std::exp(-x));
  return std::log(std::expm1(x));
}

inline double log_sum_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

struct BoundConstants {
  Alpha alpha;
  double lam;
  double c1, v1, c2, v2;
  double hk_c, hk_v;  // NaN in the nearest-neighbor limit

  bool has_hk() const { return !alpha.is_infinite(); }
};

inline BoundConstants bound_constants(const Lambda& lam, const Alpha& alpha) {
  BoundConstants k{alpha,
                   lam.value,
                   1.0 / lam.value,
                   2.0 * lam.value * lam.value * std::exp(1.0),
                   1.0 / (12.0 * lam.value),
                   24.0 * lam.value * lam.value,
                   std::numeric_limits<double>::quiet_NaN(),
                   std::numeric_limits<double>::quiet_NaN()};
  if (!alpha.is_infinite()) {
    double two_alpha = std::pow(2.0, alpha.value());
    k.hk_c = 1.0 / (2.0 * lam.value * two_alpha);
    k.hk_v = 4.0 * lam.value * lam.value * two_alpha;
  }
  return k;
}

inline BoundConstants bound_constants(const CouplingModel& m,
                                      LambdaMode mode = LambdaMode::infinite_lattice) {
  return bound_constants(lambda(m, mode), m.alpha);
}

namespace detail {
inline void check_rt(double r, double t, double mu) {
  if (!(r >= 1.0)) throw std::invalid_argument("need r >= 1");
  if (!(t >= 0.0)) throw std::invalid_argument("need t >= 0");
  if (!(mu > 0.0 && mu < 1.0)) throw std::invalid_argument("need mu in (0,1)");
}
}  // namespace detail

inline double log_short_range_term(double r, double t, double mu, const BoundConstants& k) {
  detail::check_rt(r, t, mu);
  return std::log(k.c1) + log_expm1(k.v1 * t) - mu * r;
}

inline double log_long_range_term(double r, double t, double mu, const BoundConstants& k) {
  detail::check_rt(r, t, mu);
  if (k.alpha.is_infinite()) return -kInf;
  return std::log(k.c2) + log_expm1(k.v2 * t) - k.alpha.value() * std::log((1.0 - mu) * r);
}

inline double short_range_term(double r, double t, double mu, const BoundConstants& k) {
  return std::exp(log_short_range_term(r, t, mu, k));
}

inline double long_range_term(double r, double t, double mu, const BoundConstants& k) {
  return std::exp(log_long_range_term(r, t, mu, k));
}

struct MuPolicy {
  enum class Kind { fixed, optimized };
  Kind kind;
  double mu;  // meaningful for fixed only

  static MuPolicy fixed(double mu) {
    if (!(mu > 0.0 && mu < 1.0)) throw std::invalid_argument("fixed mu must lie in (0,1)");
    return {Kind::fixed, mu};
  }
  static MuPolicy optimized() { return {Kind::optimized, 0.0}; }
};

// log of the uncapped two-term sum
inline double log_hybrid_raw(double r, double t, double mu, const BoundConstants& k) {
  return log_sum_exp(log_short_range_term(r, t, mu, k), log_long_range_term(r, t, mu, k));
}

// Both terms are convex in mu (exp of a linear resp. convex exponent), so the
// log-sum is unimodal: coarse grid on (0.01, 0.99), then golden-section.
inline double optimize_mu(double r, double t, const BoundConstants& k) {
  constexpr int kGrid = 64;
  constexpr double kLo = 0.01, kHi = 0.99;
  auto f = [&](double mu) { return log_hybrid_raw(r, t, mu, k); };
  int best = 0;
  double fbest = kInf;
  for (int i = 0; i < kGrid; ++i) {
    double mu = kLo + (kHi - kLo) * i / (kGrid - 1);
    double fi = f(mu);
    if (fi < fbest) {
      fbest = fi;
      best = i;
    }
  }
  double a = kLo + (kHi - kLo) * std::max(best - 1, 0) / (kGrid - 1);
  double b = kLo + (kHi - kLo) * std::min(best + 1, kGrid - 1) / (kGrid - 1);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > 1e-6) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

struct HybridEval {
  double value;      // capped at 1
  double log10_raw;  // uncapped, log10
  double mu;
  double term_short;
  double term_long;
};

inline HybridEval hybrid_bound(double r, double t, const MuPolicy& policy,
                               const BoundConstants& k) {
  double mu = policy.kind == MuPolicy::Kind::fixed ? policy.mu : optimize_mu(r, t, k);
  double ls = log_short_range_term(r, t, mu, k);
  double ll = log_long_range_term(r, t, mu, k);
  double lraw = log_sum_exp(ls, ll);
  return {std::min(1.0, std::exp(lraw)), lraw / std::log(10.0), mu, std::exp(ls),
          std::exp(ll)};
}

inline double log_hk_raw(double r, double t, const BoundConstants& k) {
  if (!k.has_hk()) throw std::invalid_argument("hk bound needs finite alpha");
  if (!(r >= 1.0)) throw std::invalid_argument("need r >= 1");
  if (!(t >= 0.0)) throw std::invalid_argument("need t >= 0");
  return std::log(k.hk_c) + log_expm1(k.hk_v * t) - k.alpha.value() * std::log(r);
}

inline double hk_bound(double r, double t, const BoundConstants& k) {
  return std::min(1.0, std::exp(log_hk_raw(r, t, k)));
}

// time at which the uncapped bound reaches eps, by bracket doubling plus
// bisection on t (the bound is 0 at t=0 and strictly increasing)
inline double contour_time(double eps, double r, const MuPolicy& policy,
                           const BoundConstants& k) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("need eps in (0,1)");
  const double target = std::log(eps);
  auto g = [&](double t) {
    if (policy.kind == MuPolicy::Kind::fixed)
      return log_hybrid_raw(r, t, policy.mu, k) - target;
    return log_hybrid_raw(r, t, optimize_mu(r, t, k), k) - target;
  };
  double hi = 1e-6;
  while (g(hi) < 0.0) {
    hi *= 2.0;
    if (hi > 1e12) throw std::runtime_error("contour bracket failed");
  }
  double lo = hi > 1e-6 ? hi / 2.0 : 0.0;
  while (hi - lo > 1e-9 * hi) {
    double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline std::vector<std::pair<double, double>> causal_contour(
    double eps, const std::vector<double>& r_values, const MuPolicy& policy,
    const BoundConstants& k) {
  std::vector<std::pair<double, double>> out;
  out.reserve(r_values.size());
  for (double r : r_values) out.emplace_back(r, contour_time(eps, r, policy, k));
  return out;
}

// closed form for the hk contour: hk_c (e^{hk_v t} - 1) r^{-alpha} = eps
inline double hk_contour_time(double eps, double r, const BoundConstants& k) {
  if (!k.has_hk()) throw std::invalid_argument("hk bound needs finite alpha");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("need eps in (0,1)");
  return std::log1p(eps / k.hk_c * std::pow(r, k.alpha.value())) / k.hk_v;
}

// Distance beyond which the long-range term dominates the short-range term
// for good.  The log ratio f(r) = D(t) + mu r - alpha log((1-mu) r) is
// strictly convex with its minimum at r = alpha/mu; if even the minimum is
// nonnegative the long-range term dominates everywhere and the smallest
// admissible distance 1 is returned.  +inf in the nearest-neighbor limit
// (no long-range term).  Note that with the true constants the long-range
// term dominates at every r once t is order one (D grows like (v2-v1) t),
// so interior crossovers live at small t.
inline double crossover_rc(double t, double mu, const BoundConstants& k) {
  if (!(t > 0.0)) throw std::invalid_argument("need t > 0");
  if (!(mu > 0.0 && mu < 1.0)) throw std::invalid_argument("need mu in (0,1)");
  if (k.alpha.is_infinite()) return kInf;
  const double alpha = k.alpha.value();
  auto f = [&](double r) {
    return log_long_range_term(r, t, mu, k) - log_short_range_term(r, t, mu, k);
  };
  double rmin = std::max(1.0, alpha / mu);
  if (f(rmin) >= 0.0) return 1.0;
  double hi = 2.0 * rmin;
  while (f(hi) < 0.0) {
    hi *= 2.0;
    if (hi > 1e15) throw std::runtime_error("crossover bracket failed");
  }
  double lo = rmin;
  while (hi - lo > 1e-9 * hi) {
    double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct PartialSumCheck {
  double mu, r, t;
  double lhs_log, rhs_log;  // natural logs
  bool pass;
};

// Direct numerical check of the two summation steps behind the hybrid bound:
//   sum_{n=1}^{ceil(mu r)-1} (2 lam t)^n/n! new_jn_bound(n,r) <= long_range_term
//   sum_{n=ceil(mu r)}^{N_cut} (2 lam t)^n/n! trivial_jn_bound(n) <= short_range_term
// evaluated in log space; n_cut extends well past the largest term.
inline std::pair<PartialSumCheck, PartialSumCheck> partial_sum_checks(
    double mu, int r, double t, const BoundConstants& k) {
  if (r < 1) throw std::invalid_argument("need r >= 1");
  detail::check_rt(static_cast<double>(r), t, mu);
  const double lam = k.lam;
  const double log2lt = std::log(2.0 * lam * t);
  const int n_split = static_cast<int>(std::ceil(mu * r));

  double lhs_long = -kInf;
  for (int n = 1; n < n_split; ++n) {
    double b = new_jn_bound(n, r, lam, k.alpha);
    if (b == 0.0) continue;
    double term = n * log2lt - std::lgamma(n + 1.0) + std::log(b);
    lhs_long = log_sum_exp(lhs_long, term);
  }
  double rhs_long = log_long_range_term(r, t, mu, k);

  const int n_cut = n_split + std::max(400, static_cast<int>(4.0 * lam * lam * t)) + 64;
  double lhs_short = -kInf;
  for (int n = n_split; n <= n_cut; ++n) {
    double term = n * log2lt - std::lgamma(n + 1.0) + (n - 1) * std::log(lam);
    lhs_short = log_sum_exp(lhs_short, term);
  }
  double rhs_short = log_short_range_term(r, t, mu, k);

  PartialSumCheck longc{mu, static_cast<double>(r), t, lhs_long, rhs_long,
                        lhs_long <= rhs_long};
  PartialSumCheck shortc{mu, static_cast<double>(r), t, lhs_short, rhs_short,
                         lhs_short <= rhs_short};
  return {longc, shortc};
}

}  // namespace lrb
