#pragma once

#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

// Lattice geometry, power-law couplings J_ij = 1/r_ij^alpha with J_ii = 1,
// and the summed-coupling constant lambda = sum_k J_ik that enters every
// bound constant downstream.

namespace lrb {

// Range exponent. Finite values must exceed 1 (lambda diverges otherwise);
// the infinite sentinel is the exact nearest-neighbor limit, not a big float.
class Alpha {
 public:
  explicit Alpha(double value) : v_(value) {
    if (std::isnan(value) || value <= 1.0)
      throw std::invalid_argument("alpha must be > 1 (or the inf sentinel)");
  }

  static Alpha infinite() { return Alpha(std::numeric_limits<double>::infinity()); }

  bool is_infinite() const { return std::isinf(v_); }

  // +inf in the nearest-neighbor limit; branch on is_infinite() before
  // feeding this into formulas like 2^alpha.
  double value() const { return v_; }

  static Alpha parse(const std::string& token) {
    if (token == "inf" || token == "Inf" || token == "INF") return infinite();
    char* end = nullptr;
    double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0')
      throw std::invalid_argument("cannot parse alpha token '" + token + "'");
    return Alpha(v);
  }

  friend bool operator==(const Alpha& a, const Alpha& b) { return a.v_ == b.v_; }

 private:
  double v_;
};

enum class Boundary { open, periodic };

inline const char* to_string(Boundary b) {
  return b == Boundary::open ? "open" : "periodic";
}

// n == 0 denotes the infinite chain (valid for lambda and the bounds;
// simulators and exact hopping sums need a finite chain).
struct Geometry {
  int n = 0;
  Boundary boundary = Boundary::open;

  static Geometry infinite() { return {}; }

  static Geometry finite(int n, Boundary boundary) {
    if (n < 1) throw std::invalid_argument("chain length must be positive");
    if (boundary == Boundary::periodic && n < 3)
      throw std::invalid_argument("periodic chain needs N >= 3");
    return {n, boundary};
  }

  bool is_infinite() const { return n == 0; }
};

struct CouplingModel {
  Alpha alpha;
  Geometry geometry;

  CouplingModel(Alpha a, Geometry g) : alpha(a), geometry(g) {}
};

inline int distance(int i, int j, const Geometry& g) {
  if (g.is_infinite()) {
    if (i < 0 || j < 0) throw std::out_of_range("negative site index");
    return std::abs(i - j);
  }
  if (i < 0 || i >= g.n || j < 0 || j >= g.n)
    throw std::out_of_range("site index outside chain");
  int d = std::abs(i - j);
  if (g.boundary == Boundary::periodic) d = std::min(d, g.n - d);
  return d;
}

// r^-alpha at real separation r > 0, with the nearest-neighbor sentinel.
// Callers may pass non-integer r (the bounds use (1-mu)r and r-n+1).
inline double coupling_at_distance(double r, const Alpha& alpha) {
  if (alpha.is_infinite()) return r <= 1.0 ? 1.0 : 0.0;
  return std::pow(r, -alpha.value());
}

inline double coupling(int i, int j, const CouplingModel& m) {
  int r = distance(i, j, m.geometry);
  if (r == 0) return 1.0;  // J_ii = 1 by convention
  return coupling_at_distance(static_cast<double>(r), m.alpha);
}

// Site at (rightward) distance r from `source`, in the convention used by all
// result tables: open chains walk right, periodic chains wrap.
inline int site_at_distance(int source, int r, const Geometry& g) {
  if (g.is_infinite()) throw std::invalid_argument("finite chain required");
  if (r < 0) throw std::out_of_range("negative distance");
  if (g.boundary == Boundary::periodic) {
    if (r > g.n / 2) throw std::out_of_range("periodic distance beyond N/2");
    return (source + r) % g.n;
  }
  int j = source + r;
  if (j >= g.n) throw std::out_of_range("distance walks off the open chain");
  return j;
}

// Riemann zeta for real alpha > 1. Partial sum to M plus an Euler-Maclaurin
// tail; the remainder is bounded by the first omitted correction term
// (alternating for the completely monotone integrand), which at M = 1e4 is
// below 1e-13 relative for every alpha >= 1.01.
inline double riemann_zeta(double alpha) {
  if (!(alpha > 1.0) || std::isinf(alpha))
    throw std::invalid_argument("zeta needs finite alpha > 1");
  constexpr int M = 10000;
  double s = 0.0;
  for (int k = M; k >= 1; --k) s += std::pow(static_cast<double>(k), -alpha);
  const double m = static_cast<double>(M);
  const double ma = std::pow(m, -alpha);
  double tail = ma * m / (alpha - 1.0);        // integral_M^inf
  tail -= 0.5 * ma;                            // half-weight at M
  tail += alpha * ma / m / 12.0;               // B_2 correction
  tail -= alpha * (alpha + 1.0) * (alpha + 2.0) * ma / (m * m * m) / 720.0;
  return s + tail;
}

enum class LambdaMode { infinite_lattice, finite_row_max };

struct Lambda {
  double value;
  LambdaMode mode;
};

inline Lambda lambda(const CouplingModel& m, LambdaMode mode = LambdaMode::infinite_lattice) {
  if (mode == LambdaMode::infinite_lattice) {
    if (m.alpha.is_infinite()) return {3.0, mode};  // 1 + two unit neighbors
    return {1.0 + 2.0 * riemann_zeta(m.alpha.value()), mode};
  }
  if (m.geometry.is_infinite())
    throw std::invalid_argument("finite_row_max needs a finite chain");
  const int n = m.geometry.n;
  // couplings depend on distance only
  Eigen::VectorXd by_dist(n);
  for (int d = 0; d < n; ++d)
    by_dist(d) = d == 0 ? 1.0 : coupling_at_distance(static_cast<double>(d), m.alpha);
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += by_dist(distance(i, j, m.geometry));
    best = std::max(best, row);
  }
  return {best, mode};
}

}  // namespace lrb
