#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include <lrb/couplings.hpp>

// n-hop coupling sums J_n(i,j) = (M^n)_ij with M the full coupling matrix
// (unit diagonal included), plus the closed-form bounds on them and the
// two-hop reproducibility sweeps that certify the bound derivation.

namespace lrb {

struct HopSeriesQuery {
  int i, j, n;
  CouplingModel model;
};

inline Eigen::MatrixXd coupling_matrix(const CouplingModel& m) {
  if (m.geometry.is_infinite())
    throw std::invalid_argument("exact hopping sums need a finite chain");
  const int n = m.geometry.n;
  Eigen::VectorXd by_dist(n);
  for (int d = 0; d < n; ++d)
    by_dist(d) = d == 0 ? 1.0 : coupling_at_distance(static_cast<double>(d), m.alpha);
  Eigen::MatrixXd mat(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) mat(i, j) = by_dist(distance(i, j, m.geometry));
  return mat;
}

// (M^n)_{i,*} by n matrix-vector products seeded at e_i; no powers stored.
inline Eigen::VectorXd exact_jn_row(const Eigen::MatrixXd& m, int i, int n) {
  if (n < 1) throw std::invalid_argument("hop order must be >= 1");
  if (i < 0 || i >= m.rows()) throw std::out_of_range("site index");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(m.rows());
  v(i) = 1.0;
  for (int k = 0; k < n; ++k) v = m * v;
  return v;
}

inline double exact_jn(const HopSeriesQuery& q) {
  Eigen::MatrixXd m = coupling_matrix(q.model);
  if (q.j < 0 || q.j >= m.rows()) throw std::out_of_range("site index");
  return exact_jn_row(m, q.i, q.n)(q.j);
}

inline double hk_jn_bound(int n, int r, double lam, const Alpha& alpha) {
  if (n < 1 || r < 1) throw std::invalid_argument("need n >= 1, r >= 1");
  if (alpha.is_infinite())
    throw std::invalid_argument("hk_jn_bound needs finite alpha; use trivial_jn_bound");
  return std::pow(2.0 * lam * std::pow(2.0, alpha.value()), n - 1) *
         std::pow(static_cast<double>(r), -alpha.value());
}

inline double new_jn_bound(int n, int r, double lam, const Alpha& alpha) {
  if (n < 1 || r < 1) throw std::invalid_argument("need n >= 1, r >= 1");
  if (n > r) throw std::invalid_argument("new_jn_bound is only valid for n <= r");
  return std::pow(12.0 * lam, n - 1) *
         coupling_at_distance(static_cast<double>(r - n + 1), alpha);
}

inline double trivial_jn_bound(int n, double lam) {
  if (n < 1) throw std::invalid_argument("hop order must be >= 1");
  return std::pow(lam, n - 1);
}

struct ReproCheck {
  std::string check;  // which inequality
  int i, j, n;
  double lhs, rhs, ratio;
  bool pass;
};

struct ReproReport {
  std::vector<ReproCheck> checks;
  bool all_pass = true;
  double worst_ratio = 0.0;

  void add(ReproCheck c) {
    all_pass = all_pass && c.pass;
    worst_ratio = std::max(worst_ratio, c.ratio);
    checks.push_back(std::move(c));
  }
};

// Two-hop reproducibility on a finite window: truncation only lowers the
// left-hand sides, and the infinite-lattice lambda dominates every row sum,
// so both inequalities must hold for every pair.
//   two_hop_direct:  sum_k J_ik J_kj <= 2 lambda 2^alpha J_ij   (finite alpha)
//   two_hop_near:    sum_k J_ik J_kj <= 4 lambda sum_{r_ik<=1} J_ik J_kj
inline ReproReport verify_reproducibility(const CouplingModel& model, int max_r) {
  if (max_r < 1) throw std::invalid_argument("max_r must be >= 1");
  const Eigen::MatrixXd m = coupling_matrix(model);
  const int n = static_cast<int>(m.rows());
  const double lam = lambda(model).value;
  const double two_alpha =
      model.alpha.is_infinite() ? 0.0 : std::pow(2.0, model.alpha.value());
  ReproReport report;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd j2 = exact_jn_row(m, i, 2);
    for (int j = i + 1; j < n; ++j) {
      int r = distance(i, j, model.geometry);
      if (r < 1 || r > max_r) continue;
      const double lhs = j2(j);
      if (!model.alpha.is_infinite()) {
        double rhs = 2.0 * lam * two_alpha * m(i, j);
        report.add({"two_hop_direct", i, j, 2, lhs, rhs, lhs / rhs, lhs <= rhs});
      }
      double near = m(i, i) * m(i, j);
      if (i > 0) near += m(i, i - 1) * m(i - 1, j);
      if (i + 1 < n) near += m(i, i + 1) * m(i + 1, j);
      if (model.geometry.boundary == Boundary::periodic) {
        // wrap neighbors (distinct sites guaranteed by N >= 3)
        if (i == 0) near += m(i, n - 1) * m(n - 1, j);
        if (i == n - 1) near += m(i, 0) * m(0, j);
      }
      double rhs = 4.0 * lam * near;
      report.add({"two_hop_near", i, j, 2, lhs, rhs, lhs / rhs, lhs <= rhs});
    }
  }
  return report;
}

// exact_Jn against each closed-form bound, all pairs with 1 <= r <= max_r
// and 1 <= n <= min(max_n, r for the tight bound).
inline ReproReport verify_jn_bounds(const CouplingModel& model, int max_r, int max_n) {
  if (max_r < 1 || max_n < 1) throw std::invalid_argument("need max_r, max_n >= 1");
  const Eigen::MatrixXd m = coupling_matrix(model);
  const int nsites = static_cast<int>(m.rows());
  const double lam = lambda(model).value;
  ReproReport report;
  for (int i = 0; i < nsites; ++i) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(nsites);
    row(i) = 1.0;
    for (int n = 1; n <= max_n; ++n) {
      row = m * row;  // (M^n)_{i,*}
      for (int j = i + 1; j < nsites; ++j) {
        int r = distance(i, j, model.geometry);
        if (r < 1 || r > max_r) continue;
        const double lhs = row(j);
        if (!model.alpha.is_infinite()) {
          double rhs = hk_jn_bound(n, r, lam, model.alpha);
          report.add({"jn_hk", i, j, n, lhs, rhs, lhs / rhs, lhs <= rhs});
        }
        if (n <= r) {
          double rhs = new_jn_bound(n, r, lam, model.alpha);
          double ratio = rhs > 0.0 ? lhs / rhs
                                   : (lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
          report.add({"jn_new", i, j, n, lhs, rhs, ratio, lhs <= rhs});
        }
        double rhs = trivial_jn_bound(n, lam);
        report.add({"jn_trivial", i, j, n, lhs, rhs, lhs / rhs, lhs <= rhs});
      }
    }
  }
  return report;
}

}  // namespace lrb
