#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lrb/couplings.hpp"

// Long-range XY chain in the single-excitation sector. The quench U acting
// on the all-down state creates (|vac> + |e_source>)/sqrt(2); the vacuum has
// zero energy and excitation number is conserved, so Eq-level Q reduces to
// the one-particle amplitude c(t) = exp(-i h t) e_source with h the hopping
// matrix. The reduction is certified against the dense oracle in the tests.

namespace lrb::xy {

using Complex = std::complex<double>;

struct XYScenario {
  CouplingModel model;  // finite geometry; carries N and the boundary
  int quench_site = 0;
  std::vector<double> times;  // sorted ascending, all >= 0
};

inline void validate(const XYScenario& sc) {
  const Geometry& g = sc.model.geometry;
  if (g.is_infinite()) throw std::invalid_argument("xy: need a finite chain");
  if (sc.quench_site < 0 || sc.quench_site >= g.n)
    throw std::out_of_range("xy: quench site outside chain");
  double prev = 0.0;
  for (double t : sc.times) {
    if (!(t >= prev))
      throw std::invalid_argument("xy: times must be ascending and nonnegative");
    prev = t;
  }
}

// Off-diagonal J_ij, zero diagonal: the matrix element of each bond term
// between single-excitation states |e_i>, |e_j> is exactly J_ij.
inline Eigen::MatrixXd build_hopping_matrix(const XYScenario& sc) {
  validate(sc);
  const Geometry& g = sc.model.geometry;
  const int n = g.n;
  std::vector<double> by_dist(static_cast<std::size_t>(n), 0.0);
  for (int d = 1; d < n; ++d)
    by_dist[static_cast<std::size_t>(d)] =
        coupling_at_distance(static_cast<double>(d), sc.model.alpha);
  Eigen::MatrixXd h(n, n);
  for (int i = 0; i < n; ++i) {
    h(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) {
      const double v = by_dist[static_cast<std::size_t>(distance(i, j, g))];
      h(i, j) = v;
      h(j, i) = v;
    }
  }
  return h;
}

struct PropagatorRow {
  Eigen::VectorXcd amplitudes;  // c_r(t) per site index
  int n = 0;
  double alpha = 0.0;  // +inf nearest-neighbor, NaN when built from a bare matrix
  double t = 0.0;
};

// One eigendecomposition serves every requested time.
class Propagator {
 public:
  explicit Propagator(const Eigen::MatrixXd& hopping) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hopping);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("xy: eigendecomposition failed");
    vecs_ = es.eigenvectors();
    vals_ = es.eigenvalues();
  }

  int size() const { return static_cast<int>(vals_.size()); }

  // column `source` of exp(-i h t)
  Eigen::VectorXcd column(double t, int source) const {
    if (source < 0 || source >= size())
      throw std::out_of_range("xy: source site outside chain");
    if (!(t >= 0.0)) throw std::invalid_argument("xy: time must be >= 0");
    const Eigen::ArrayXd w = vecs_.row(source).transpose().array();
    const Eigen::ArrayXd ph = vals_.array() * t;
    const Eigen::VectorXd re = vecs_ * (w * ph.cos()).matrix();
    const Eigen::VectorXd im = vecs_ * (w * ph.sin()).matrix();
    Eigen::VectorXcd c(re.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = Complex(re(i), -im(i));
    return c;
  }

 private:
  Eigen::MatrixXd vecs_;
  Eigen::VectorXd vals_;
};

inline PropagatorRow evolve_propagator(const Eigen::MatrixXd& hopping, double t,
                                       int source) {
  Propagator prop(hopping);
  PropagatorRow row;
  row.amplitudes = prop.column(t, source);
  row.n = prop.size();
  row.alpha = std::numeric_limits<double>::quiet_NaN();
  row.t = t;
  const double norm = row.amplitudes.squaredNorm();
  if (std::abs(norm - 1.0) > 1e-10)
    throw std::runtime_error("xy: propagator row lost unitarity");
  return row;
}

inline PropagatorRow evolve_propagator(const XYScenario& sc, double t) {
  PropagatorRow row = evolve_propagator(build_hopping_matrix(sc), t, sc.quench_site);
  row.alpha = sc.model.alpha.value();
  return row;
}

// Q_r(t) = |Re c_site(t)| / 2 with site at rightward distance r from the
// quench site; one value per scenario time.
inline std::vector<double> qrt_xy(const XYScenario& sc, int r) {
  validate(sc);
  const int site = site_at_distance(sc.quench_site, r, sc.model.geometry);
  Propagator prop(build_hopping_matrix(sc));
  std::vector<double> out;
  out.reserve(sc.times.size());
  for (double t : sc.times)
    out.push_back(0.5 * std::abs(prop.column(t, sc.quench_site)(site).real()));
  return out;
}

// rows follow sc.times, columns follow rs; the propagator is built once
inline Eigen::MatrixXd qrt_xy_table(const XYScenario& sc, const std::vector<int>& rs) {
  validate(sc);
  std::vector<int> sites;
  sites.reserve(rs.size());
  for (int r : rs) sites.push_back(site_at_distance(sc.quench_site, r, sc.model.geometry));
  Propagator prop(build_hopping_matrix(sc));
  Eigen::MatrixXd out(static_cast<Eigen::Index>(sc.times.size()),
                      static_cast<Eigen::Index>(rs.size()));
  for (std::size_t ti = 0; ti < sc.times.size(); ++ti) {
    const Eigen::VectorXcd c = prop.column(sc.times[ti], sc.quench_site);
    for (std::size_t ri = 0; ri < sites.size(); ++ri)
      out(static_cast<Eigen::Index>(ti), static_cast<Eigen::Index>(ri)) =
          0.5 * std::abs(c(sites[ri]).real());
  }
  return out;
}

namespace detail {

// E(k) = sum_d w_d cos(k d), w indexed from d = 1
struct FourierEnergy {
  std::vector<double> w;

  double operator()(double k) const {
    double e = 0.0;
    for (std::size_t d = 1; d <= w.size(); ++d)
      e += w[d - 1] * std::cos(k * static_cast<double>(d));
    return e;
  }
};

// centered difference with one Richardson step
template <class F>
double fd_derivative(const F& f, double k, double h) {
  const double d1 = (f(k + h) - f(k - h)) / (2.0 * h);
  const double d2 = (f(k + h / 2.0) - f(k - h / 2.0)) / h;
  return (4.0 * d2 - d1) / 3.0;
}

template <class G>
std::pair<double, double> golden_max(const G& g, double lo, double hi, double tol) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - phi * (b - a);
  double x2 = a + phi * (b - a);
  double g1 = g(x1), g2 = g(x2);
  while (b - a > tol) {
    if (g1 < g2) {
      a = x1;
      x1 = x2;
      g1 = g2;
      x2 = a + phi * (b - a);
      g2 = g(x2);
    } else {
      b = x2;
      x2 = x1;
      g2 = g1;
      x1 = b - phi * (b - a);
      g1 = g(x1);
    }
  }
  const double km = 0.5 * (a + b);
  return {g(km), km};
}

// max |E'(k)| over [0, pi]: coarse scan on the value grid, then a golden
// refinement of the Richardson-corrected difference quotient
inline std::pair<double, double> vmax_search(const FourierEnergy& f, int m_grid) {
  const double pi = std::numbers::pi;
  const double dk = pi / m_grid;
  std::vector<double> e(static_cast<std::size_t>(m_grid) + 1);
  for (int i = 0; i <= m_grid; ++i) e[static_cast<std::size_t>(i)] = f(i * dk);
  int best_i = 1;
  double best_g = 0.0;
  for (int i = 1; i < m_grid; ++i) {
    const double g = std::abs(e[static_cast<std::size_t>(i) + 1] -
                              e[static_cast<std::size_t>(i) - 1]) /
                     (2.0 * dk);
    if (g > best_g) {
      best_g = g;
      best_i = i;
    }
  }
  const double h = dk / 4.0;
  auto objective = [&](double k) { return std::abs(fd_derivative(f, k, h)); };
  const double lo = std::max(0.0, (best_i - 2) * dk);
  const double hi = std::min(pi, (best_i + 2) * dk);
  auto [v, km] = golden_max(objective, lo, hi, 1e-10);
  if (v < best_g) return {best_g, best_i * dk};
  return {v, km};
}

}  // namespace detail

struct DispersionResult {
  Eigen::VectorXd k;       // sample momenta
  Eigen::VectorXd energy;  // E(k) at the samples
  double v_max = 0.0;
  double k_at_vmax = 0.0;
  bool divergence_warning = false;  // alpha <= 2: v_max is grid-limited
  double grid_scale = 0.0;          // spacing of the derivative scan grid
  double tail_bound = 0.0;          // analytic mode: bracket on the truncated tail
};

// Ring dispersion on the N allowed momenta k_m = 2 pi m / N. Minimal-image
// couplings: distances to floor((N-1)/2) appear twice, N/2 once on even rings.
inline DispersionResult dispersion_vmax(const CouplingModel& model, int n) {
  if (n < 3) throw std::invalid_argument("xy: dispersion needs N >= 3");
  const int d_half = (n - 1) / 2;
  const int d_even = (n % 2 == 0) ? n / 2 : 0;
  detail::FourierEnergy f;
  f.w.resize(static_cast<std::size_t>(d_even > 0 ? d_even : d_half), 0.0);
  for (int d = 1; d <= d_half; ++d)
    f.w[static_cast<std::size_t>(d) - 1] =
        2.0 * coupling_at_distance(static_cast<double>(d), model.alpha);
  if (d_even > 0)
    f.w[static_cast<std::size_t>(d_even) - 1] =
        coupling_at_distance(static_cast<double>(d_even), model.alpha);

  DispersionResult out;
  out.k.resize(n);
  out.energy.resize(n);
  for (int m = 0; m < n; ++m) {
    out.k(m) = 2.0 * std::numbers::pi * m / n;
    out.energy(m) = f(out.k(m));
  }
  const int m_grid = std::max(4096, 8 * static_cast<int>(f.w.size()));
  auto [v, km] = detail::vmax_search(f, m_grid);
  out.v_max = v;
  out.k_at_vmax = km;
  out.grid_scale = std::numbers::pi / m_grid;
  out.divergence_warning = !model.alpha.is_infinite() && model.alpha.value() <= 2.0;
  return out;
}

// Infinite-lattice dispersion on a dense [0, pi] grid. The sum is truncated
// where the integral tail bound drops below 1e-8 (capped at d_max) and the
// achieved bracket is reported.
inline DispersionResult dispersion_vmax_analytic(const Alpha& alpha, int n_grid = 2048,
                                                 int d_max = 50000) {
  if (n_grid < 16) throw std::invalid_argument("xy: analytic grid too coarse");
  detail::FourierEnergy f;
  double tail = 0.0;
  if (alpha.is_infinite()) {
    f.w = {2.0};
  } else {
    const double a = alpha.value();
    int d_cut = d_max;
    for (int d = 16; d <= d_max; d *= 2) {
      if (2.0 * std::pow(static_cast<double>(d), 1.0 - a) / (a - 1.0) <= 1e-8) {
        d_cut = d;
        break;
      }
    }
    f.w.resize(static_cast<std::size_t>(d_cut));
    for (int d = 1; d <= d_cut; ++d)
      f.w[static_cast<std::size_t>(d) - 1] = 2.0 * std::pow(static_cast<double>(d), -a);
    tail = 2.0 * std::pow(static_cast<double>(d_cut), 1.0 - a) / (a - 1.0);
  }

  DispersionResult out;
  out.k.resize(n_grid + 1);
  out.energy.resize(n_grid + 1);
  for (int i = 0; i <= n_grid; ++i) {
    out.k(i) = std::numbers::pi * i / n_grid;
    out.energy(i) = f(out.k(i));
  }
  const int m_grid = n_grid;
  auto [v, km] = detail::vmax_search(f, m_grid);
  out.v_max = v;
  out.k_at_vmax = km;
  out.grid_scale = std::numbers::pi / m_grid;
  out.divergence_warning = !alpha.is_infinite() && alpha.value() <= 2.0;
  out.tail_bound = tail;
  return out;
}

}  // namespace lrb::xy
