#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lrb/couplings.hpp"

// Long-range transverse-field Ising chain on the full 2^N space, evolved
// matrix-free with a Lanczos (Krylov) propagator. Basis: bit i of the index
// is site i (little endian), bit set means sigma^z = -1 (down); the all-down
// state is index 2^N - 1.

namespace lrb::tfim {

using Complex = std::complex<double>;

constexpr int kMaxTfimSites = 26;

struct TFIMScenario {
  CouplingModel model;  // finite geometry; open boundary in the reference setup
  double b_z = 0.5;
  int quench_site = 0;
  std::vector<double> times;  // sorted ascending, all >= 0
};

inline void validate(const TFIMScenario& sc) {
  const Geometry& g = sc.model.geometry;
  if (g.is_infinite()) throw std::invalid_argument("tfim: need a finite chain");
  if (g.n > kMaxTfimSites) throw std::invalid_argument("tfim: N <= 26");
  if (sc.quench_site < 0 || sc.quench_site >= g.n)
    throw std::out_of_range("tfim: quench site outside chain");
  double prev = 0.0;
  for (double t : sc.times) {
    if (!(t >= prev))
      throw std::invalid_argument("tfim: times must be ascending and nonnegative");
    prev = t;
  }
}

struct KrylovConfig {
  int m = 30;
  double dt = 0.05;
  double tol = 1e-10;
  std::uint64_t memory_budget_bytes = 8ull << 30;
};

inline void validate(const KrylovConfig& cfg) {
  if (cfg.m < 2) throw std::invalid_argument("krylov: m >= 2");
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("krylov: dt > 0");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("krylov: tol > 0");
}

// Bond list plus the diagonal field term; the Hamiltonian matrix is never
// materialized. sigma^x sigma^x on (i, j) maps index b to b ^ mask.
class TfimHamiltonian {
 public:
  explicit TfimHamiltonian(const TFIMScenario& sc) : n_(sc.model.geometry.n), b_z_(sc.b_z) {
    validate(sc);
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j) {
        const double w = coupling(i, j, sc.model);
        if (w != 0.0) bonds_.push_back({(1u << i) | (1u << j), 1u << j, w});
      }
  }

  int sites() const { return n_; }
  Eigen::Index dim() const { return Eigen::Index(1) << n_; }

  void apply(const Eigen::VectorXcd& v, Eigen::VectorXcd& out) const {
    if (v.size() != dim()) throw std::invalid_argument("tfim: state length != 2^N");
    out.resize(dim());
    const std::uint32_t size = 1u << n_;
    for (std::uint32_t b = 0; b < size; ++b)
      out(b) = b_z_ * (n_ - 2 * std::popcount(b)) * v(b);
    for (const Bond& bond : bonds_) {
      // enumerate each flip pair once, keyed by its lower index
      for (std::uint32_t b = 0; b < size; ++b) {
        if (b & bond.high_bit) continue;
        const std::uint32_t p = b ^ bond.mask;
        out(b) += bond.weight * v(p);
        out(p) += bond.weight * v(b);
      }
    }
  }

  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const {
    Eigen::VectorXcd out;
    apply(v, out);
    return out;
  }

  double energy(const Eigen::VectorXcd& v) const { return v.dot(apply(v)).real(); }

 private:
  struct Bond {
    std::uint32_t mask;
    std::uint32_t high_bit;
    double weight;
  };
  int n_;
  double b_z_;
  std::vector<Bond> bonds_;
};

inline Eigen::VectorXcd apply_hamiltonian(const Eigen::VectorXcd& state,
                                          const TFIMScenario& sc) {
  return TfimHamiltonian(sc).apply(state);
}

inline Eigen::VectorXcd all_down_state(int n) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(Eigen::Index(1) << n);
  v((Eigen::Index(1) << n) - 1) = 1.0;
  return v;
}

// U = exp(i pi sigma^y / 4) on one site: new_up = (up + down)/sqrt(2),
// new_down = (down - up)/sqrt(2)
inline Eigen::VectorXcd apply_quench(const Eigen::VectorXcd& v, int site, int n) {
  const std::uint32_t size = 1u << n;
  const std::uint32_t bit = 1u << site;
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::VectorXcd out(v.size());
  for (std::uint32_t b = 0; b < size; ++b) {
    if (b & bit) continue;
    const Complex up = v(b);
    const Complex dn = v(b | bit);
    out(b) = s * (up + dn);
    out(b | bit) = s * (dn - up);
  }
  return out;
}

inline double sigma_x_expectation(const Eigen::VectorXcd& v, int site) {
  const auto size = static_cast<std::uint32_t>(v.size());
  const std::uint32_t bit = 1u << site;
  if (site < 0 || bit >= size) throw std::out_of_range("tfim: site outside chain");
  double e = 0.0;
  for (std::uint32_t b = 0; b < size; ++b)
    e += (std::conj(v(b)) * v(b ^ bit)).real();
  return e;
}

struct KrylovStats {
  long steps = 0;
  long halvings = 0;
  double worst_residual = 0.0;
};

namespace detail {

inline void check_memory_budget(Eigen::Index dim, const KrylovConfig& cfg) {
  const std::uint64_t need =
      static_cast<std::uint64_t>(cfg.m + 4) * static_cast<std::uint64_t>(dim) * 16u;
  if (need > cfg.memory_budget_bytes) {
    std::ostringstream msg;
    msg << "krylov: need ~" << need << " bytes ((m+4) * 2^N * 16), budget "
        << cfg.memory_budget_bytes;
    throw std::invalid_argument(msg.str());
  }
}

// One Lanczos step: w ~ exp(-i H dt) v, plus the standard residual
// indicator beta_m |u_m|.
inline std::pair<Eigen::VectorXcd, double> lanczos_step(const TfimHamiltonian& h,
                                                        const Eigen::VectorXcd& v,
                                                        double dt,
                                                        const KrylovConfig& cfg) {
  const Eigen::Index dim = v.size();
  const int m = cfg.m;
  const double beta0 = v.norm();
  if (beta0 == 0.0) return {v, 0.0};

  Eigen::MatrixXcd basis(dim, m + 1);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m + 1);
  basis.col(0) = v / beta0;

  int k_eff = m;
  double beta_last = 0.0;
  Eigen::VectorXcd w(dim);
  for (int k = 0; k < m; ++k) {
    h.apply(basis.col(k), w);
    if (k > 0) w -= b(k) * basis.col(k - 1);
    a(k) = basis.col(k).dot(w).real();
    w -= a(k) * basis.col(k);
    // full reorthogonalization
    for (int l = 0; l <= k; ++l) w -= basis.col(l).dot(w) * basis.col(l);
    b(k + 1) = w.norm();
    if (b(k + 1) < 1e-14) {  // happy breakdown: the subspace is invariant
      k_eff = k + 1;
      beta_last = 0.0;
      break;
    }
    beta_last = b(k + 1);
    if (k + 1 < m) basis.col(k + 1) = w / b(k + 1);
  }

  Eigen::MatrixXd tmat = Eigen::MatrixXd::Zero(k_eff, k_eff);
  for (int k = 0; k < k_eff; ++k) {
    tmat(k, k) = a(k);
    if (k + 1 < k_eff) {
      tmat(k, k + 1) = b(k + 1);
      tmat(k + 1, k) = b(k + 1);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tmat);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("krylov: tridiagonal eigendecomposition failed");
  Eigen::VectorXcd phases(k_eff);
  for (int k = 0; k < k_eff; ++k)
    phases(k) = std::exp(Complex(0.0, -es.eigenvalues()(k) * dt));
  const Eigen::VectorXd e1 = es.eigenvectors().row(0).transpose();
  Eigen::VectorXcd u = es.eigenvectors() * (phases.array() * e1.array()).matrix();

  const double residual = beta_last * std::abs(u(k_eff - 1));
  return {beta0 * (basis.leftCols(k_eff) * u), residual};
}

inline Eigen::VectorXcd evolve_adaptive(const TfimHamiltonian& h, Eigen::VectorXcd v,
                                        double dt, const KrylovConfig& cfg, int depth,
                                        KrylovStats* stats) {
  auto [w, residual] = lanczos_step(h, v, dt, cfg);
  if (residual < cfg.tol) {
    if (stats) {
      ++stats->steps;
      stats->worst_residual = std::max(stats->worst_residual, residual);
    }
    return w;
  }
  if (depth >= 10) {
    std::ostringstream msg;
    msg << "krylov: no convergence after 10 halvings (N=" << h.sites()
        << ", m=" << cfg.m << ", dt=" << dt << ", residual=" << residual
        << ", tol=" << cfg.tol << ")";
    throw std::runtime_error(msg.str());
  }
  if (stats) ++stats->halvings;
  v = evolve_adaptive(h, std::move(v), dt / 2.0, cfg, depth + 1, stats);
  return evolve_adaptive(h, std::move(v), dt / 2.0, cfg, depth + 1, stats);
}

}  // namespace detail

inline Eigen::VectorXcd krylov_evolve(const Eigen::VectorXcd& state, double t_step,
                                      const KrylovConfig& cfg, const TfimHamiltonian& h,
                                      KrylovStats* stats = nullptr) {
  validate(cfg);
  if (state.size() != h.dim()) throw std::invalid_argument("tfim: state length != 2^N");
  if (!(t_step >= 0.0)) throw std::invalid_argument("krylov: t_step >= 0");
  detail::check_memory_budget(h.dim(), cfg);
  if (t_step == 0.0) return state;
  const int n_sub = static_cast<int>(std::ceil(t_step / cfg.dt));
  const double dt_sub = t_step / n_sub;
  Eigen::VectorXcd v = state;
  for (int s = 0; s < n_sub; ++s)
    v = detail::evolve_adaptive(h, std::move(v), dt_sub, cfg, 0, stats);
  return v;
}

inline Eigen::VectorXcd krylov_evolve(const Eigen::VectorXcd& state, double t_step,
                                      const KrylovConfig& cfg, const TFIMScenario& sc,
                                      KrylovStats* stats = nullptr) {
  return krylov_evolve(state, t_step, cfg, TfimHamiltonian(sc), stats);
}

struct QrtTfimResult {
  std::vector<double> times;
  Eigen::MatrixXd q;  // rows follow times, column j is the observable site j
  double max_norm_error = 0.0;      // both branches, over the trajectory
  double max_unquenched_sx = 0.0;   // parity says this is 0; asserted, not assumed
  double max_energy_drift = 0.0;    // relative to t = 0
  KrylovStats stats;
};

// March both branches of the quench through the requested times, measuring
// <sigma_j^x> on every site.
inline QrtTfimResult qrt_tfim(const TFIMScenario& sc, const KrylovConfig& cfg = {}) {
  validate(sc);
  validate(cfg);
  const int n = sc.model.geometry.n;
  TfimHamiltonian h(sc);
  detail::check_memory_budget(h.dim(), cfg);

  Eigen::VectorXcd unquenched = all_down_state(n);
  Eigen::VectorXcd quenched = apply_quench(unquenched, sc.quench_site, n);
  const double e_q0 = h.energy(quenched);
  const double e_u0 = h.energy(unquenched);

  QrtTfimResult out;
  out.times = sc.times;
  out.q.resize(static_cast<Eigen::Index>(sc.times.size()), n);
  double now = 0.0;
  for (std::size_t ti = 0; ti < sc.times.size(); ++ti) {
    const double step = sc.times[ti] - now;
    if (step > 0.0) {
      quenched = krylov_evolve(quenched, step, cfg, h, &out.stats);
      unquenched = krylov_evolve(unquenched, step, cfg, h, &out.stats);
      now = sc.times[ti];
    }
    out.max_norm_error = std::max({out.max_norm_error,
                                   std::abs(quenched.norm() - 1.0),
                                   std::abs(unquenched.norm() - 1.0)});
    out.max_energy_drift = std::max(
        {out.max_energy_drift,
         std::abs(h.energy(quenched) - e_q0) / std::max(1.0, std::abs(e_q0)),
         std::abs(h.energy(unquenched) - e_u0) / std::max(1.0, std::abs(e_u0))});
    for (int j = 0; j < n; ++j) {
      const double sx_q = sigma_x_expectation(quenched, j);
      const double sx_u = sigma_x_expectation(unquenched, j);
      out.max_unquenched_sx = std::max(out.max_unquenched_sx, std::abs(sx_u));
      out.q(static_cast<Eigen::Index>(ti), j) = 0.5 * std::abs(sx_q - sx_u);
    }
  }
  return out;
}

}  // namespace lrb::tfim
