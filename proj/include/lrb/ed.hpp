#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lrb/couplings.hpp"

// Dense exact-diagonalization oracle for N <= 12: explicit Pauli tensor
// products and full eigendecomposition evolution, with no model-specific
// shortcuts. Everything downstream is certified against this.
//
// Basis convention: index b in [0, 2^N), bit i of b is site i (little
// endian), bit set means sigma^z = -1 (down). The all-down product state
// is index 2^N - 1.

namespace lrb::ed {

using Complex = std::complex<double>;

constexpr int kMaxDenseSites = 12;

inline void check_dense_budget(int n) {
  if (n < 1) throw std::invalid_argument("ed: need at least one site");
  if (n > kMaxDenseSites)
    throw std::invalid_argument("ed: dense budget is N <= 12");
}

enum class ModelKind { xy, tfim };
enum class Axis { x, y };

struct DenseModelSpec {
  ModelKind kind = ModelKind::xy;
  CouplingModel model;  // finite geometry; carries N and the boundary
  double b_z = 0.0;     // tfim only

  int sites() const { return model.geometry.n; }
};

inline Eigen::Matrix2cd pauli_x() {
  Eigen::Matrix2cd m;
  m << 0, 1, 1, 0;
  return m;
}

inline Eigen::Matrix2cd pauli_y() {
  Eigen::Matrix2cd m;
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

inline Eigen::Matrix2cd pauli_z() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, -1;
  return m;
}

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Tensor product with the given local operators and identity elsewhere.
// Accumulating from site N-1 down to site 0 puts site i on bit i.
inline Eigen::MatrixXcd pauli_string(
    int n, const std::vector<std::pair<int, Eigen::Matrix2cd>>& ops) {
  check_dense_budget(n);
  for (const auto& [site, op] : ops)
    if (site < 0 || site >= n) throw std::out_of_range("ed: site outside chain");
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Identity(1, 1);
  for (int i = n - 1; i >= 0; --i) {
    Eigen::Matrix2cd local = Eigen::Matrix2cd::Identity();
    for (const auto& [site, op] : ops)
      if (site == i) local = op * local;
    acc = kron(acc, local);
  }
  return acc;
}

inline Eigen::MatrixXcd site_operator(const Eigen::Matrix2cd& op, int site, int n) {
  return pauli_string(n, {{site, op}});
}

inline Eigen::MatrixXcd build_dense_hamiltonian(const DenseModelSpec& spec) {
  const int n = spec.sites();
  check_dense_budget(n);
  const Eigen::Index dim = Eigen::Index(1) << n;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double jij = coupling(i, j, spec.model);
      if (jij == 0.0) continue;
      if (spec.kind == ModelKind::xy) {
        h += (0.5 * jij) * (pauli_string(n, {{i, pauli_x()}, {j, pauli_x()}}) +
                            pauli_string(n, {{i, pauli_y()}, {j, pauli_y()}}));
      } else {
        h += jij * pauli_string(n, {{i, pauli_x()}, {j, pauli_x()}});
      }
    }
  }
  if (spec.kind == ModelKind::tfim && spec.b_z != 0.0)
    for (int i = 0; i < n; ++i) h += spec.b_z * site_operator(pauli_z(), i, n);
  return h;
}

// exp(i pi sigma^y / 4): maps |down> to (|down> + |up>)/sqrt(2)
inline Eigen::Matrix2cd quench_unitary_local() {
  const double c = std::cos(std::numbers::pi / 4.0);
  const double s = std::sin(std::numbers::pi / 4.0);
  Eigen::Matrix2cd u;
  u << c, s, -s, c;
  return u;
}

inline Eigen::MatrixXcd quench_unitary(int n, int site = 0) {
  return site_operator(quench_unitary_local(), site, n);
}

inline Eigen::VectorXcd all_down_state(int n) {
  check_dense_budget(n);
  const Eigen::Index dim = Eigen::Index(1) << n;
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
  v(dim - 1) = 1.0;
  return v;
}

class DenseEvolver {
 public:
  explicit DenseEvolver(const Eigen::MatrixXcd& h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("ed: eigendecomposition failed");
    vecs_ = es.eigenvectors();
    vals_ = es.eigenvalues();
  }

  // exp(-i H t) state
  Eigen::VectorXcd evolve(const Eigen::VectorXcd& state, double t) const {
    Eigen::VectorXcd coeff = vecs_.adjoint() * state;
    Eigen::ArrayXcd phases = (vals_.array().cast<Complex>() * Complex(0.0, -t)).exp();
    return vecs_ * (phases * coeff.array()).matrix();
  }

  double residual_max(const Eigen::MatrixXcd& h) const {
    return (h * vecs_ - vecs_ * vals_.asDiagonal()).cwiseAbs().maxCoeff();
  }

  const Eigen::VectorXd& eigenvalues() const { return vals_; }

 private:
  Eigen::MatrixXcd vecs_;
  Eigen::VectorXd vals_;
};

// Q(t) = |<psi|U' A(t) U|psi> - <psi|A(t)|psi>| / 2, evaluated literally.
inline std::vector<double> qrt_dense(const DenseEvolver& ev,
                                     const Eigen::MatrixXcd& u,
                                     const Eigen::MatrixXcd& a,
                                     const Eigen::VectorXcd& psi,
                                     const std::vector<double>& times) {
  const Eigen::VectorXcd quenched = u * psi;
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    if (!(t >= 0.0)) throw std::invalid_argument("ed: time must be >= 0");
    Eigen::VectorXcd wq = ev.evolve(quenched, t);
    Eigen::VectorXcd wu = ev.evolve(psi, t);
    const Complex q = wq.dot(a * wq);
    const Complex uq = wu.dot(a * wu);
    out.push_back(0.5 * std::abs(q - uq));
  }
  return out;
}

inline std::vector<double> qrt_dense(const Eigen::MatrixXcd& h,
                                     const Eigen::MatrixXcd& u,
                                     const Eigen::MatrixXcd& a,
                                     const Eigen::VectorXcd& psi,
                                     const std::vector<double>& times) {
  return qrt_dense(DenseEvolver(h), u, a, psi, times);
}

// Quench U on site 0, observable sigma^{x|y} on the given site.
inline std::vector<double> exact_qrt(const DenseModelSpec& spec, int site,
                                     const std::vector<double>& times,
                                     Axis axis = Axis::x) {
  const int n = spec.sites();
  check_dense_budget(n);
  if (site < 0 || site >= n) throw std::out_of_range("ed: observable site outside chain");
  const Eigen::MatrixXcd h = build_dense_hamiltonian(spec);
  const Eigen::MatrixXcd u = quench_unitary(n, 0);
  const Eigen::MatrixXcd a =
      site_operator(axis == Axis::x ? pauli_x() : pauli_y(), site, n);
  return qrt_dense(h, u, a, all_down_state(n), times);
}

// Amplitudes in basis-index order, each as two doubles (re, im).
inline void dump_state(const Eigen::VectorXcd& state, const std::string& path) {
  static_assert(std::endian::native == std::endian::little,
                "state dumps assume a little-endian host");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("ed: cannot open " + path);
  for (Eigen::Index i = 0; i < state.size(); ++i) {
    const double re = state(i).real();
    const double im = state(i).imag();
    out.write(reinterpret_cast<const char*>(&re), sizeof re);
    out.write(reinterpret_cast<const char*>(&im), sizeof im);
  }
  if (!out) throw std::runtime_error("ed: write failed: " + path);
}

}  // namespace lrb::ed
