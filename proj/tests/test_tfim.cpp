#include <complex>
#include <random>
#include <vector>

#include <doctest.h>

#include "lrb/couplings.hpp"
#include "lrb/ed.hpp"
#include "lrb/tfim.hpp"

using namespace lrb;
using tfim::Complex;

namespace {

tfim::TFIMScenario scenario(double a, int n, double b_z, std::vector<double> times,
                            Boundary b = Boundary::open) {
  return {CouplingModel(Alpha(a), Geometry::finite(n, b)), b_z, 0, std::move(times)};
}

Eigen::VectorXcd random_state(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(Eigen::Index(1) << n);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Complex(g(rng), g(rng));
  return v / v.norm();
}

}  // namespace

TEST_SUITE("tfim") {

TEST_CASE("apply on the two-site chain") {
  auto sc = scenario(3.0, 2, 0.5, {});
  Eigen::VectorXcd out = tfim::apply_hamiltonian(tfim::all_down_state(2), sc);
  CHECK(std::abs(out(0) - Complex(1.0, 0.0)) < 1e-15);   // J_01 |up up>
  CHECK(std::abs(out(3) - Complex(-1.0, 0.0)) < 1e-15);  // -2 B_z |down down>
  CHECK(std::abs(out(1)) + std::abs(out(2)) < 1e-15);
}

TEST_CASE("apply is hermitian") {
  auto sc = scenario(2.5, 8, 0.5, {});
  tfim::TfimHamiltonian h(sc);
  Eigen::VectorXcd u = random_state(8, 11);
  Eigen::VectorXcd v = random_state(8, 22);
  const Complex uv = u.dot(h.apply(v));
  const Complex vu = v.dot(h.apply(u));
  CHECK(std::abs(uv - std::conj(vu)) < 1e-12);
}

TEST_CASE("apply matches the dense hamiltonian") {
  for (Boundary b : {Boundary::open, Boundary::periodic}) {
    const int n = (b == Boundary::open) ? 8 : 6;
    auto sc = scenario(2.5, n, 0.5, {}, b);
    ed::DenseModelSpec spec{ed::ModelKind::tfim, sc.model, sc.b_z};
    Eigen::MatrixXcd hd = ed::build_dense_hamiltonian(spec);
    Eigen::VectorXcd v = random_state(n, 7);
    Eigen::VectorXcd diff = tfim::apply_hamiltonian(v, sc) - hd * v;
    CHECK(diff.cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("state length is checked") {
  auto sc = scenario(3.0, 4, 0.5, {});
  Eigen::VectorXcd wrong = Eigen::VectorXcd::Zero(8);
  CHECK_THROWS_AS(tfim::apply_hamiltonian(wrong, sc), std::invalid_argument);
}

TEST_CASE("quench unitary matches the dense one") {
  const int n = 6;
  Eigen::VectorXcd v = random_state(n, 3);
  Eigen::VectorXcd dense = ed::quench_unitary(n, 0) * v;
  Eigen::VectorXcd fast = tfim::apply_quench(v, 0, n);
  CHECK((dense - fast).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("krylov identity at t=0 and norm preservation") {
  auto sc = scenario(3.0, 8, 0.5, {});
  tfim::TfimHamiltonian h(sc);
  Eigen::VectorXcd v = tfim::apply_quench(tfim::all_down_state(8), 0, 8);
  tfim::KrylovConfig cfg;
  Eigen::VectorXcd same = tfim::krylov_evolve(v, 0.0, cfg, h);
  CHECK((same - v).cwiseAbs().maxCoeff() == 0.0);
  Eigen::VectorXcd w = tfim::krylov_evolve(v, 1.3, cfg, h);
  CHECK(std::abs(w.norm() - 1.0) < 1e-10);
}

TEST_CASE("krylov matches dense evolution") {
  const int n = 10;
  auto sc = scenario(3.0, n, 0.5, {});
  ed::DenseModelSpec spec{ed::ModelKind::tfim, sc.model, sc.b_z};
  ed::DenseEvolver dense(ed::build_dense_hamiltonian(spec));
  Eigen::VectorXcd v0 = tfim::apply_quench(tfim::all_down_state(n), 0, n);
  Eigen::VectorXcd exact = dense.evolve(v0, 1.0);
  tfim::KrylovStats stats;
  Eigen::VectorXcd kry = tfim::krylov_evolve(v0, 1.0, {}, tfim::TfimHamiltonian(sc), &stats);
  CHECK((exact - kry).norm() < 1e-8);
  CHECK(stats.steps >= 20);
  CHECK(stats.worst_residual < 1e-10);
}

TEST_CASE("krylov is stable under dt halving and m growth") {
  auto sc = scenario(3.0, 8, 0.5, {});
  tfim::TfimHamiltonian h(sc);
  Eigen::VectorXcd v0 = tfim::apply_quench(tfim::all_down_state(8), 0, 8);
  tfim::KrylovConfig base;
  tfim::KrylovConfig half = base;
  half.dt /= 2.0;
  tfim::KrylovConfig wide = base;
  wide.m += 10;
  Eigen::VectorXcd a = tfim::krylov_evolve(v0, 1.0, base, h);
  CHECK((a - tfim::krylov_evolve(v0, 1.0, half, h)).norm() < 1e-8);
  CHECK((a - tfim::krylov_evolve(v0, 1.0, wide, h)).norm() < 1e-8);
}

TEST_CASE("energy is conserved along the trajectory") {
  auto sc = scenario(3.0, 8, 0.5, {0.25, 0.5, 1.0, 2.0});
  tfim::QrtTfimResult res = tfim::qrt_tfim(sc);
  CHECK(res.max_energy_drift < 1e-8);
  CHECK(res.max_norm_error < 1e-10);
}

TEST_CASE("qrt vanishes at t=0 and stays in range") {
  auto sc = scenario(3.0, 8, 0.5, {0.0, 0.6, 1.4});
  tfim::QrtTfimResult res = tfim::qrt_tfim(sc);
  for (int j = 1; j < 8; ++j) CHECK(res.q(0, j) < 1e-12);
  for (Eigen::Index ti = 0; ti < res.q.rows(); ++ti)
    for (int j = 0; j < 8; ++j) {
      CHECK(res.q(ti, j) >= 0.0);
      CHECK(res.q(ti, j) <= 1.0);
    }
  CHECK(res.max_unquenched_sx < 1e-9);
}

TEST_CASE("qrt matches the dense oracle") {
  const int n = 10;
  auto sc = scenario(6.0, n, 0.5, {1.0});
  tfim::QrtTfimResult res = tfim::qrt_tfim(sc);
  ed::DenseModelSpec spec{ed::ModelKind::tfim, sc.model, sc.b_z};
  ed::DenseEvolver dense(ed::build_dense_hamiltonian(spec));
  Eigen::MatrixXcd u = ed::quench_unitary(n, 0);
  Eigen::VectorXcd psi = ed::all_down_state(n);
  for (int r = 0; r < n; ++r) {
    auto qe = ed::qrt_dense(dense, u, ed::site_operator(ed::pauli_x(), r, n), psi,
                            sc.times);
    CHECK(res.q(0, r) == doctest::Approx(qe[0]).epsilon(1e-8).scale(1.0));
  }
}

TEST_CASE("nearest-neighbor limit matches the dense oracle") {
  const int n = 10;
  tfim::TFIMScenario sc{CouplingModel(Alpha::infinite(), Geometry::finite(n, Boundary::open)),
                        0.5, 0, {0.7}};
  tfim::QrtTfimResult res = tfim::qrt_tfim(sc);
  ed::DenseModelSpec spec{ed::ModelKind::tfim, sc.model, sc.b_z};
  ed::DenseEvolver dense(ed::build_dense_hamiltonian(spec));
  Eigen::MatrixXcd u = ed::quench_unitary(n, 0);
  Eigen::VectorXcd psi = ed::all_down_state(n);
  for (int r : {1, 2, 5, 9}) {
    auto qe = ed::qrt_dense(dense, u, ed::site_operator(ed::pauli_x(), r, n), psi,
                            sc.times);
    CHECK(res.q(0, r) == doctest::Approx(qe[0]).epsilon(1e-8).scale(1.0));
  }
}

TEST_CASE("memory budget and size limits") {
  auto sc = scenario(3.0, 8, 0.5, {0.5});
  tfim::KrylovConfig tiny;
  tiny.memory_budget_bytes = 1024;
  CHECK_THROWS_AS(tfim::qrt_tfim(sc, tiny), std::invalid_argument);
  auto big = scenario(3.0, 27, 0.5, {0.5});
  CHECK_THROWS_AS(tfim::validate(big), std::invalid_argument);

  tfim::KrylovConfig bad;
  bad.m = 1;
  CHECK_THROWS_AS(tfim::qrt_tfim(sc, bad), std::invalid_argument);
}

TEST_CASE("abort after repeated halvings") {
  auto sc = scenario(3.0, 6, 0.5, {});
  tfim::TfimHamiltonian h(sc);
  Eigen::VectorXcd v0 = tfim::apply_quench(tfim::all_down_state(6), 0, 6);
  tfim::KrylovConfig cfg;
  cfg.m = 2;
  cfg.dt = 5.0;
  cfg.tol = 1e-14;
  CHECK_THROWS_AS(tfim::krylov_evolve(v0, 5.0, cfg, h), std::runtime_error);
}

}  // TEST_SUITE
