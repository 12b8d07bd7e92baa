#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include <lrb/hopseries.hpp>

using namespace lrb;

namespace {

CouplingModel open_chain(double a, int n) {
  return CouplingModel(Alpha(a), Geometry::finite(n, Boundary::open));
}

}  // namespace

TEST_SUITE("hopseries") {

TEST_CASE("coupling matrix basics") {
  Eigen::MatrixXd m = coupling_matrix(open_chain(2.0, 4));
  CHECK(m(0, 0) == 1.0);
  CHECK(m(1, 1) == 1.0);
  CHECK(m(0, 2) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(m(0, 3) == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
  CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(coupling_matrix(CouplingModel(Alpha(2.0), Geometry::infinite())),
                  std::invalid_argument);
}

TEST_CASE("exact_jn three-site enumeration") {
  // n=2, i=0, j=2, alpha=2, N=3 open: 1*(1/4) + 1*1 + (1/4)*1 = 1.5
  CHECK(exact_jn({0, 2, 2, open_chain(2.0, 3)}) == doctest::Approx(1.5).epsilon(1e-15));
  // n=1 is the bare coupling
  CHECK(exact_jn({0, 2, 1, open_chain(3.0, 8)}) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK_THROWS_AS(exact_jn({0, 2, 0, open_chain(2.0, 3)}), std::invalid_argument);
}

TEST_CASE("exact_jn brute force cross-check") {
  // n=3 on N=51: independent triple loop over (k1, k2)
  CouplingModel model = open_chain(3.0, 51);
  Eigen::MatrixXd m = coupling_matrix(model);
  double brute = 0.0;
  for (int k1 = 0; k1 < 51; ++k1)
    for (int k2 = 0; k2 < 51; ++k2) brute += m(0, k1) * m(k1, k2) * m(k2, 5);
  double fast = exact_jn({0, 5, 3, model});
  CHECK(fast == doctest::Approx(brute).epsilon(1e-12));
}

TEST_CASE("exact_jn window convergence") {
  // doubling the window moves J_3(0,5) by well under 1%
  double a = exact_jn({0, 5, 3, open_chain(3.0, 51)});
  double b = exact_jn({0, 5, 3, open_chain(3.0, 102)});
  CHECK(std::abs(b - a) / b < 0.01);
}

TEST_CASE("exact_jn symmetry and composition") {
  CouplingModel model = open_chain(3.0, 20);
  Eigen::MatrixXd m = coupling_matrix(model);
  CHECK(exact_jn({2, 11, 4, model}) == doctest::Approx(exact_jn({11, 2, 4, model})).epsilon(1e-12));
  // Chapman-Kolmogorov: J_5(i,j) = sum_k J_2(i,k) J_3(k,j)
  Eigen::VectorXd j2 = exact_jn_row(m, 3, 2);
  Eigen::VectorXd j3 = exact_jn_row(m, 14, 3);
  double composed = j2.dot(j3);
  CHECK(exact_jn({3, 14, 5, model}) == doctest::Approx(composed).epsilon(1e-10));
}

TEST_CASE("bound formulas") {
  double lam2 = lambda(CouplingModel(Alpha(2.0), Geometry::infinite())).value;
  // n=2, r=4, alpha=2: (2 lam 2^2) / 4^2
  CHECK(hk_jn_bound(2, 4, lam2, Alpha(2.0)) ==
        doctest::Approx(2.0 * lam2 * 4.0 / 16.0).epsilon(1e-15));
  CHECK(hk_jn_bound(2, 4, lam2, Alpha(2.0)) == doctest::Approx(2.1449).epsilon(1e-4));
  CHECK(hk_jn_bound(1, 7, lam2, Alpha(2.0)) == doctest::Approx(1.0 / 49.0).epsilon(1e-15));
  CHECK_THROWS_AS(hk_jn_bound(2, 4, 3.0, Alpha::infinite()), std::invalid_argument);

  double lam3 = lambda(CouplingModel(Alpha(3.0), Geometry::infinite())).value;
  CHECK(new_jn_bound(3, 10, lam3, Alpha(3.0)) ==
        doctest::Approx(std::pow(12.0 * lam3, 2) / 512.0).epsilon(1e-15));
  CHECK(new_jn_bound(1, 10, lam3, Alpha(3.0)) == doctest::Approx(1e-3).epsilon(1e-15));
  CHECK(new_jn_bound(5, 5, lam3, Alpha(3.0)) ==
        doctest::Approx(std::pow(12.0 * lam3, 4)).epsilon(1e-15));
  CHECK_THROWS_AS(new_jn_bound(6, 5, lam3, Alpha(3.0)), std::invalid_argument);
  // nearest-neighbor sentinel: zero unless the shifted distance hits 1
  CHECK(new_jn_bound(3, 10, 3.0, Alpha::infinite()) == 0.0);
  CHECK(new_jn_bound(10, 10, 3.0, Alpha::infinite()) ==
        doctest::Approx(std::pow(36.0, 9)).epsilon(1e-15));

  CHECK(trivial_jn_bound(1, 3.0) == 1.0);
  CHECK(trivial_jn_bound(4, 3.0) == 27.0);
}

TEST_CASE("exact_jn dominated by all three bounds") {
  for (double a : {2.0, 6.0}) {
    CouplingModel model = open_chain(a, 101);
    Eigen::MatrixXd m = coupling_matrix(model);
    double lam = lambda(model).value;
    int i = 30;  // interior seed, distances up to 12
    Eigen::VectorXd row = Eigen::VectorXd::Zero(101);
    row(i) = 1.0;
    for (int n = 1; n <= 4; ++n) {
      row = m * row;
      for (int r = 1; r <= 12; ++r) {
        double v = row(i + r);
        CHECK(v <= hk_jn_bound(n, r, lam, model.alpha));
        if (n <= r) CHECK(v <= new_jn_bound(n, r, lam, model.alpha));
        CHECK(v <= trivial_jn_bound(n, lam));
      }
    }
  }
}

TEST_CASE("trivial bound sweep at n=5") {
  CouplingModel model = open_chain(2.0, 101);
  Eigen::MatrixXd m = coupling_matrix(model);
  double lam = lambda(model).value;
  Eigen::VectorXd j5 = exact_jn_row(m, 50, 5);
  CHECK(j5.maxCoeff() <= trivial_jn_bound(5, lam));
  // growth consistent with the finite-lattice row max
  double lam_fin = lambda(model, LambdaMode::finite_row_max).value;
  CHECK(j5.sum() <= std::pow(lam_fin, 5) * (1.0 + 1e-12));
}

TEST_CASE("verify_reproducibility passes") {
  for (double a : {1.5, 3.0}) {
    ReproReport rep = verify_reproducibility(open_chain(a, 101), 20);
    CHECK(rep.all_pass);
    CHECK(rep.worst_ratio <= 1.0);
    CHECK(!rep.checks.empty());
  }
  // nearest-neighbor limit: only the near-field form applies, lambda = 3
  ReproReport nn = verify_reproducibility(
      CouplingModel(Alpha::infinite(), Geometry::finite(101, Boundary::open)), 20);
  CHECK(nn.all_pass);
  for (const auto& c : nn.checks) CHECK(c.check == "two_hop_near");
  // periodic geometry
  ReproReport ring = verify_reproducibility(
      CouplingModel(Alpha(2.0), Geometry::finite(64, Boundary::periodic)), 20);
  CHECK(ring.all_pass);
}

TEST_CASE("verify_jn_bounds passes") {
  ReproReport rep = verify_jn_bounds(open_chain(3.0, 101), 12, 4);
  CHECK(rep.all_pass);
  CHECK(rep.worst_ratio <= 1.0);
  ReproReport nn = verify_jn_bounds(
      CouplingModel(Alpha::infinite(), Geometry::finite(101, Boundary::open)), 12, 4);
  CHECK(nn.all_pass);
}

}  // TEST_SUITE
