#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include <lrb/couplings.hpp>

using namespace lrb;

// mpmath, 18 digits
static constexpr double kZeta2 = 1.64493406684822644;   // pi^2/6
static constexpr double kZeta3 = 1.20205690315959429;
static constexpr double kZeta4 = 1.08232323371113819;   // pi^4/90
static constexpr double kZeta6 = 1.01734306198444914;   // pi^6/945
static constexpr double kZeta101 = 100.577943338496872;  // alpha = 1.01
static constexpr double kZeta15 = 2.61237534868548834;   // alpha = 1.5

TEST_SUITE("couplings") {

TEST_CASE("alpha validation and sentinel") {
  CHECK_THROWS_AS(Alpha(1.0), std::invalid_argument);
  CHECK_THROWS_AS(Alpha(0.5), std::invalid_argument);
  CHECK_THROWS_AS(Alpha(-3.0), std::invalid_argument);
  CHECK_NOTHROW(Alpha(1.0000001));
  CHECK(Alpha::infinite().is_infinite());
  CHECK(Alpha(std::numeric_limits<double>::infinity()).is_infinite());
  CHECK(Alpha::parse("inf").is_infinite());
  CHECK(Alpha::parse("2.5").value() == 2.5);
  CHECK_THROWS_AS(Alpha::parse("2.5x"), std::invalid_argument);
  CHECK_THROWS_AS(Alpha::parse("nn"), std::invalid_argument);
}

TEST_CASE("geometry validation") {
  CHECK_THROWS_AS(Geometry::finite(0, Boundary::open), std::invalid_argument);
  CHECK_THROWS_AS(Geometry::finite(2, Boundary::periodic), std::invalid_argument);
  CHECK_NOTHROW(Geometry::finite(3, Boundary::periodic));
  CHECK(Geometry::infinite().is_infinite());
}

TEST_CASE("distance") {
  CHECK(distance(3, 3, Geometry::finite(8, Boundary::open)) == 0);
  CHECK(distance(0, 4, Geometry::finite(6, Boundary::periodic)) == 2);
  CHECK(distance(0, 250, Geometry::finite(501, Boundary::periodic)) == 250);
  CHECK(distance(0, 251, Geometry::finite(501, Boundary::periodic)) == 250);
  CHECK(distance(2, 9, Geometry::infinite()) == 7);
  CHECK_THROWS_AS(distance(0, 8, Geometry::finite(8, Boundary::open)), std::out_of_range);
}

TEST_CASE("coupling values") {
  CouplingModel m3(Alpha(3.0), Geometry::finite(10, Boundary::open));
  CHECK(coupling(0, 2, m3) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(coupling(5, 5, m3) == 1.0);
  CouplingModel mi(Alpha::infinite(), Geometry::finite(10, Boundary::open));
  CHECK(coupling(0, 2, mi) == 0.0);
  CHECK(coupling(0, 1, mi) == 1.0);
  CHECK(coupling(4, 4, mi) == 1.0);
  // minimal image
  CouplingModel mp(Alpha(2.0), Geometry::finite(10, Boundary::periodic));
  CHECK(coupling(0, 7, mp) == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
}

TEST_CASE("coupling symmetry and monotonicity") {
  Geometry g = Geometry::finite(20, Boundary::periodic);
  for (double a : {1.5, 2.0, 3.0, 6.0}) {
    CouplingModel m(Alpha(a), g);
    for (int i = 0; i < 20; i += 3)
      for (int j = 0; j < 20; j += 2) CHECK(coupling(i, j, m) == coupling(j, i, m));
  }
  // nonincreasing in distance at fixed alpha, and in alpha at fixed r >= 2
  for (int r = 1; r < 9; ++r) {
    CHECK(coupling_at_distance(r, Alpha(2.0)) >= coupling_at_distance(r + 1, Alpha(2.0)));
    CHECK(coupling_at_distance(r + 1, Alpha(2.0)) >= coupling_at_distance(r + 1, Alpha(3.0)));
  }
  for (double a : {1.5, 2.0, 50.0}) {
    CHECK(coupling_at_distance(1.0, Alpha(a)) == 1.0);
  }
  CHECK(coupling_at_distance(1.0, Alpha::infinite()) == 1.0);
}

TEST_CASE("site_at_distance") {
  Geometry ring = Geometry::finite(11, Boundary::periodic);
  CHECK(site_at_distance(0, 5, ring) == 5);
  CHECK(site_at_distance(8, 5, ring) == 2);
  CHECK_THROWS_AS(site_at_distance(0, 6, ring), std::out_of_range);
  Geometry line = Geometry::finite(11, Boundary::open);
  CHECK(site_at_distance(0, 10, line) == 10);
  CHECK_THROWS_AS(site_at_distance(3, 8, line), std::out_of_range);
}

TEST_CASE("riemann_zeta against closed forms") {
  CHECK(riemann_zeta(2.0) == doctest::Approx(kZeta2).epsilon(1e-13));
  CHECK(riemann_zeta(3.0) == doctest::Approx(kZeta3).epsilon(1e-13));
  CHECK(riemann_zeta(4.0) == doctest::Approx(kZeta4).epsilon(1e-13));
  CHECK(riemann_zeta(6.0) == doctest::Approx(kZeta6).epsilon(1e-13));
  CHECK(riemann_zeta(1.01) == doctest::Approx(kZeta101).epsilon(1e-12));
  CHECK(riemann_zeta(1.5) == doctest::Approx(kZeta15).epsilon(1e-13));
  CHECK_THROWS_AS(riemann_zeta(1.0), std::invalid_argument);
}

TEST_CASE("lambda infinite lattice") {
  auto lam = [](Alpha a) {
    return lambda(CouplingModel(a, Geometry::infinite())).value;
  };
  CHECK(lam(Alpha::infinite()) == 3.0);
  CHECK(lam(Alpha(2.0)) == doctest::Approx(1.0 + 2.0 * kZeta2).epsilon(1e-13));
  CHECK(lam(Alpha(3.0)) == doctest::Approx(3.40411380631918857).epsilon(1e-13));
  CHECK(lam(Alpha(6.0)) == doctest::Approx(3.03468612396889828).epsilon(1e-13));
  CHECK(std::abs(lam(Alpha(50.0)) - 3.0) < 1e-12);
  // strictly decreasing in alpha, always >= 1
  double prev = lam(Alpha(1.01));
  for (double a : {1.2, 1.5, 2.0, 3.0, 6.0, 12.0, 25.0}) {
    double cur = lam(Alpha(a));
    CHECK(cur < prev);
    CHECK(cur >= 1.0);
    prev = cur;
  }
}

TEST_CASE("lambda finite row max") {
  // N=3 open, alpha=2: center row 1+1+1=3 beats the edge rows 1+1+1/4
  CouplingModel m(Alpha(2.0), Geometry::finite(3, Boundary::open));
  Lambda fin = lambda(m, LambdaMode::finite_row_max);
  CHECK(fin.value == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(fin.mode == LambdaMode::finite_row_max);

  // dominated by the infinite-lattice value for any finite geometry
  for (double a : {1.5, 2.0, 3.0, 6.0}) {
    for (int n : {3, 10, 101}) {
      for (Boundary b : {Boundary::open, Boundary::periodic}) {
        CouplingModel mm(Alpha(a), Geometry::finite(n, b));
        CHECK(lambda(mm, LambdaMode::finite_row_max).value <=
              lambda(mm, LambdaMode::infinite_lattice).value);
      }
    }
  }
  CHECK_THROWS_AS(lambda(CouplingModel(Alpha(2.0), Geometry::infinite()),
                         LambdaMode::finite_row_max),
                  std::invalid_argument);
}

}  // TEST_SUITE
