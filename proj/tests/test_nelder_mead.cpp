#include <catch2/catch_amalgamated.hpp>

#include "cfx/solvers/nelder_mead.hpp"

using namespace cfx;

TEST_CASE("downhill_simplex: 1-D parabola") {
  NmResult r = downhill_simplex([](const Vec& v) { return (v[0] - 1.0) * (v[0] - 1.0); },
                                {0.0});
  CHECK(r.converged);
  CHECK(r.point[0] == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("downhill_simplex: Rosenbrock valley") {
  auto rosen = [](const Vec& v) {
    double a = v[1] - v[0] * v[0];
    double b = 1.0 - v[0];
    return 100.0 * a * a + b * b;
  };
  NmParams prm;
  prm.max_iterations = 20000;
  NmResult r = downhill_simplex(rosen, {-1.2, 1.0}, prm);
  CHECK(r.converged);
  CHECK(r.point[0] == Catch::Approx(1.0).margin(1e-4));
  CHECK(r.point[1] == Catch::Approx(1.0).margin(1e-4));
}

TEST_CASE("downhill_simplex: constant function converges by spread at the start") {
  NmResult r = downhill_simplex([](const Vec&) { return 42.0; }, {3.0, -1.0});
  CHECK(r.converged);
  CHECK(r.point[0] == Catch::Approx(3.0).margin(1e-3));
  CHECK(r.point[1] == Catch::Approx(-1.0).margin(1e-3));
  CHECK(r.value == 42.0);
}

TEST_CASE("downhill_simplex: iteration cap returns best-so-far unflagged") {
  // unbounded descent direction can never converge
  NmParams p;
  p.max_iterations = 50;
  NmResult r = downhill_simplex([](const Vec& v) { return v[0]; }, {0.0}, p);
  CHECK_FALSE(r.converged);
  CHECK(r.point[0] < 0.0);
}

TEST_CASE("downhill_simplex: deterministic across calls") {
  auto f = [](const Vec& v) {
    return (v[0] + 2.0) * (v[0] + 2.0) + 0.5 * (v[1] - 3.0) * (v[1] - 3.0);
  };
  NmResult a = downhill_simplex(f, {0.1, 0.2});
  NmResult b = downhill_simplex(f, {0.1, 0.2});
  CHECK(a.point == b.point);
  CHECK(a.iterations == b.iterations);
}
