#include <catch2/catch_amalgamated.hpp>

#include "cfx/solvers/qp.hpp"
#include "helpers.hpp"

using namespace cfx;

namespace {

void check_qp_kkt(const QpProblem& qp, const ProgramSolution& s) {
  REQUIRE(s.status == SolveStatus::Optimal);
  const std::size_t n = qp.q_lin.size();
  const std::size_t m = qp.h.size();
  CHECK(s.max_violation <= 1e-7);
  CHECK(s.stationarity <= 1e-6);
  CHECK(s.complementarity <= 1e-6);
  if (m == 0) return;
  REQUIRE(s.multipliers.size() == m);
  Vec grad = add(qp.q_mat.mul(s.point), qp.q_lin);
  Vec gx = qp.g.mul(s.point);
  for (std::size_t i = 0; i < m; ++i) {
    CHECK(s.multipliers[i] >= -1e-9);
    CHECK(gx[i] <= qp.h[i] + 1e-7);
    for (std::size_t j = 0; j < n; ++j) grad[j] += s.multipliers[i] * qp.g(i, j);
  }
  CHECK(norm_inf(grad) <= 1e-6);
}

}  // namespace

TEST_CASE("solve_qp: projection onto a half-space") {
  // min 1/2 ||x' - (2,0)||^2  s.t.  x'_1 <= 1
  QpProblem qp;
  qp.q_mat = Mat::identity(2);
  qp.q_lin = {-2.0, 0.0};
  qp.q_const = 2.0;
  qp.g = Mat(1, 2, {1.0, 0.0});
  qp.h = {1.0};
  ProgramSolution s = solve_qp(qp);
  check_qp_kkt(qp, s);
  CHECK(s.point[0] == Catch::Approx(1.0));
  CHECK(s.point[1] == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("solve_qp: unconstrained quadratic") {
  QpProblem qp;
  qp.q_mat = Mat::identity(2);
  qp.q_lin = {-1.0, -2.0};
  ProgramSolution s = solve_qp(qp);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.point[0] == Catch::Approx(1.0));
  CHECK(s.point[1] == Catch::Approx(2.0));
  CHECK(s.stationarity <= 1e-6);
}

TEST_CASE("solve_qp: diagonal constraint verified by hand KKT") {
  // min 1/2 ||x'||^2  s.t.  x'_1 + x'_2 >= 2; stationarity gives x' = (1,1), mu = 1
  QpProblem qp;
  qp.q_mat = Mat::identity(2);
  qp.q_lin = {0.0, 0.0};
  qp.g = Mat(1, 2, {-1.0, -1.0});
  qp.h = {-2.0};
  ProgramSolution s = solve_qp(qp);
  check_qp_kkt(qp, s);
  CHECK(s.point[0] == Catch::Approx(1.0));
  CHECK(s.point[1] == Catch::Approx(1.0));
  CHECK(s.multipliers[0] == Catch::Approx(1.0));

  auto feas = [](double x, double y) { return x + y >= 2.0; };
  auto obj = [](double x, double y) { return 0.5 * (x * x + y * y); };
  const double h = 1e-3;
  CHECK(s.objective <= grid_min_2d(-3.0, 3.0, h, feas, obj) + 10 * h);
}

TEST_CASE("solve_qp: infeasible constraints") {
  QpProblem qp;
  qp.q_mat = Mat::identity(1);
  qp.q_lin = {0.0};
  qp.g = Mat(2, 1, {1.0, -1.0});
  qp.h = {0.0, -1.0};
  ProgramSolution s = solve_qp(qp);
  CHECK(s.status == SolveStatus::Infeasible);
}

TEST_CASE("solve_qp: duplicated rows keep the active set well-posed") {
  QpProblem qp;
  qp.q_mat = Mat::identity(2);
  qp.q_lin = {-2.0, 0.0};
  qp.g = Mat(2, 2, {1.0, 0.0, 1.0, 0.0});  // same row twice
  qp.h = {1.0, 1.0};
  ProgramSolution s = solve_qp(qp);
  check_qp_kkt(qp, s);
  CHECK(s.point[0] == Catch::Approx(1.0));
}

TEST_CASE("solve_qp: equality encoded as paired inequalities") {
  // x'_1 = 1 via x'_1 <= 1 and -x'_1 <= -1 (the GLM tolerance-zero pattern)
  QpProblem qp;
  qp.q_mat = Mat::identity(2);
  qp.q_lin = {0.0, 0.0};
  qp.g = Mat(2, 2, {1.0, 0.0, -1.0, 0.0});
  qp.h = {1.0, -1.0};
  ProgramSolution s = solve_qp(qp);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.point[0] == Catch::Approx(1.0));
  CHECK(s.point[1] == Catch::Approx(0.0).margin(1e-9));
  CHECK(s.max_violation <= 1e-7);
  CHECK(s.stationarity <= 1e-6);
}

TEST_CASE("solve_qp: random SPD objectives against a grid") {
  auto rng = seeded_rng(61);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    QpProblem qp;
    qp.q_mat = random_spd(rng, 2);
    qp.q_lin = random_vec(rng, 2, -1.0, 1.0);
    Vec anchor = random_vec(rng, 2, -1.0, 1.0);
    const std::size_t m = 2 + rng() % 3;
    qp.g = Mat(m, 2);
    qp.h.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      qp.g(i, 0) = u(rng);
      qp.g(i, 1) = u(rng);
      qp.h[i] = qp.g(i, 0) * anchor[0] + qp.g(i, 1) * anchor[1] + 0.1 + std::abs(u(rng));
    }
    ProgramSolution s = solve_qp(qp);
    check_qp_kkt(qp, s);

    const double h = 1e-2;
    double gmin = grid_min_2d(-4.0, 4.0, h, [&](double x, double y) {
      for (std::size_t i = 0; i < m; ++i)
        if (qp.g(i, 0) * x + qp.g(i, 1) * y > qp.h[i]) return false;
      return true;
    }, [&](double x, double y) {
      Vec z{x, y};
      return 0.5 * dot(z, qp.q_mat.mul(z)) + dot(qp.q_lin, z);
    });
    CHECK(s.objective - qp.q_const <= gmin + 10 * h);
  }
}
