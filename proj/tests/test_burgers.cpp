#include "rdo/solvers/burgers.hpp"

#include "rdo/linalg.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace rdo;

namespace {
Vector sine_ic(int n) {
  Vector u0(n);
  for (int i = 0; i < n; ++i) u0(i) = std::sin(2.0 * M_PI * i / n);
  return u0;
}
}  // namespace

TEST_CASE("constant initial data is a fixed point", "[burgers]") {
  const GridSolution sol = solve_burgers(Vector::Constant(64, 0.7), 0.01, 64, 100, 33, 11);
  for (Eigen::Index i = 0; i < sol.values.size(); ++i)
    CHECK(sol.values(i) == Catch::Approx(0.7).margin(1e-13));
}

TEST_CASE("strong viscosity dissipates the sine mode", "[burgers]") {
  const GridSolution sol = solve_burgers(sine_ic(128), 1.0, 128, 400, 101, 101);
  Vector final_col(101);
  for (int i = 0; i < 101; ++i) final_col(i) = sol.at(i, 100);
  CHECK(final_col.cwiseAbs().maxCoeff() < 1.0);
  CHECK(final_col.cwiseAbs().maxCoeff() < 1e-3);  // nu = 1 kills the mode fast
}

TEST_CASE("doubled resolution changes the solution below 1e-6", "[burgers]") {
  const GridSolution coarse = solve_burgers(sine_ic(512), 0.01, 512, 2000, 101, 101);
  const GridSolution fine = solve_burgers(sine_ic(1024), 0.01, 1024, 4000, 101, 101);
  CHECK(relative_l2_error(coarse.values, fine.values) <= 1e-6);
}

TEST_CASE("output is periodic across the x seam", "[burgers]") {
  const GridSolution sol = solve_burgers(sine_ic(128), 0.01, 128, 300, 101, 101);
  for (int j = 0; j < 101; ++j) CHECK(sol.at(0, j) == sol.at(100, j));
}

TEST_CASE("insufficient step counts are refined instead of failing", "[burgers]") {
  // 10 requested steps is far below the advective CFL bound
  const GridSolution sol = solve_burgers(sine_ic(128), 0.01, 128, 10, 51, 51);
  CHECK(sol.values.allFinite());
  CHECK(sol.values.cwiseAbs().maxCoeff() <= 1.05);
}
