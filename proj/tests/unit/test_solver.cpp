#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "singhom/solver.hpp"

using namespace singhom;

namespace {

Nonlinearity power_problem(const MeshPtr& m, double gamma, double f = 1.0, double l = 0.0) {
  return Nonlinearity(ScalarMap::power(gamma), FieldFunction::constant(m, f), FieldFunction::constant(m, l));
}

}  // namespace

TEST_CASE("zero nonlinearity gives the zero solution at once") {
  auto m = build_rectangle_mesh(1.0, 1.0, 17, 17);
  auto A = Coefficient::isotropic(*m, 1.0);
  const auto lvl = solve_level(m, A, Nonlinearity::zero(m), 4.0, SolverConfig{});
  CHECK(lvl.converged);
  CHECK(lvl.iterations <= 1);
  CHECK(lvl.u.max_abs() == 0.0);
  const auto rep = solve_singular(m, A, Nonlinearity::zero(m), SolverConfig{});
  CHECK(rep.converged());
  CHECK(rep.u.max_abs() == 0.0);
  CHECK(rep.energy_identity_residual == 0.0);
}

TEST_CASE("linear load reproduces x(1-x)/2 at every level") {
  auto m = build_interval_mesh(1.0, 257);
  auto A = Coefficient::isotropic(*m, 1.0);
  const auto F = power_problem(m, 1.0, 0.0, 1.0);
  for (double n : {1.0, 8.0}) {
    const auto r = solve_level(m, A, F, n, SolverConfig{});
    REQUIRE(r.converged);
    for (std::size_t i = 0; i < m->num_nodes(); ++i) {
      const double x = m->node(i).x;
      CHECK(r.u[i] == doctest::Approx(x * (1 - x) / 2).epsilon(1e-9));
    }
  }
  const auto rep = solve_singular(m, A, F, SolverConfig{});
  CHECK(std::abs(rep.linf / 0.125 - 1) < 1e-3);
}

TEST_CASE("singular 1-D solve matches the first-integral oracle") {
  auto m = build_interval_mesh(1.0, 513);
  auto A = Coefficient::isotropic(*m, 1.0);
  for (double gamma : {0.5, 1.0}) {
    CAPTURE(gamma);
    const oracle::SingularProfile exact(gamma);
    const auto rep = solve_singular(m, A, power_problem(m, gamma), SolverConfig{});
    REQUIRE(rep.converged());
    double err = 0.0;
    for (std::size_t i = 0; i < m->num_nodes(); ++i) err = std::max(err, std::abs(rep.u[i] - exact(m->node(i).x)));
    CHECK(err < 1e-3);
    CHECK(rep.energy_identity_residual <= 1e-6);
    CHECK(rep.u.min() >= 0.0);
  }
}

TEST_CASE("oracle peaks match their closed forms") {
  // gamma = 1: m sqrt(pi / 2) = 1/2; gamma = 1/2: (4/3) m^(3/4) = 1/2.
  CHECK(oracle::SingularProfile(1.0).peak() == doctest::Approx(1.0 / std::sqrt(2 * std::numbers::pi)).epsilon(1e-7));
  CHECK(oracle::SingularProfile(0.5).peak() == doctest::Approx(std::pow(3.0 / 8.0, 4.0 / 3.0)).epsilon(1e-7));
}

TEST_CASE("oscillating 2-D solve converges with a nonnegative solution") {
  // 65 used to stall with the damping factor stuck at its floor.
  for (int n : {33, 65}) {
    CAPTURE(n);
    auto m = build_rectangle_mesh(1.0, 1.0, n, n);
    auto A = Coefficient::isotropic(*m, 1.0);
    Nonlinearity F(ScalarMap::oscillating(0.5), FieldFunction::constant(m, 1.0), FieldFunction::zeros(m));
    const auto rep = solve_singular(m, A, F, SolverConfig{});
    CHECK(rep.converged());
    CHECK(rep.u.min() >= 0.0);
    CHECK(rep.energy_identity_residual <= 1e-6);
    for (std::size_t i = 0; i < m->num_nodes(); ++i)
      if (m->is_free(i)) CHECK(rep.u[i] > 0.0);
  }
}

TEST_CASE("level solutions increase with n for a nonincreasing g") {
  auto m = build_rectangle_mesh(1.0, 1.0, 17, 17);
  auto A = Coefficient::isotropic(*m, 1.0);
  const Problem P(m, A, power_problem(m, 0.5));
  const auto rep = solve_singular(P, SolverConfig{}, nullptr, true);
  REQUIRE(rep.level_fields.size() >= 3);
  for (std::size_t k = 1; k < rep.level_fields.size(); ++k)
    for (std::size_t i = 0; i < m->num_nodes(); ++i)
      CHECK(rep.level_fields[k][i] >= rep.level_fields[k - 1][i] - 1e-10);
  CHECK(rep.history.front() == 0.0);
  CHECK(rep.levels.size() == rep.history.size());
}

TEST_CASE("larger source gives a larger solution") {
  auto m = build_rectangle_mesh(1.0, 1.0, 17, 17);
  auto A = Coefficient::isotropic(*m, 1.0);
  const auto u1 = solve_singular(m, A, power_problem(m, 0.5, 1.0), SolverConfig{}).u;
  const auto u2 = solve_singular(m, A, power_problem(m, 0.5, 2.0), SolverConfig{}).u;
  for (std::size_t i = 0; i < u1.size(); ++i) CHECK(u1[i] <= u2[i] + 1e-12);
}

TEST_CASE("zeroth-order term lowers the solution") {
  auto m = build_rectangle_mesh(1.0, 1.0, 17, 17);
  auto A = Coefficient::isotropic(*m, 1.0);
  const auto F = power_problem(m, 0.5, 0.0, 10.0);
  const auto u0 = solve_singular(Problem(m, A, F, 0.0), SolverConfig{}).u;
  const auto u1 = solve_singular(Problem(m, A, F, 50.0), SolverConfig{}).u;
  for (std::size_t i = 0; i < u0.size(); ++i) CHECK(u1[i] <= u0[i] + 1e-12);
  CHECK(u1.max() < u0.max());
}

TEST_CASE("non-convergence is reported") {
  auto m = build_interval_mesh(1.0, 129);
  auto A = Coefficient::isotropic(*m, 1.0);
  SolverConfig cfg;
  cfg.max_inner = 1;
  const auto lvl = solve_level(m, A, power_problem(m, 1.0), 64.0, cfg);
  CHECK_FALSE(lvl.converged);
  CHECK_THROWS_AS(solve_singular(m, A, power_problem(m, 1.0), cfg), SolverError);
}

TEST_CASE("cg statistics reach the sink") {
  auto m = build_interval_mesh(1.0, 33);
  auto A = Coefficient::isotropic(*m, 1.0);
  SolverConfig cfg;
  int calls = 0;
  cfg.cg_sink = [&](const CgStats& s) {
    ++calls;
    CHECK(s.unknowns == 31);
  };
  const auto rep = solve_singular(m, A, power_problem(m, 0.5), cfg);
  CHECK(calls > 0);
  CHECK(rep.cg_iters > 0);
}
