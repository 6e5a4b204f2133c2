#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "singhom/fem.hpp"

using namespace singhom;
using std::numbers::pi;

namespace {

std::vector<double> nodal(const MeshPtr& m, double (*f)(double, double)) {
  std::vector<double> v(m->num_nodes());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(m->node(i).x, m->node(i).y);
  return v;
}

double sinsin(double x, double y) { return std::sin(pi * x) * std::sin(pi * y); }

}  // namespace

TEST_CASE("identity stiffness is the five-point stencil") {
  auto m = build_rectangle_mesh(1.0, 1.0, 9, 9);
  auto K = assemble_stiffness(m, Coefficient::isotropic(*m, 1.0));
  const auto& d = K.dofs();
  const int c = d.dof(4 * 9 + 4);
  CHECK(K.entry(c, c) == doctest::Approx(4.0));
  CHECK(K.entry(c, d.dof(4 * 9 + 5)) == doctest::Approx(-1.0));
  CHECK(K.entry(c, d.dof(4 * 9 + 3)) == doctest::Approx(-1.0));
  CHECK(K.entry(c, d.dof(5 * 9 + 4)) == doctest::Approx(-1.0));
  CHECK(K.entry(c, d.dof(3 * 9 + 4)) == doctest::Approx(-1.0));
  CHECK(K.entry(c, d.dof(5 * 9 + 5)) == doctest::Approx(0.0));
  CHECK(K.asymmetry() == 0.0);
}

TEST_CASE("diagonal coefficient gives an M-matrix") {
  auto m = build_rectangle_mesh(1.0, 2.0, 7, 9);
  auto K = assemble_stiffness(m, Coefficient::constant(*m, Mat2::diagonal(1.0, 3.0)));
  for (std::size_t i = 0; i < K.rows(); ++i) {
    for (std::size_t j = 0; j < K.rows(); ++j)
      if (i != j) CHECK(K.entry(int(i), int(j)) <= 0.0);
    CHECK(K.entry(int(i), int(i)) > 0.0);
  }
  for (double s : K.row_sums()) CHECK(s >= -1e-12);
}

TEST_CASE("full stiffness annihilates constants") {
  auto m = build_rectangle_mesh(1.0, 1.0, 6, 6);
  auto A = Coefficient::constant(*m, {2.0, 0.5, 0.3, 1.0});
  for (double v : apply_stiffness(*m, A, std::vector<double>(m->num_nodes(), 1.0))) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("nonsymmetric coefficient gives a nonsymmetric operator") {
  auto m = build_rectangle_mesh(1.0, 1.0, 6, 6);
  // A constant skew part integrates to zero against H1_0 functions, so vary it.
  std::vector<Mat2> values;
  for (std::size_t e = 0; e < m->num_elements(); ++e) {
    const double s = 0.5 * std::sin(double(e));
    values.push_back({1.0, s, -s, 1.0});
  }
  auto A = Coefficient::per_element(values);
  CHECK_FALSE(A.symmetric());
  CHECK(assemble_stiffness(m, A).asymmetry() > 0.1);
  CHECK(assemble_stiffness(m, A.symmetrized()).asymmetry() < 1e-14);
}

TEST_CASE("non-coercive coefficient is rejected") {
  auto m = build_rectangle_mesh(1.0, 1.0, 4, 4);
  CHECK_THROWS_AS(Coefficient::constant(*m, {1.0, 0.0, 0.0, -1.0}), std::invalid_argument);
  CHECK(Coefficient::constant(*m, {2.0, 0.0, 0.0, 0.5}).alpha() == doctest::Approx(0.5));
}

TEST_CASE("consistent and lumped mass entries") {
  auto m = build_rectangle_mesh(1.0, 1.0, 9, 9);
  const double h = 1.0 / 8;
  auto M = assemble_mass(m);
  const auto& d = M.dofs();
  const int c = d.dof(4 * 9 + 4);
  // Six triangles of area h^2/2 meet at an interior node.
  CHECK(M.entry(c, c) == doctest::Approx(h * h / 2));
  CHECK(M.entry(c, d.dof(4 * 9 + 5)) == doctest::Approx(h * h / 12));
  CHECK(M.entry(c, d.dof(5 * 9 + 5)) == doctest::Approx(h * h / 12));
  CHECK(M.entry(c, d.dof(5 * 9 + 3)) == doctest::Approx(0.0));
  const auto w = lumped_mass(*m, d);
  CHECK(w[c] == doctest::Approx(h * h));
  auto all = assemble_mass(*m, DofMap::all_nodes(m));
  CHECK(all.sum_of_entries() == doctest::Approx(1.0));
}

TEST_CASE("CG agrees with dense elimination") {
  auto m = build_rectangle_mesh(1.0, 1.0, 7, 7);
  auto K = assemble_stiffness(m, Coefficient::constant(*m, Mat2::diagonal(1.0, 2.0)));
  const std::size_t n = K.rows();
  std::vector<std::vector<double>> dense(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) dense[i][j] = K.entry(int(i), int(j));
  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = std::cos(double(i));
  const auto ref = oracle::dense_solve(dense, b);
  CgOptions o;
  o.tol = 1e-13;
  const auto x = solve_cg(K, b, o).x;
  for (std::size_t i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(ref[i]).epsilon(1e-10));
}

TEST_CASE("CG reports non-convergence") {
  auto m = build_rectangle_mesh(1.0, 1.0, 33, 33);
  auto K = assemble_stiffness(m, Coefficient::isotropic(*m, 1.0));
  CgOptions o;
  o.maxit = 3;
  CHECK_THROWS_AS(solve_cg(K, std::vector<double>(K.rows(), 1.0), o), ConvergenceError);
}

TEST_CASE("manufactured sin sin solution") {
  auto m = build_rectangle_mesh(1.0, 1.0, 65, 65);
  auto K = assemble_stiffness(m, Coefficient::isotropic(*m, 1.0));
  auto M = assemble_mass(m);
  auto exact = nodal(m, sinsin);
  const auto& d = K.dofs();
  auto rhs = M * d.restrict(FieldFunction(m, exact));
  for (double& v : rhs) v *= 2 * pi * pi;
  CgOptions o;
  o.tol = 1e-12;
  auto u = d.prolong(solve_cg(K, rhs, o).x);
  double err = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) err = std::max(err, std::abs(u[i] - exact[i]));
  CHECK(err < 2e-3);
}

TEST_CASE("first eigenvalues of the square and the interval") {
  auto sq = build_rectangle_mesh(1.0, 1.0, 65, 65);
  auto e2 = first_eigenpair(assemble_stiffness(sq, Coefficient::isotropic(*sq, 1.0)), assemble_mass(sq));
  CHECK(std::abs(e2.lambda / (2 * pi * pi) - 1) < 0.01);
  CHECK(e2.phi.min() >= -1e-12);
  CHECK(mass_product(e2.phi, e2.phi) == doctest::Approx(1.0).epsilon(1e-8));

  auto iv = build_interval_mesh(1.0, 257);
  auto e1 = first_eigenpair(assemble_stiffness(iv, Coefficient::isotropic(*iv, 1.0)), assemble_mass(iv));
  CHECK(std::abs(e1.lambda / (pi * pi) - 1) < 1e-4);
  // Consistent mass overestimates the eigenvalue.
  CHECK(e1.lambda > pi * pi);
}

TEST_CASE("norms and energy") {
  auto m = build_rectangle_mesh(1.0, 1.0, 129, 129);
  FieldFunction u(m, nodal(m, sinsin));
  const auto A = Coefficient::isotropic(*m, 2.0);
  CHECK(l2_norm(u) == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(h1_seminorm(u) == doctest::Approx(pi / std::sqrt(2.0)).epsilon(1e-3));
  CHECK(energy(u, A) == doctest::Approx(2.0 * pi * pi / 2).epsilon(1e-3));
  CHECK(energy_product(u, u, A) == doctest::Approx(energy(u, A)));
  auto K = assemble_stiffness(m, A);
  CHECK(K.quadratic_form(K.dofs().restrict(u)) == doctest::Approx(energy(u, A)).epsilon(1e-12));
  const auto n = norms(u, A);
  CHECK(n.linf == doctest::Approx(1.0));
}

TEST_CASE("coordinate dump is deterministic") {
  auto m = build_rectangle_mesh(1.0, 1.0, 4, 4);
  auto K = assemble_stiffness(m, Coefficient::isotropic(*m, 1.0));
  std::ostringstream a, b;
  K.write_coordinate(a);
  K.write_coordinate(b);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("0 0 4", 0) == 0);
}
