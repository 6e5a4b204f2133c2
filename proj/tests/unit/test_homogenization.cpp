#include "doctest.h"

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "singhom/homogenization.hpp"

using namespace singhom;
using std::numbers::pi;

TEST_CASE("critical radius law") {
  CHECK(radius_law(0.1, 3, 1.0) == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(radius_law(0.5, 2, 1.0) == doctest::Approx(std::exp(-4.0)).epsilon(1e-12));
  CHECK(radius_law(0.5, 2, 1.0) == doctest::Approx(0.0183).epsilon(1e-3));
  CHECK_THROWS_AS(radius_law(0.1, 1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(radius_law(-0.1, 2, 1.0), std::invalid_argument);
}

TEST_CASE("prescribed-mu radius") {
  const double C0 = pi / (2 * 50);
  CHECK(c0_for_mu(50.0) == doctest::Approx(C0));
  CHECK(prescribed_mu_radius(0.125, C0) == doctest::Approx(0.125 * std::exp(-(pi / 100) * 64)).epsilon(1e-12));
  CHECK(prescribed_mu_radius(0.125, C0) == doctest::Approx(0.0167).epsilon(3e-3));
  const auto s = PerforationSpec::from_mu(0.125, 50.0);
  CHECK(s.radius == doctest::Approx(prescribed_mu_radius(0.125, C0)));
  CHECK(*s.target_mu == 50.0);
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("strange term formula") {
  CHECK(strange_term_formula(2, 1.0).mu == doctest::Approx(pi / 2));
  CHECK(strange_term_formula(3, 1.0).mu == doctest::Approx(pi / 2));
  CHECK(strange_term_formula(2, pi / 100).mu == doctest::Approx(50.0));
  // S_3 = 2 pi^2 in four dimensions: mu = 2 pi^2 * 2 / 16 * C0^2.
  CHECK(strange_term_formula(4, 2.0).mu == doctest::Approx(2 * pi * pi * 2.0 / 16.0 * 4.0));
}

TEST_CASE("perforation parameter validation") {
  auto s = PerforationSpec::from_mu(0.125, 50.0);
  s.C0 = 1.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  auto t = PerforationSpec::from_c0(0.5, 2, 0.01);
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);  // r = exp(-0.04) >= eps
  CHECK_THROWS_AS(PerforationSpec::from_c0(0.1, 1, 1.0), std::invalid_argument);
  CHECK(hole_strategy_from_string("collapsed") == HoleStrategy::collapsed);
  CHECK_THROWS_AS(hole_strategy_from_string("bogus"), std::invalid_argument);
}

TEST_CASE("prescribed radius at eps = 1/8 and h = 1/256 covers the lattice disk") {
  auto m = build_rectangle_mesh(1.0, 1.0, 257, 257);
  const auto spec = PerforationSpec::from_mu(0.125, 50.0);
  const auto p = perforate(m, spec);
  REQUIRE(p.hole_count() == 16);
  for (const auto& h : p.holes) {
    CHECK(h.nodes.size() == oracle::lattice_points_in_disk(257, 1.0 / 256, h.center.x, h.center.y, spec.radius));
    CHECK(h.nodes.size() >= 45);
  }
}

TEST_CASE("annulus capacity against 2 pi / ln(R/r)") {
  const auto c1 = discrete_capacity(1.0, 0.1, 0.005);
  const auto c2 = discrete_capacity(1.0, 0.1, 0.0025);
  CHECK(c1.annulus_oracle == doctest::Approx(oracle::annulus_capacity(1.0, 0.1)));
  CHECK(std::abs(c1.capacity / c1.annulus_oracle - 1) < 0.02);
  CHECK(std::abs(c2.capacity / c2.annulus_oracle - 1) < 0.02);
  // Refinement moves the value by less than 1% and towards the oracle.
  CHECK(std::abs(c2.capacity / c1.capacity - 1) < 0.01);
  CHECK(std::abs(c2.capacity - c2.annulus_oracle) < std::abs(c1.capacity - c1.annulus_oracle));
  CHECK_THROWS_AS(discrete_capacity(1.0, 0.1, 0.06), std::invalid_argument);
  // Thin annuli have larger capacity.
  CHECK(discrete_capacity(0.3, 0.1, 0.005).capacity > c1.capacity);
}

TEST_CASE("per-cell capacity density tracks the prescribed mu") {
  const auto spec = PerforationSpec::from_mu(0.25, 10.0);
  const auto d = capacity_density(spec, 1.0 / 256);
  CHECK(d.provenance == StrangeTerm::Provenance::discrete_capacity);
  CHECK(std::abs(d.mu / 10.0 - 1) < 0.1);
}

TEST_CASE("corrector field") {
  auto m = build_rectangle_mesh(1.0, 1.0, 257, 257);
  PerforationSpec spec;
  spec.epsilon = 0.25;
  spec.C0 = 1.0;
  spec.radius = 0.05;
  const auto p = perforate(m, spec);
  const auto w = corrector_field(p, spec);
  CHECK(w.min() == 0.0);
  CHECK(w.max() == 1.0);
  for (const auto& h : p.holes) {
    const int ci = static_cast<int>(std::lround(h.center.x * 256));
    const int cj = static_cast<int>(std::lround(h.center.y * 256));
    CHECK(w[cj * 257 + ci] == 0.0);
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    const bool hole = p.mesh->node_class(i) == NodeClass::hole;
    CHECK((w[i] == 0.0) == hole);
    // Nodes at least rho from every center carry 1.
    double dmin = 1e9;
    for (const auto& h : p.holes) dmin = std::min(dmin, std::hypot(m->node(i).x - h.center.x, m->node(i).y - h.center.y));
    if (dmin >= spec.epsilon) CHECK(w[i] == 1.0);
  }
  const double expected = 4 * oracle::annulus_capacity(spec.epsilon, spec.radius);
  CHECK(std::abs(h1_seminorm(w) * h1_seminorm(w) / expected - 1) < 0.05);
}

TEST_CASE("homogenization sweep on a coarse mesh") {
  auto m = build_rectangle_mesh(1.0, 1.0, 129, 129);
  auto A = Coefficient::isotropic(*m, 1.0);
  Nonlinearity F(ScalarMap::power(1.0), FieldFunction::zeros(m), FieldFunction::constant(m, 10.0));
  const std::vector<PerforationSpec> specs = {PerforationSpec::from_mu(0.125, 50.0), PerforationSpec::from_mu(0.25, 50.0),
                                              PerforationSpec::from_mu(0.0625, 50.0)};
  HomogenizationOptions opts;
  opts.threads = 2;
  const auto res = homogenization_experiment(m, A, F, specs, SolverConfig{}, opts);
  // eps = 1/16 has a radius far below the grid and is dropped.
  REQUIRE(res.rows.size() == 2);
  CHECK(res.outcome.notes.size() == 1);
  CHECK(res.rows[0].epsilon == 0.25);
  CHECK(res.rows[1].epsilon == 0.125);
  CHECK(res.mu.mu == doctest::Approx(50.0));
  CHECK(res.rows[1].eL2 < res.rows[0].eL2);
  CHECK(res.rows[1].eL2 < res.rows[1].eL2_no_mu);
  for (const auto& r : res.rows) {
    CHECK(r.extension_gap < 1e-13);
    CHECK(r.u_eps.min() >= 0.0);
  }
  const auto corr = corrector_experiment(res);
  CHECK(corr.get("w_in_unit_interval") == 1.0);
  CHECK(corr.get("w_zero_exactly_on_holes") == 1.0);
  CHECK(corr.get("corrector_beats_plain") == 1.0);

  // Same rows serially.
  const auto serial = homogenization_experiment(m, A, F, specs, SolverConfig{});
  CHECK(serial.rows[1].eL2 == res.rows[1].eL2);

  auto mixed = specs;
  mixed[0] = PerforationSpec::from_mu(0.125, 40.0);
  CHECK_THROWS_AS(homogenization_experiment(m, A, F, mixed, SolverConfig{}), std::invalid_argument);
}

TEST_CASE("limit problem with mu = 0 is the plain solve") {
  auto m = build_rectangle_mesh(1.0, 1.0, 17, 17);
  auto A = Coefficient::isotropic(*m, 1.0);
  Nonlinearity F(ScalarMap::power(0.5), FieldFunction::constant(m, 1.0), FieldFunction::zeros(m));
  const auto a = solve_limit_problem(m, A, F, StrangeTerm{}, SolverConfig{});
  const auto b = solve_singular(m, A, F, SolverConfig{});
  CHECK(a.u.values == b.u.values);
}

TEST_CASE("strong absorption pins the limit solution near l / mu") {
  auto m = build_rectangle_mesh(1.0, 1.0, 257, 257);
  auto A = Coefficient::isotropic(*m, 1.0);
  Nonlinearity F(ScalarMap::power(1.0), FieldFunction::zeros(m), FieldFunction::constant(m, 1.0));
  StrangeTerm mu;
  mu.mu = 50.0;
  const auto u = solve_limit_problem(m, A, F, mu, SolverConfig{}).u;
  for (auto [i, j] : {std::pair{128, 128}, std::pair{96, 160}, std::pair{64, 64}}) {
    const double exact = oracle::absorption_square(50.0, i / 256.0, j / 256.0, 400);
    CHECK(u[j * 257 + i] == doctest::Approx(exact).epsilon(1e-3));
  }
  // The boundary layer of width 1/sqrt(mu) still pulls the center about 10% below 1/mu.
  CHECK(u.max() * 50.0 == doctest::Approx(0.898).epsilon(2e-3));
}

TEST_CASE("limit solution converges under refinement") {
  auto solve = [](int n) {
    auto m = build_rectangle_mesh(1.0, 1.0, n, n);
    Nonlinearity F(ScalarMap::power(1.0), FieldFunction::zeros(m), FieldFunction::constant(m, 1.0));
    StrangeTerm mu;
    mu.mu = pi / 2;
    return solve_limit_problem(m, Coefficient::isotropic(*m, 1.0), F, mu, SolverConfig{}).u;
  };
  const auto fine = solve(257);
  const auto coarse = solve(65);
  // Compare on the coarse nodes, every fourth fine node per axis.
  double diff = 0.0, norm = 0.0;
  for (int j = 0; j < 65; ++j)
    for (int i = 0; i < 65; ++i) {
      const double a = coarse[j * 65 + i], b = fine[(4 * j) * 257 + 4 * i];
      diff += (a - b) * (a - b);
      norm += b * b;
    }
  CHECK(std::sqrt(diff / norm) < 1e-3);
}

TEST_CASE("extension of trivial fields") {
  auto m = build_rectangle_mesh(1.0, 1.0, 9, 9);
  CHECK(extend_by_zero(FieldFunction::zeros(m)).max_abs() == 0.0);
  auto one = FieldFunction::zeros(m);
  one[4 * 9 + 4] = 1.0;
  CHECK(extend_by_zero(one).values == one.values);
}
