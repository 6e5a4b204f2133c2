#pragma once

#include <string>
#include <vector>

#include "singhom/fem.hpp"
#include "singhom/nonlinearity.hpp"
#include "singhom/outcome.hpp"
#include "singhom/perforation.hpp"
#include "singhom/solver.hpp"

namespace singhom {

struct CapacityResult {
  double capacity = 0.0;  // integral of |Dw|^2
  double annulus_oracle = 0.0;  // 2 pi / ln(R / r)
  std::size_t unknowns = 0;
  int cg_iterations = 0;
};

// Capacity of the disk of radius r_inner relative to the circle of radius
// R_outer, on the structured mesh of [-R, R]^2 with spacing ~mesh_h: w = 0 on
// nodes with |x| <= r, w = 1 on nodes with |x| >= R, discrete harmonic in
// between. Throws std::invalid_argument unless mesh_h <= r_inner / 2 < R_outer / 2.
CapacityResult discrete_capacity(double R_outer, double r_inner, double mesh_h, double cg_tol = 1e-12);

// Capacity of one hole inside its cell (outer radius epsilon) divided by the
// cell area 4 epsilon^2: the discrete strange-term density.
StrangeTerm capacity_density(const PerforationSpec& spec, double mesh_h);

// w = 0 on hole nodes, ln(d/r) / ln(rho/r) for r <= d <= rho with rho = epsilon
// (d the distance to the nearest hole center), 1 elsewhere, clamped to [0, 1].
FieldFunction corrector_field(const Perforation& perf, const PerforationSpec& spec);

// -div A Du + mu u = F(x, u) by the truncation scheme of solve_singular.
SolveReport solve_limit_problem(const MeshPtr& mesh, const Coefficient& A, const Nonlinearity& F, const StrangeTerm& mu,
                                const SolverConfig& cfg);

struct HomogenizationRow {
  double epsilon = 0.0;
  double r = 0.0;
  std::size_t n_holes = 0;
  double eL2 = 0.0;        // ||u_eps - u0||_L2
  double eH1_plain = 0.0;  // ||u_eps - u0||_H1
  double eH1_corr = 0.0;   // ||u_eps - w u0||_H1
  double energy_eps = 0.0;
  double energy_limit = 0.0;
  double defect = 0.0;  // energy_eps - energy_limit
  double mu_times_mass = 0.0;  // mu * integral of u0^2
  double eL2_no_mu = 0.0;  // ||u_eps - u_{mu=0}||_L2
  double min_radius_grid = 0.0;
  double max_radius_grid = 0.0;
  double extension_gap = 0.0;  // relative H1 difference of the extension check
  FieldFunction u_eps;
  FieldFunction corrector;
  std::vector<int> hole_nodes;  // sorted
};

struct HomogenizationResult {
  ExperimentOutcome outcome;
  StrangeTerm mu;
  FieldFunction u0;
  FieldFunction u_no_mu;
  std::vector<HomogenizationRow> rows;  // sorted by decreasing epsilon
  bool symmetric_coefficient = true;
};

struct HomogenizationOptions {
  double defect_tol = 0.25;
  // Epsilon-solves run on up to this many threads.
  int threads = 1;
};

// Sweep over the perforations in `specs` (all with the same mu). Specs whose
// radius the mesh cannot resolve are dropped with a note.
HomogenizationResult homogenization_experiment(const MeshPtr& mesh, const Coefficient& A, const Nonlinearity& F,
                                               const std::vector<PerforationSpec>& specs, const SolverConfig& cfg,
                                               const HomogenizationOptions& opts = {});

// The corrector w u0 must beat u0 in H1 at every epsilon and improve along the
// sweep; w must lie in [0, 1] and vanish exactly on the hole nodes.
ExperimentOutcome corrector_experiment(const HomogenizationResult& sweep);

}  // namespace singhom
