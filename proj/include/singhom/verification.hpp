#pragma once

#include <cstdint>
#include <vector>

#include "singhom/fem.hpp"
#include "singhom/nonlinearity.hpp"
#include "singhom/outcome.hpp"
#include "singhom/solver.hpp"

namespace singhom {

// Uniqueness-type preconditions require lambda_mono <= kLambdaMargin * lambda_1.
inline constexpr double kLambdaMargin = 0.9;

// First Dirichlet eigenpair of -div sym(A) D on the free nodes. `lumped`
// selects the lumped mass (then t phi is an exact fixed point of the
// lumped-load Picard map for F = lambda_1 s).
Eigenpair dirichlet_eigenpair(const MeshPtr& mesh, const Coefficient& A, bool lumped = false);

// Smallest lambda >= 0 with F(x, s) - lambda s nonincreasing along `s_grid`
// at every node: the max positive difference quotient over adjacent grid
// points. Infinity when the quotient blows up towards 0 (checked on two
// extra decades below the grid).
double estimate_lambda_mono(const Nonlinearity& F, const std::vector<double>& s_grid);
// Default grid: 200 log-spaced points in [1e-6, 1e3].
double estimate_lambda_mono(const Nonlinearity& F);

// F1 <= F2 on a sampled grid, solve both, metric max(u1 - u2).
// Throws std::invalid_argument naming the offending sample when F1 > F2
// somewhere or neither F has lambda_mono <= margin * lambda_1.
ExperimentOutcome comparison_experiment(const MeshPtr& mesh, const Coefficient& A, const Nonlinearity& F1,
                                        const Nonlinearity& F2, const SolverConfig& cfg);

// Starts: zero, a large constant, then seeded random nonnegative fields.
ExperimentOutcome uniqueness_experiment(const MeshPtr& mesh, const Coefficient& A, const Nonlinearity& F,
                                        int n_starts, const SolverConfig& cfg, std::uint64_t seed = 1);

struct NonuniquenessOptions {
  std::vector<double> start_fractions = {0.0, 0.25, 0.5};  // t0 in units of k / max(phi_1)
  double perturbation = 0.02;  // random relative perturbation of each start (times k)
  double ray_tol = 1e-4;
  double separation = 0.1;  // in units of k
  std::uint64_t seed = 1;
};

// F = lambda_1 T_k(s): every t phi_1 with 0 <= t <= k / max(phi_1) solves the
// problem. Solves from starts near the ray and checks that distinct members
// of the family are recovered.
ExperimentOutcome nonuniqueness_experiment(const MeshPtr& mesh, const Coefficient& A, double k,
                                           const SolverConfig& cfg, const NonuniquenessOptions& opts = {});

struct StabilityOptions {
  std::vector<double> levels;  // empty: the doubling schedule of the reference solve
  double slack = 0.05;
  double stab_tol = 1e-5;  // on e_last / ||u_inf||_H1
};

// e_n = ||u_n - u_inf||_H1 along truncation levels.
ExperimentOutcome stability_experiment(const MeshPtr& mesh, const Coefficient& A, const Nonlinearity& F,
                                       const SolverConfig& cfg, const StabilityOptions& opts = {});

}  // namespace singhom
