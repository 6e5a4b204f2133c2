#pragma once

#include <optional>
#include <string>
#include <vector>

#include "singhom/fem.hpp"
#include "singhom/nonlinearity.hpp"

namespace singhom {

struct SolverConfig {
  // Initial damping of the Picard iteration; halved when the fixed-point
  // residual grows, multiplied by 1.2 (capped at 1) when it shrinks.
  double theta = 0.5;
  // Inner stop: ||T(u) - u||_H1 <= inner_tol * ||T(u)||_H1 + inner_abs_tol.
  double inner_tol = 1e-9;
  double inner_abs_tol = 1e-14;
  int max_inner = 5000;
  // Outer stop: ||u_2n - u_n||_H1 <= outer_tol * ||u_n||_H1 + outer_abs_tol.
  double outer_tol = 1e-6;
  double outer_abs_tol = 1e-10;
  int max_levels = 40;
  double first_level = 1.0;
  double cg_tol = 1e-12;
  int cg_maxit = 0;
  CgStatsSink cg_sink;
};

// Discrete problem -div A Du + mu u = F(x, u) on the free nodes of a mesh.
class Problem {
 public:
  Problem(MeshPtr mesh, Coefficient A, Nonlinearity F, double mu = 0.0);

  const MeshPtr& mesh() const { return mesh_; }
  const Coefficient& coefficient() const { return A_; }
  const Nonlinearity& nonlinearity() const { return F_; }
  double mu() const { return mu_; }
  const DofMap& dofs() const { return dofs_; }
  // K + mu * lumped mass.
  const SparseOperator& op() const { return op_; }
  // A = I stiffness, used for H1 seminorms of dof vectors.
  const SparseOperator& h1_op() const { return h1_; }
  const std::vector<double>& weights() const { return weights_; }

  double h1(const std::vector<double>& x) const;
  double h1_distance(const std::vector<double>& a, const std::vector<double>& b) const;
  // Lumped load vector m_i * min(F(x_i, u_i^+), n) on dofs.
  std::vector<double> load(const std::vector<double>& x, double n) const;
  // Diagonal D_i = m_i max(0, -dF_n/ds(x_i, u_i)). The iteration map
  // u -> (op + D)^-1 (M_L F_n(u) + D u) has the same fixed points as
  // u -> op^-1 M_L F_n(u) but stays contractive for steep decreasing F.
  void picard_shift(const std::vector<double>& x, double n, std::vector<double>& shift) const;
  // |u^T op u - sum_i m_i F_n(x_i, u_i) u_i| / u^T op u (0 if u = 0).
  double energy_identity_residual(const std::vector<double>& x, double n) const;

 private:
  MeshPtr mesh_;
  Coefficient A_;
  Nonlinearity F_;
  double mu_;
  DofMap dofs_;
  SparseOperator op_;
  SparseOperator h1_;
  std::vector<double> weights_;
};

struct LevelResult {
  FieldFunction u;
  double level = 0.0;
  int iterations = 0;
  int cg_iterations = 0;
  bool converged = false;
  double residual = 0.0;     // last ||T(u) - u||_H1
  double oscillation = 0.0;  // max - min of the residual over the last iterations
  double theta = 0.0;
};

// Fixed point of u = (op)^-1 M_L T_n(F(x, u^+)) by damped Picard iteration
// on the diagonally shifted map (see Problem::picard_shift).
// Non-convergence is reported through `converged`, not thrown.
LevelResult solve_level(const Problem& problem, double n, const SolverConfig& cfg,
                        const FieldFunction* initial = nullptr);
LevelResult solve_level(const MeshPtr& mesh, const Coefficient& A, const Nonlinearity& F, double n,
                        const SolverConfig& cfg);

enum class SolveStatus { converged, stagnated };
std::string to_string(SolveStatus s);

struct SolveReport {
  FieldFunction u;
  SolveStatus status = SolveStatus::converged;
  double n_final = 0.0;
  int outer_iters = 0;
  int inner_iters = 0;
  int cg_iters = 0;
  double energy_identity_residual = 0.0;
  double cauchy_gap = 0.0;
  double linf = 0.0;  // max |u|
  // Per doubling: levels[k] and ||u_{levels[k]} - u_{levels[k-1]}||_H1 (history[0] = 0).
  std::vector<double> levels;
  std::vector<double> history;
  std::vector<double> level_h1;
  std::vector<FieldFunction> level_fields;

  bool converged() const { return status == SolveStatus::converged; }
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, LevelResult last) : std::runtime_error(what), last_(std::move(last)) {}
  const LevelResult& last() const { return last_; }

 private:
  LevelResult last_;
};

// Doubling schedule n = first_level, 2 first_level, ... with warm starts.
// Throws SolverError if a level does not converge.
SolveReport solve_singular(const Problem& problem, const SolverConfig& cfg, const FieldFunction* initial = nullptr,
                           bool keep_levels = false);
SolveReport solve_singular(const MeshPtr& mesh, const Coefficient& A, const Nonlinearity& F, const SolverConfig& cfg);

}  // namespace singhom
