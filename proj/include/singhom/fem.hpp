#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "singhom/mesh.hpp"

namespace singhom {

struct Mat2 {
  double a11 = 1.0;
  double a12 = 0.0;
  double a21 = 0.0;
  double a22 = 1.0;

  static Mat2 identity() { return {}; }
  static Mat2 scalar(double a) { return {a, 0.0, 0.0, a}; }
  static Mat2 diagonal(double a, double b) { return {a, 0.0, 0.0, b}; }
  bool symmetric() const { return a12 == a21; }
  // Smallest eigenvalue of the symmetric part.
  double min_sym_eigenvalue() const;
  double max_abs_entry() const;
};

// Elementwise-constant diffusion matrix with coercivity constant alpha.
class Coefficient {
 public:
  static Coefficient constant(const Mesh& mesh, Mat2 a);
  static Coefficient isotropic(const Mesh& mesh, double a) { return constant(mesh, Mat2::scalar(a)); }
  // Throws std::invalid_argument if any element matrix is not coercive.
  static Coefficient per_element(std::vector<Mat2> values);

  const Mat2& operator[](std::size_t e) const { return values_[e]; }
  std::size_t size() const { return values_.size(); }
  double alpha() const { return alpha_; }
  double linf_bound() const { return linf_; }
  bool symmetric() const;
  Coefficient symmetrized() const;
  Coefficient scaled(double s) const;

 private:
  explicit Coefficient(std::vector<Mat2> values);
  std::vector<Mat2> values_;
  double alpha_ = 0.0;
  double linf_ = 0.0;
};

// Numbering of the unknowns: a subset of mesh nodes, in increasing node order.
class DofMap {
 public:
  // Interior nodes (outer boundary and hole nodes eliminated).
  static DofMap free_nodes(MeshPtr mesh);
  static DofMap all_nodes(MeshPtr mesh);
  static DofMap from_mask(MeshPtr mesh, const std::vector<bool>& free);

  const MeshPtr& mesh() const { return mesh_; }
  std::size_t size() const { return dof_to_node_.size(); }
  int dof(std::size_t node) const { return node_to_dof_[node]; }
  int node(std::size_t dof) const { return dof_to_node_[dof]; }

  std::vector<double> restrict(const FieldFunction& u) const;
  // Constrained nodes get `fill`.
  FieldFunction prolong(const std::vector<double>& x, double fill = 0.0) const;

 private:
  MeshPtr mesh_;
  std::vector<int> node_to_dof_;
  std::vector<int> dof_to_node_;
};

// Compressed sparse row matrix over a DofMap.
class SparseOperator {
 public:
  struct Triplet {
    int row;
    int col;
    double value;
  };

  SparseOperator() = default;
  // Duplicates are summed in the order they appear.
  SparseOperator(DofMap dofs, std::vector<Triplet> triplets);
  static SparseOperator diagonal(DofMap dofs, const std::vector<double>& d);

  const DofMap& dofs() const { return dofs_; }
  std::size_t rows() const { return row_ptr_.empty() ? 0 : row_ptr_.size() - 1; }
  std::size_t nonzeros() const { return values_.size(); }

  void multiply(const std::vector<double>& x, std::vector<double>& y) const;
  std::vector<double> operator*(const std::vector<double>& x) const;
  double entry(int row, int col) const;
  std::vector<double> diagonal_entries() const;
  // Max |A - A^T| over stored entries.
  double asymmetry() const;
  double sum_of_entries() const;
  std::vector<double> row_sums() const;
  // this + s * other (same DofMap).
  SparseOperator plus(double s, const SparseOperator& other) const;
  SparseOperator scaled(double s) const;
  double quadratic_form(const std::vector<double>& x) const;

  // "row col value" lines, 0-based, 17 significant digits.
  void write_coordinate(std::ostream& os) const;

 private:
  DofMap dofs_;
  std::vector<std::size_t> row_ptr_;
  std::vector<int> cols_;
  std::vector<double> values_;
};

SparseOperator assemble_stiffness(const Mesh& mesh, const Coefficient& A, const DofMap& dofs);
SparseOperator assemble_stiffness(const MeshPtr& mesh, const Coefficient& A);
// Consistent P1 mass matrix (exact integration).
SparseOperator assemble_mass(const Mesh& mesh, const DofMap& dofs);
SparseOperator assemble_mass(const MeshPtr& mesh);
// Row sums of the full consistent mass matrix restricted to the dofs; these
// are the nodal quadrature weights.
std::vector<double> lumped_mass(const Mesh& mesh, const DofMap& dofs);
SparseOperator assemble_lumped_mass(const MeshPtr& mesh);
// Full-mesh product K u with all nodes active (no elimination).
std::vector<double> apply_stiffness(const Mesh& mesh, const Coefficient& A, const std::vector<double>& u);

struct CgStats {
  std::string label;
  int iterations = 0;
  double residual = 0.0;
  std::size_t unknowns = 0;
};

using CgStatsSink = std::function<void(const CgStats&)>;

struct CgOptions {
  double tol = 1e-10;
  // <= 0 selects 50 * sqrt(n).
  int maxit = 0;
  const std::vector<double>* x0 = nullptr;
  // Optional nonnegative diagonal added to the operator: solves (op + diag(shift)) x = rhs.
  const std::vector<double>* shift = nullptr;
  std::string label = "cg";
  CgStatsSink sink;
};

struct CgResult {
  std::vector<double> x;
  CgStats stats;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, int iterations, double residual)
      : std::runtime_error(what), iterations_(iterations), residual_(residual) {}
  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  int iterations_;
  double residual_;
};

class IndefiniteOperatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Jacobi-preconditioned conjugate gradients. Stops on ||op x - rhs|| <= tol ||rhs||.
CgResult solve_cg(const SparseOperator& op, const std::vector<double>& rhs, const CgOptions& opts = {});

struct EigenOptions {
  double tol = 1e-10;
  int maxit = 500;
  double cg_tol = 1e-12;
};

struct Eigenpair {
  double lambda = 0.0;
  FieldFunction phi;
  int iterations = 0;
  std::vector<double> rayleigh_history;
};

// Inverse power iteration on K x = lambda M x. phi is nonnegative in sum and
// normalized so that phi^T M phi = 1.
Eigenpair first_eigenpair(const SparseOperator& K, const SparseOperator& M, const EigenOptions& opts = {});

struct Norms {
  double l2 = 0.0;
  double h1semi = 0.0;
  double linf = 0.0;
  double energy = 0.0;
};

Norms norms(const FieldFunction& u, const Coefficient& A);
double l2_norm(const FieldFunction& u);
double h1_seminorm(const FieldFunction& u);
// Integral of A Du . Du over the mesh.
double energy(const FieldFunction& u, const Coefficient& A);
// Integral of A Du . Dv over the mesh.
double energy_product(const FieldFunction& u, const FieldFunction& v, const Coefficient& A);
// Integral of u^2 with the consistent mass.
double mass_product(const FieldFunction& u, const FieldFunction& v);

double dot(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace singhom
