#include "singhom/fem.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace singhom {

double Mat2::min_sym_eigenvalue() const {
  const double off = 0.5 * (a12 + a21);
  const double mean = 0.5 * (a11 + a22);
  const double diff = 0.5 * (a11 - a22);
  return mean - std::sqrt(diff * diff + off * off);
}

double Mat2::max_abs_entry() const {
  return std::max({std::abs(a11), std::abs(a12), std::abs(a21), std::abs(a22)});
}

Coefficient::Coefficient(std::vector<Mat2> values) : values_(std::move(values)) {
  if (values_.empty()) throw std::invalid_argument("Coefficient: no elements");
  alpha_ = std::numeric_limits<double>::infinity();
  linf_ = 0.0;
  for (std::size_t e = 0; e < values_.size(); ++e) {
    const Mat2& m = values_[e];
    const double lo = m.min_sym_eigenvalue();
    if (!std::isfinite(lo) || !(lo > 0.0)) {
      std::ostringstream msg;
      msg << "Coefficient: element " << e << " is not coercive (smallest eigenvalue of symmetric part " << lo
          << ")";
      throw std::invalid_argument(msg.str());
    }
    alpha_ = std::min(alpha_, lo);
    linf_ = std::max(linf_, m.max_abs_entry());
  }
}

Coefficient Coefficient::constant(const Mesh& mesh, Mat2 a) {
  if (mesh.dim() == 1) a = Mat2::scalar(a.a11);
  return Coefficient(std::vector<Mat2>(mesh.num_elements(), a));
}

Coefficient Coefficient::per_element(std::vector<Mat2> values) { return Coefficient(std::move(values)); }

bool Coefficient::symmetric() const {
  return std::all_of(values_.begin(), values_.end(), [](const Mat2& m) { return m.symmetric(); });
}

Coefficient Coefficient::symmetrized() const {
  auto v = values_;
  for (Mat2& m : v) {
    const double off = 0.5 * (m.a12 + m.a21);
    m.a12 = off;
    m.a21 = off;
  }
  return Coefficient(std::move(v));
}

Coefficient Coefficient::scaled(double s) const {
  auto v = values_;
  for (Mat2& m : v) {
    m.a11 *= s;
    m.a12 *= s;
    m.a21 *= s;
    m.a22 *= s;
  }
  return Coefficient(std::move(v));
}

DofMap DofMap::free_nodes(MeshPtr mesh) {
  std::vector<bool> mask(mesh->num_nodes());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = mesh->is_free(i);
  return from_mask(std::move(mesh), mask);
}

DofMap DofMap::all_nodes(MeshPtr mesh) {
  std::vector<bool> mask(mesh->num_nodes(), true);
  return from_mask(std::move(mesh), mask);
}

DofMap DofMap::from_mask(MeshPtr mesh, const std::vector<bool>& free) {
  if (free.size() != mesh->num_nodes()) throw std::invalid_argument("DofMap: mask size mismatch");
  DofMap map;
  map.node_to_dof_.assign(free.size(), -1);
  for (std::size_t i = 0; i < free.size(); ++i) {
    if (free[i]) {
      map.node_to_dof_[i] = static_cast<int>(map.dof_to_node_.size());
      map.dof_to_node_.push_back(static_cast<int>(i));
    }
  }
  map.mesh_ = std::move(mesh);
  return map;
}

std::vector<double> DofMap::restrict(const FieldFunction& u) const {
  if (u.size() != node_to_dof_.size()) throw std::invalid_argument("DofMap::restrict: size mismatch");
  std::vector<double> x(size());
  for (std::size_t d = 0; d < x.size(); ++d) x[d] = u[dof_to_node_[d]];
  return x;
}

FieldFunction DofMap::prolong(const std::vector<double>& x, double fill) const {
  if (x.size() != size()) throw std::invalid_argument("DofMap::prolong: size mismatch");
  std::vector<double> v(node_to_dof_.size(), fill);
  for (std::size_t d = 0; d < x.size(); ++d) v[dof_to_node_[d]] = x[d];
  return FieldFunction(mesh_, std::move(v));
}

SparseOperator::SparseOperator(DofMap dofs, std::vector<Triplet> triplets) : dofs_(std::move(dofs)) {
  const std::size_t n = dofs_.size();
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  row_ptr_.assign(n + 1, 0);
  for (std::size_t k = 0; k < triplets.size();) {
    const Triplet& t = triplets[k];
    if (t.row < 0 || t.col < 0 || static_cast<std::size_t>(t.row) >= n || static_cast<std::size_t>(t.col) >= n)
      throw std::out_of_range("SparseOperator: triplet index out of range");
    double sum = 0.0;
    std::size_t m = k;
    for (; m < triplets.size() && triplets[m].row == t.row && triplets[m].col == t.col; ++m) sum += triplets[m].value;
    cols_.push_back(t.col);
    values_.push_back(sum);
    ++row_ptr_[t.row + 1];
    k = m;
  }
  for (std::size_t i = 0; i < n; ++i) row_ptr_[i + 1] += row_ptr_[i];
}

SparseOperator SparseOperator::diagonal(DofMap dofs, const std::vector<double>& d) {
  if (d.size() != dofs.size()) throw std::invalid_argument("SparseOperator::diagonal: size mismatch");
  std::vector<Triplet> t;
  t.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) t.push_back({static_cast<int>(i), static_cast<int>(i), d[i]});
  return SparseOperator(std::move(dofs), std::move(t));
}

void SparseOperator::multiply(const std::vector<double>& x, std::vector<double>& y) const {
  const std::size_t n = rows();
  y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k] * x[cols_[k]];
    y[i] = s;
  }
}

std::vector<double> SparseOperator::operator*(const std::vector<double>& x) const {
  std::vector<double> y;
  multiply(x, y);
  return y;
}

double SparseOperator::entry(int row, int col) const {
  const auto begin = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row]);
  const auto end = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row + 1]);
  const auto it = std::lower_bound(begin, end, col);
  if (it == end || *it != col) return 0.0;
  return values_[static_cast<std::size_t>(it - cols_.begin())];
}

std::vector<double> SparseOperator::diagonal_entries() const {
  std::vector<double> d(rows());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = entry(static_cast<int>(i), static_cast<int>(i));
  return d;
}

double SparseOperator::asymmetry() const {
  double m = 0.0;
  for (std::size_t i = 0; i < rows(); ++i)
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      m = std::max(m, std::abs(values_[k] - entry(cols_[k], static_cast<int>(i))));
  return m;
}

double SparseOperator::sum_of_entries() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

std::vector<double> SparseOperator::row_sums() const {
  std::vector<double> s(rows(), 0.0);
  for (std::size_t i = 0; i < rows(); ++i)
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s[i] += values_[k];
  return s;
}

SparseOperator SparseOperator::plus(double s, const SparseOperator& other) const {
  if (other.rows() != rows()) throw std::invalid_argument("SparseOperator::plus: size mismatch");
  std::vector<Triplet> t;
  t.reserve(nonzeros() + other.nonzeros());
  for (std::size_t i = 0; i < rows(); ++i) {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      t.push_back({static_cast<int>(i), cols_[k], values_[k]});
    for (std::size_t k = other.row_ptr_[i]; k < other.row_ptr_[i + 1]; ++k)
      t.push_back({static_cast<int>(i), other.cols_[k], s * other.values_[k]});
  }
  return SparseOperator(dofs_, std::move(t));
}

SparseOperator SparseOperator::scaled(double s) const {
  SparseOperator out = *this;
  for (double& v : out.values_) v *= s;
  return out;
}

double SparseOperator::quadratic_form(const std::vector<double>& x) const { return dot(x, (*this) * x); }

void SparseOperator::write_coordinate(std::ostream& os) const {
  const auto old = os.precision(17);
  for (std::size_t i = 0; i < rows(); ++i)
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) os << i << ' ' << cols_[k] << ' ' << values_[k] << '\n';
  os.precision(old);
}

namespace {

// Local stiffness of element e; exact because P1 gradients are constant.
void local_stiffness(const Mesh& mesh, std::size_t e, const Mat2& a, double (&k)[3][3]) {
  const auto g = mesh.basis_gradients(e);
  const double area = mesh.element_measure(e);
  const std::size_t n = mesh.nodes_per_element();
  const bool sym = a.symmetric();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (sym && j < i) {
        k[i][j] = k[j][i];
        continue;
      }
      // (A grad phi_j) . grad phi_i
      const double ax = a.a11 * g[j].x + a.a12 * g[j].y;
      const double ay = a.a21 * g[j].x + a.a22 * g[j].y;
      k[i][j] = area * (ax * g[i].x + ay * g[i].y);
    }
  }
}

double local_mass(const Mesh& mesh, std::size_t e, std::size_t i, std::size_t j) {
  const double d = static_cast<double>(mesh.dim());
  return mesh.element_measure(e) * (i == j ? 2.0 : 1.0) / ((d + 1.0) * (d + 2.0));
}

void check_coefficient(const Mesh& mesh, const Coefficient& A) {
  if (A.size() != mesh.num_elements())
    throw std::invalid_argument("coefficient size does not match the mesh element count");
}

}  // namespace

SparseOperator assemble_stiffness(const Mesh& mesh, const Coefficient& A, const DofMap& dofs) {
  check_coefficient(mesh, A);
  std::vector<SparseOperator::Triplet> t;
  const std::size_t npe = mesh.nodes_per_element();
  t.reserve(mesh.num_elements() * npe * npe);
  double k[3][3];
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    local_stiffness(mesh, e, A[e], k);
    const auto el = mesh.element(e);
    for (std::size_t i = 0; i < npe; ++i) {
      const int r = dofs.dof(el[i]);
      if (r < 0) continue;
      for (std::size_t j = 0; j < npe; ++j) {
        const int c = dofs.dof(el[j]);
        if (c < 0) continue;
        t.push_back({r, c, k[i][j]});
      }
    }
  }
  return SparseOperator(dofs, std::move(t));
}

SparseOperator assemble_stiffness(const MeshPtr& mesh, const Coefficient& A) {
  return assemble_stiffness(*mesh, A, DofMap::free_nodes(mesh));
}

SparseOperator assemble_mass(const Mesh& mesh, const DofMap& dofs) {
  std::vector<SparseOperator::Triplet> t;
  const std::size_t npe = mesh.nodes_per_element();
  t.reserve(mesh.num_elements() * npe * npe);
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto el = mesh.element(e);
    for (std::size_t i = 0; i < npe; ++i) {
      const int r = dofs.dof(el[i]);
      if (r < 0) continue;
      for (std::size_t j = 0; j < npe; ++j) {
        const int c = dofs.dof(el[j]);
        if (c < 0) continue;
        t.push_back({r, c, local_mass(mesh, e, i, j)});
      }
    }
  }
  return SparseOperator(dofs, std::move(t));
}

SparseOperator assemble_mass(const MeshPtr& mesh) { return assemble_mass(*mesh, DofMap::free_nodes(mesh)); }

std::vector<double> lumped_mass(const Mesh& mesh, const DofMap& dofs) {
  std::vector<double> m(dofs.size(), 0.0);
  const std::size_t npe = mesh.nodes_per_element();
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto el = mesh.element(e);
    for (std::size_t i = 0; i < npe; ++i) {
      const int r = dofs.dof(el[i]);
      if (r < 0) continue;
      for (std::size_t j = 0; j < npe; ++j) m[r] += local_mass(mesh, e, i, j);
    }
  }
  return m;
}

SparseOperator assemble_lumped_mass(const MeshPtr& mesh) {
  auto dofs = DofMap::free_nodes(mesh);
  auto m = lumped_mass(*mesh, dofs);
  return SparseOperator::diagonal(std::move(dofs), m);
}

std::vector<double> apply_stiffness(const Mesh& mesh, const Coefficient& A, const std::vector<double>& u) {
  check_coefficient(mesh, A);
  std::vector<double> y(mesh.num_nodes(), 0.0);
  double k[3][3];
  const std::size_t npe = mesh.nodes_per_element();
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    local_stiffness(mesh, e, A[e], k);
    const auto el = mesh.element(e);
    for (std::size_t i = 0; i < npe; ++i)
      for (std::size_t j = 0; j < npe; ++j) y[el[i]] += k[i][j] * u[el[j]];
  }
  return y;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

CgResult solve_cg(const SparseOperator& op, const std::vector<double>& rhs, const CgOptions& opts) {
  const std::size_t n = op.rows();
  if (rhs.size() != n) throw std::invalid_argument("solve_cg: rhs size mismatch");
  CgResult out;
  out.stats.label = opts.label;
  out.stats.unknowns = n;
  out.x.assign(n, 0.0);
  const double bnorm = std::sqrt(dot(rhs, rhs));
  auto finish = [&]() {
    if (opts.sink) opts.sink(out.stats);
    return out;
  };
  if (bnorm == 0.0) return finish();

  const int maxit = opts.maxit > 0 ? opts.maxit
                                   : std::max(1, static_cast<int>(std::ceil(50.0 * std::sqrt(static_cast<double>(n)))));
  if (opts.x0 && opts.x0->size() == n) out.x = *opts.x0;

  auto& x = out.x;
  std::vector<double> r(n);
  std::vector<double> ap(n);
  const std::vector<double>* shift = opts.shift && opts.shift->size() == n ? opts.shift : nullptr;
  auto apply = [&](const std::vector<double>& v, std::vector<double>& y) {
    op.multiply(v, y);
    if (shift)
      for (std::size_t i = 0; i < n; ++i) y[i] += (*shift)[i] * v[i];
  };
  apply(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - ap[i];
  auto diag = op.diagonal_entries();
  if (shift)
    for (std::size_t i = 0; i < n; ++i) diag[i] += (*shift)[i];
  std::vector<double> inv_diag(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(diag[i] > 0.0)) throw IndefiniteOperatorError("solve_cg: nonpositive diagonal entry at row " + std::to_string(i));
    inv_diag[i] = 1.0 / diag[i];
  }
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  std::vector<double> p = z;
  double rz = dot(r, z);
  double rnorm = std::sqrt(dot(r, r));
  int it = 0;
  while (rnorm > opts.tol * bnorm) {
    if (it >= maxit) {
      out.stats.iterations = it;
      out.stats.residual = rnorm / bnorm;
      if (opts.sink) opts.sink(out.stats);
      std::ostringstream msg;
      msg << "solve_cg: no convergence after " << it << " iterations (relative residual " << rnorm / bnorm << ")";
      throw ConvergenceError(msg.str(), it, rnorm / bnorm);
    }
    apply(p, ap);
    const double curvature = dot(p, ap);
    if (!(curvature > 0.0)) {
      throw IndefiniteOperatorError("solve_cg: nonpositive curvature " + std::to_string(curvature) +
                                    " at iteration " + std::to_string(it));
    }
    const double step = rz / curvature;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += step * p[i];
      r[i] -= step * ap[i];
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    rnorm = std::sqrt(dot(r, r));
    ++it;
  }
  out.stats.iterations = it;
  out.stats.residual = rnorm / bnorm;
  return finish();
}

Eigenpair first_eigenpair(const SparseOperator& K, const SparseOperator& M, const EigenOptions& opts) {
  const std::size_t n = K.rows();
  if (M.rows() != n) throw std::invalid_argument("first_eigenpair: K and M sizes differ");
  if (n == 0) throw std::invalid_argument("first_eigenpair: no unknowns");
  Eigenpair out;
  std::vector<double> x(n, 1.0);
  std::vector<double> mx = M * x;
  double scale = 1.0 / std::sqrt(dot(x, mx));
  for (double& v : x) v *= scale;
  std::vector<double> kx;
  CgOptions cg;
  cg.tol = opts.cg_tol;
  cg.label = "eigen";
  for (int it = 1; it <= opts.maxit; ++it) {
    mx = M * x;
    cg.x0 = &x;
    auto y = solve_cg(K, mx, cg).x;
    const auto my = M * y;
    const double ymy = dot(y, my);
    scale = 1.0 / std::sqrt(ymy);
    for (double& v : y) v *= scale;
    kx = K * y;
    const double lambda = dot(y, kx);  // y^T M y = 1
    out.rayleigh_history.push_back(lambda);
    // Eigen-residual ||K y - lambda M y|| / ||lambda M y||.
    double res = 0.0;
    double ref = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double mi = my[i] * scale;
      res += (kx[i] - lambda * mi) * (kx[i] - lambda * mi);
      ref += (lambda * mi) * (lambda * mi);
    }
    x = std::move(y);
    if (std::sqrt(res / ref) <= opts.tol) {
      double sum = std::accumulate(x.begin(), x.end(), 0.0);
      if (sum < 0.0)
        for (double& v : x) v = -v;
      out.lambda = lambda;
      out.iterations = it;
      out.phi = K.dofs().prolong(x);
      return out;
    }
  }
  std::ostringstream msg;
  msg << "first_eigenpair: no convergence after " << opts.maxit << " iterations; Rayleigh quotients:";
  const std::size_t start = out.rayleigh_history.size() > 5 ? out.rayleigh_history.size() - 5 : 0;
  for (std::size_t i = start; i < out.rayleigh_history.size(); ++i) msg << ' ' << out.rayleigh_history[i];
  throw ConvergenceError(msg.str(), opts.maxit, out.rayleigh_history.empty() ? 0.0 : out.rayleigh_history.back());
}

double mass_product(const FieldFunction& u, const FieldFunction& v) {
  const Mesh& mesh = *u.mesh;
  const std::size_t npe = mesh.nodes_per_element();
  double s = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto el = mesh.element(e);
    for (std::size_t i = 0; i < npe; ++i)
      for (std::size_t j = 0; j < npe; ++j) s += local_mass(mesh, e, i, j) * u[el[i]] * v[el[j]];
  }
  return s;
}

double energy_product(const FieldFunction& u, const FieldFunction& v, const Coefficient& A) {
  const Mesh& mesh = *u.mesh;
  check_coefficient(mesh, A);
  const std::size_t npe = mesh.nodes_per_element();
  double s = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto el = mesh.element(e);
    const auto g = mesh.basis_gradients(e);
    double ux = 0.0, uy = 0.0, vx = 0.0, vy = 0.0;
    for (std::size_t a = 0; a < npe; ++a) {
      ux += u[el[a]] * g[a].x;
      uy += u[el[a]] * g[a].y;
      vx += v[el[a]] * g[a].x;
      vy += v[el[a]] * g[a].y;
    }
    const Mat2& m = A[e];
    s += mesh.element_measure(e) * ((m.a11 * ux + m.a12 * uy) * vx + (m.a21 * ux + m.a22 * uy) * vy);
  }
  return s;
}

double energy(const FieldFunction& u, const Coefficient& A) { return energy_product(u, u, A); }

double l2_norm(const FieldFunction& u) { return std::sqrt(std::max(0.0, mass_product(u, u))); }

double h1_seminorm(const FieldFunction& u) {
  const Mesh& mesh = *u.mesh;
  const std::size_t npe = mesh.nodes_per_element();
  double s = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto el = mesh.element(e);
    const auto g = mesh.basis_gradients(e);
    double gx = 0.0, gy = 0.0;
    for (std::size_t a = 0; a < npe; ++a) {
      gx += u[el[a]] * g[a].x;
      gy += u[el[a]] * g[a].y;
    }
    s += mesh.element_measure(e) * (gx * gx + gy * gy);
  }
  return std::sqrt(s);
}

Norms norms(const FieldFunction& u, const Coefficient& A) {
  Norms n;
  n.l2 = l2_norm(u);
  n.h1semi = h1_seminorm(u);
  n.linf = u.max_abs();
  n.energy = energy(u, A);
  return n;
}

}  // namespace singhom
