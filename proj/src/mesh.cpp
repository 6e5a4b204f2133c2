#include "singhom/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "singhom/perforation.hpp"

namespace singhom {

std::string to_string(NodeClass c) {
  switch (c) {
    case NodeClass::interior:
      return "interior";
    case NodeClass::outer_boundary:
      return "outer_boundary";
    case NodeClass::hole:
      return "hole";
  }
  return "unknown";
}

MeshPtr build_rectangle_mesh(double width, double height, int nx, int ny) {
  if (nx < 2 || ny < 2) throw std::invalid_argument("build_rectangle_mesh: nx and ny must be >= 2");
  if (!(width > 0.0) || !(height > 0.0))
    throw std::invalid_argument("build_rectangle_mesh: width and height must be positive");

  auto mesh = std::shared_ptr<Mesh>(new Mesh());
  mesh->dim_ = 2;
  mesh->nx_ = nx;
  mesh->ny_ = ny;
  mesh->width_ = width;
  mesh->height_ = height;
  mesh->hx_ = width / (nx - 1);
  mesh->hy_ = height / (ny - 1);

  const auto n = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  mesh->nodes_.reserve(n);
  mesh->classes_.reserve(n);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      mesh->nodes_.push_back({i * mesh->hx_, j * mesh->hy_});
      const bool edge = i == 0 || j == 0 || i == nx - 1 || j == ny - 1;
      mesh->classes_.push_back(edge ? NodeClass::outer_boundary : NodeClass::interior);
    }
  }

  mesh->conn_.reserve(static_cast<std::size_t>(6) * (nx - 1) * (ny - 1));
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      const int a = j * nx + i;
      const int b = a + 1;
      const int c = a + nx + 1;
      const int d = a + nx;
      // Right angle at b for the lower triangle and at d for the upper one.
      mesh->conn_.insert(mesh->conn_.end(), {a, b, c});
      mesh->conn_.insert(mesh->conn_.end(), {a, c, d});
    }
  }
  return mesh;
}

MeshPtr build_interval_mesh(double length, int nx) {
  if (nx < 2) throw std::invalid_argument("build_interval_mesh: nx must be >= 2");
  if (!(length > 0.0)) throw std::invalid_argument("build_interval_mesh: length must be positive");
  auto mesh = std::shared_ptr<Mesh>(new Mesh());
  mesh->dim_ = 1;
  mesh->nx_ = nx;
  mesh->ny_ = 1;
  mesh->width_ = length;
  mesh->height_ = 0.0;
  mesh->hx_ = length / (nx - 1);
  mesh->hy_ = 0.0;
  for (int i = 0; i < nx; ++i) {
    mesh->nodes_.push_back({i * mesh->hx_, 0.0});
    mesh->classes_.push_back(i == 0 || i == nx - 1 ? NodeClass::outer_boundary : NodeClass::interior);
  }
  for (int i = 0; i + 1 < nx; ++i) mesh->conn_.insert(mesh->conn_.end(), {i, i + 1});
  return mesh;
}

double Mesh::element_measure(std::size_t e) const {
  const auto el = element(e);
  if (dim_ == 1) return std::abs(nodes_[el[1]].x - nodes_[el[0]].x);
  const Point& p0 = nodes_[el[0]];
  const Point& p1 = nodes_[el[1]];
  const Point& p2 = nodes_[el[2]];
  return 0.5 * std::abs((p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y));
}

std::array<Point, 3> Mesh::basis_gradients(std::size_t e) const {
  const auto el = element(e);
  std::array<Point, 3> g{};
  if (dim_ == 1) {
    const double len = nodes_[el[1]].x - nodes_[el[0]].x;
    g[0] = {-1.0 / len, 0.0};
    g[1] = {1.0 / len, 0.0};
    return g;
  }
  const Point& p0 = nodes_[el[0]];
  const Point& p1 = nodes_[el[1]];
  const Point& p2 = nodes_[el[2]];
  const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
  g[0] = {(p1.y - p2.y) / det, (p2.x - p1.x) / det};
  g[1] = {(p2.y - p0.y) / det, (p0.x - p2.x) / det};
  g[2] = {(p0.y - p1.y) / det, (p1.x - p0.x) / det};
  return g;
}

std::size_t Mesh::count(NodeClass c) const {
  return static_cast<std::size_t>(std::count(classes_.begin(), classes_.end(), c));
}

Mesh Mesh::with_classes(std::vector<NodeClass> classes) const {
  if (classes.size() != classes_.size())
    throw std::invalid_argument("Mesh::with_classes: size mismatch");
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const bool was_outer = classes_[i] == NodeClass::outer_boundary;
    const bool is_outer = classes[i] == NodeClass::outer_boundary;
    if (was_outer != is_outer)
      throw std::invalid_argument("Mesh::with_classes: outer boundary nodes cannot be reclassified");
  }
  Mesh copy = *this;
  copy.classes_ = std::move(classes);
  return copy;
}

FieldFunction::FieldFunction(MeshPtr m, std::vector<double> v) : mesh(std::move(m)), values(std::move(v)) {
  if (mesh && values.size() != mesh->num_nodes())
    throw std::invalid_argument("FieldFunction: value count does not match mesh node count");
}

FieldFunction FieldFunction::zeros(MeshPtr m) { return constant(std::move(m), 0.0); }

FieldFunction FieldFunction::constant(MeshPtr m, double c) {
  const auto n = m->num_nodes();
  return FieldFunction(std::move(m), std::vector<double>(n, c));
}

FieldFunction FieldFunction::rebind(MeshPtr other) const {
  if (other->num_nodes() != values.size())
    throw std::invalid_argument("FieldFunction::rebind: node count mismatch");
  return FieldFunction(std::move(other), values);
}

double FieldFunction::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double FieldFunction::min() const {
  return values.empty() ? 0.0 : *std::min_element(values.begin(), values.end());
}

double FieldFunction::max() const {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

namespace {

void check_same_layout(const FieldFunction& a, const FieldFunction& b) {
  if (a.values.size() != b.values.size()) throw std::invalid_argument("field size mismatch");
}

}  // namespace

FieldFunction operator-(const FieldFunction& a, const FieldFunction& b) {
  check_same_layout(a, b);
  FieldFunction out = a;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= b.values[i];
  return out;
}

FieldFunction operator+(const FieldFunction& a, const FieldFunction& b) {
  check_same_layout(a, b);
  FieldFunction out = a;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += b.values[i];
  return out;
}

FieldFunction operator*(double s, const FieldFunction& a) {
  FieldFunction out = a;
  for (double& v : out.values) v *= s;
  return out;
}

FieldFunction hadamard(const FieldFunction& a, const FieldFunction& b) {
  check_same_layout(a, b);
  FieldFunction out = a;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] *= b.values[i];
  return out;
}

FieldFunction apply_dirichlet(FieldFunction u) {
  for (std::size_t i = 0; i < u.values.size(); ++i)
    if (!u.mesh->is_free(i)) u.values[i] = 0.0;
  return u;
}

std::vector<Point> hole_centers(const Mesh& mesh, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("hole_centers: epsilon must be positive");
  const double period = 2.0 * epsilon;
  // Small slack so that width / period = 4 exactly in floating point still yields 4 cells.
  const int cx = static_cast<int>(std::floor(mesh.width() / period + 1e-9));
  const int cy = static_cast<int>(std::floor(mesh.height() / period + 1e-9));
  std::vector<Point> centers;
  centers.reserve(static_cast<std::size_t>(std::max(cx, 0)) * std::max(cy, 0));
  for (int j = 0; j < cy; ++j)
    for (int i = 0; i < cx; ++i) centers.push_back({(2 * i + 1) * epsilon, (2 * j + 1) * epsilon});
  return centers;
}

Perforation perforate(const MeshPtr& mesh, const PerforationSpec& spec) {
  if (mesh->dim() != 2) throw std::invalid_argument("perforate: only two-dimensional meshes are supported");
  spec.validate();
  const double r = spec.radius;
  const double h = mesh->h();
  if (spec.strategy == HoleStrategy::resolved && h > r / 2.0)
    throw std::invalid_argument("perforate: resolved strategy requires h <= r/2 (h = " + std::to_string(h) +
                                ", r = " + std::to_string(r) + ")");

  const auto centers = hole_centers(*mesh, spec.epsilon);
  for (const Point& c : centers) {
    const double to_edge = std::min({c.x, c.y, mesh->width() - c.x, mesh->height() - c.y});
    if (to_edge <= r) throw std::invalid_argument("perforate: hole intersects the outer boundary");
  }
  // Centers are 2*eps apart, so r < eps keeps the holes disjoint; validate() enforces it.

  std::vector<NodeClass> classes(mesh->node_classes().begin(), mesh->node_classes().end());
  Perforation out;
  out.radius = r;
  out.holes.reserve(centers.size());
  const int nx = mesh->nx();
  const int ny = mesh->ny();
  for (const Point& c : centers) {
    HoleInfo hole;
    hole.center = c;
    if (spec.strategy == HoleStrategy::collapsed) {
      const int i = static_cast<int>(std::lround(c.x / mesh->hx()));
      const int j = static_cast<int>(std::lround(c.y / mesh->hy()));
      const int idx = j * nx + i;
      if (classes[idx] != NodeClass::interior)
        throw std::invalid_argument("perforate: collapsed hole lands on a boundary or shared node");
      hole.nodes.push_back(idx);
    } else {
      const int i0 = std::max(0, static_cast<int>(std::floor((c.x - r) / mesh->hx())) - 1);
      const int i1 = std::min(nx - 1, static_cast<int>(std::ceil((c.x + r) / mesh->hx())) + 1);
      const int j0 = std::max(0, static_cast<int>(std::floor((c.y - r) / mesh->hy())) - 1);
      const int j1 = std::min(ny - 1, static_cast<int>(std::ceil((c.y + r) / mesh->hy())) + 1);
      for (int j = j0; j <= j1; ++j) {
        for (int i = i0; i <= i1; ++i) {
          const int idx = j * nx + i;
          const Point& p = mesh->node(idx);
          if (std::hypot(p.x - c.x, p.y - c.y) <= r) {
            if (classes[idx] != NodeClass::interior)
              throw std::invalid_argument("perforate: hole intersects the outer boundary or another hole");
            hole.nodes.push_back(idx);
          }
        }
      }
    }
    double rmax = 0.0;
    for (int idx : hole.nodes) {
      classes[idx] = NodeClass::hole;
      const Point& p = mesh->node(idx);
      rmax = std::max(rmax, std::hypot(p.x - c.x, p.y - c.y));
    }
    hole.resolved_radius_grid = rmax / h;
    out.holes.push_back(std::move(hole));
  }

  out.min_resolved_radius_grid = std::numeric_limits<double>::infinity();
  out.max_resolved_radius_grid = 0.0;
  for (const auto& hole : out.holes) {
    out.min_resolved_radius_grid = std::min(out.min_resolved_radius_grid, hole.resolved_radius_grid);
    out.max_resolved_radius_grid = std::max(out.max_resolved_radius_grid, hole.resolved_radius_grid);
  }
  if (out.holes.empty()) out.min_resolved_radius_grid = 0.0;
  out.mesh = std::make_shared<const Mesh>(mesh->with_classes(std::move(classes)));
  return out;
}

namespace {

double element_seminorm_sq(const Mesh& mesh, std::size_t e, const std::vector<double>& u) {
  const auto el = mesh.element(e);
  const auto g = mesh.basis_gradients(e);
  double gx = 0.0;
  double gy = 0.0;
  for (std::size_t a = 0; a < el.size(); ++a) {
    gx += u[el[a]] * g[a].x;
    gy += u[el[a]] * g[a].y;
  }
  return mesh.element_measure(e) * (gx * gx + gy * gy);
}

}  // namespace

FieldFunction extend_by_zero(const FieldFunction& u, ExtensionCheck* check) {
  const Mesh& mesh = *u.mesh;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!mesh.is_free(i) && u[i] != 0.0)
      throw std::logic_error("extend_by_zero: nonzero value " + std::to_string(u[i]) + " at constrained node " +
                             std::to_string(i) + " (" + to_string(mesh.node_class(i)) + ")");
  }
  if (check) {
    double full = 0.0;
    double perforated = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
      const double s = element_seminorm_sq(mesh, e, u.values);
      full += s;
      const auto el = mesh.element(e);
      const bool inside_hole = std::all_of(el.begin(), el.end(),
                                           [&](int n) { return mesh.node_class(n) == NodeClass::hole; });
      // Elements entirely inside a hole are not part of the perforated domain.
      perforated += inside_hole ? 0.0 : s;
    }
    check->h1semi_full = std::sqrt(full);
    check->h1semi_perforated = std::sqrt(perforated);
  }
  return u;
}

}  // namespace singhom
