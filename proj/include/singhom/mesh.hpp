#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace singhom {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

enum class NodeClass : std::uint8_t { interior, outer_boundary, hole };

std::string to_string(NodeClass c);

class Mesh;
using MeshPtr = std::shared_ptr<const Mesh>;

// Structured simplicial mesh of an interval (dim 1) or a rectangle (dim 2).
//
// Node indices are row-major from the lower-left corner: node (i, j) has
// index j * nx + i. Each rectangle cell [i, i+1] x [j, j+1] is split along
// its lower-left to upper-right diagonal into two right triangles, so the
// P1 stiffness matrix of a diagonal coefficient is an M-matrix.
class Mesh {
 public:
  int dim() const { return dim_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double width() const { return width_; }
  double height() const { return height_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  // Grid spacing; for rectangles with hx != hy this is the larger of the two.
  double h() const { return hx_ > hy_ ? hx_ : hy_; }

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_elements() const { return conn_.size() / nodes_per_element(); }
  std::size_t nodes_per_element() const { return static_cast<std::size_t>(dim_) + 1; }

  std::span<const Point> nodes() const { return nodes_; }
  const Point& node(std::size_t i) const { return nodes_[i]; }
  std::span<const int> element(std::size_t e) const {
    return {conn_.data() + e * nodes_per_element(), nodes_per_element()};
  }
  std::span<const NodeClass> node_classes() const { return classes_; }
  NodeClass node_class(std::size_t i) const { return classes_[i]; }
  double element_measure(std::size_t e) const;
  // Gradients of the P1 basis functions of element e (y unused in 1-D).
  std::array<Point, 3> basis_gradients(std::size_t e) const;

  std::size_t count(NodeClass c) const;
  bool is_free(std::size_t i) const { return classes_[i] == NodeClass::interior; }

  // Copy with a different node classification. Outer boundary nodes must
  // keep their class.
  Mesh with_classes(std::vector<NodeClass> classes) const;

  friend MeshPtr build_rectangle_mesh(double width, double height, int nx, int ny);
  friend MeshPtr build_interval_mesh(double length, int nx);

 private:
  Mesh() = default;

  int dim_ = 2;
  int nx_ = 0;
  int ny_ = 1;
  double width_ = 0.0;
  double height_ = 0.0;
  double hx_ = 0.0;
  double hy_ = 0.0;
  std::vector<Point> nodes_;
  std::vector<int> conn_;
  std::vector<NodeClass> classes_;
};

// nx, ny are node counts per axis (>= 2).
MeshPtr build_rectangle_mesh(double width, double height, int nx, int ny);
MeshPtr build_interval_mesh(double length, int nx);

// Nodal scalar field. The mesh is shared and never mutated.
struct FieldFunction {
  MeshPtr mesh;
  std::vector<double> values;

  FieldFunction() = default;
  FieldFunction(MeshPtr m, std::vector<double> v);
  static FieldFunction zeros(MeshPtr m);
  static FieldFunction constant(MeshPtr m, double c);

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }

  // Same values on another mesh with the same node layout (e.g. a perforated copy).
  FieldFunction rebind(MeshPtr other) const;
  double max_abs() const;
  double min() const;
  double max() const;
};

FieldFunction operator-(const FieldFunction& a, const FieldFunction& b);
FieldFunction operator+(const FieldFunction& a, const FieldFunction& b);
FieldFunction operator*(double s, const FieldFunction& a);
// Nodewise product.
FieldFunction hadamard(const FieldFunction& a, const FieldFunction& b);

// Zeroes the values on outer boundary and hole nodes.
FieldFunction apply_dirichlet(FieldFunction u);

struct PerforationSpec;

struct HoleInfo {
  Point center;
  std::vector<int> nodes;
  double resolved_radius_grid = 0.0;  // max node distance from center / h
};

struct Perforation {
  MeshPtr mesh;
  std::vector<HoleInfo> holes;
  double radius = 0.0;
  double min_resolved_radius_grid = 0.0;
  double max_resolved_radius_grid = 0.0;

  std::size_t hole_count() const { return holes.size(); }
};

// Cell-centered lattice of hole centers with period 2*epsilon.
std::vector<Point> hole_centers(const Mesh& mesh, double epsilon);

// Reclassifies nodes as holes. Throws std::invalid_argument if the radius is
// not resolvable by the strategy or a hole touches the outer boundary or
// another hole.
Perforation perforate(const MeshPtr& mesh, const PerforationSpec& spec);

struct ExtensionCheck {
  double h1semi_full = 0.0;
  double h1semi_perforated = 0.0;
};

// Extension by zero from the perforated domain to the whole rectangle. The
// nodal vector is returned unchanged; throws std::logic_error if a hole or
// outer boundary node carries a nonzero value.
FieldFunction extend_by_zero(const FieldFunction& u, ExtensionCheck* check = nullptr);

}  // namespace singhom
