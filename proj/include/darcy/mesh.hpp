#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace darcy {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

struct Rect {
  double x0 = -1.0, x1 = 1.0, y0 = -1.0, y1 = 1.0;
  double area() const { return (x1 - x0) * (y1 - y0); }
};

/// Local edges are numbered counterclockwise: 0 bottom, 1 right, 2 top, 3 left.
struct BoundaryEdge {
  int element;
  int local_edge;
  Vec2 normal;
};

/// An edge shared by two elements. `plus` is the element with the higher
/// index; `normal` is the outward normal of `plus`. Jumps are plus minus
/// minus.
struct InteriorEdge {
  int plus;
  int minus;
  int plus_edge;
  int minus_edge;
  Vec2 normal;
  double length;
};

/// Edge on the material interface. `normal` points from subdomain 1 into
/// subdomain 2 and `tangent` is `normal` rotated by +90 degrees.
struct InterfaceEdge {
  int element1;
  int element2;
  std::vector<int> nodes;
  Vec2 normal;
  Vec2 tangent;
};

struct InterfaceNode {
  int node;
  Vec2 normal;
  Vec2 tangent;
};

/// Structured quadrilateral mesh of Q1 (4-node) or Q2 (9-node) elements.
///
/// Nodes live on a (order*nx+1) x (order*ny+1) lattice numbered
/// lexicographically by (y, x). Element connectivity starts at the lower-left
/// corner and runs counterclockwise over the corners, then (Q2 only) the
/// mid-edge nodes of edges 0..3, then the centroid.
struct QuadMesh {
  int order = 1;
  int nx = 0;
  int ny = 0;
  Rect bounds;
  std::optional<double> interface_x;  // set only when Γ cuts the interior

  std::vector<Vec2> nodes;
  std::vector<int> connectivity;  // nodes_per_element() entries per element
  std::vector<int> elem_subdomain;
  std::vector<BoundaryEdge> boundary_edges;
  std::vector<InteriorEdge> interior_edges;
  std::vector<InterfaceEdge> interface_edges;
  std::vector<int> interface_nodes;

  int nodes_per_element() const { return order == 1 ? 4 : 9; }
  int num_elements() const { return nx * ny; }
  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int lattice_nx() const { return order * nx + 1; }
  int lattice_ny() const { return order * ny + 1; }

  std::span<const int> element_nodes(int e) const {
    return {connectivity.data() + static_cast<std::size_t>(e) * nodes_per_element(),
            static_cast<std::size_t>(nodes_per_element())};
  }

  double hx() const { return (bounds.x1 - bounds.x0) / nx; }
  double hy() const { return (bounds.y1 - bounds.y0) / ny; }
  /// Mesh parameter used in convergence tables: the element width.
  double h() const { return hx(); }

  bool on_boundary(int node) const {
    const int mx = lattice_nx(), my = lattice_ny();
    const int i = node % mx, j = node / mx;
    return i == 0 || j == 0 || i == mx - 1 || j == my - 1;
  }

  bool on_interface(int node) const {
    if (!interface_x) return false;
    return node % lattice_nx() == interface_lattice_col;
  }

  /// Outward normals of every boundary side the node lies on (two at corners).
  std::vector<Vec2> boundary_normals(int node) const {
    const int mx = lattice_nx(), my = lattice_ny();
    const int i = node % mx, j = node / mx;
    std::vector<Vec2> out;
    if (i == 0) out.emplace_back(-1.0, 0.0);
    if (i == mx - 1) out.emplace_back(1.0, 0.0);
    if (j == 0) out.emplace_back(0.0, -1.0);
    if (j == my - 1) out.emplace_back(0.0, 1.0);
    return out;
  }

  int interface_lattice_col = -1;
};

/// Reference (lattice offset) position of each local node inside the
/// element's (order+1) x (order+1) sub-lattice.
inline std::span<const std::array<int, 2>> local_lattice_offsets(int order) {
  static constexpr std::array<std::array<int, 2>, 4> q1{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  static constexpr std::array<std::array<int, 2>, 9> q2{
      {{0, 0}, {2, 0}, {2, 2}, {0, 2}, {1, 0}, {2, 1}, {1, 2}, {0, 1}, {1, 1}}};
  if (order == 1) return q1;
  if (order == 2) return q2;
  throw std::invalid_argument("element order must be 1 or 2");
}

/// Local node indices along local edge `edge`, ordered counterclockwise
/// with respect to the element.
inline std::vector<int> local_edge_nodes(int order, int edge) {
  static constexpr std::array<std::array<int, 2>, 4> corners{{{0, 1}, {1, 2}, {2, 3}, {3, 0}}};
  const auto [a, b] = corners.at(static_cast<std::size_t>(edge));
  if (order == 1) return {a, b};
  return {a, 4 + edge, b};
}

inline QuadMesh build_structured_mesh(int nx, int ny, const Rect& bounds, double interface_x,
                                      int order) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("element counts must be positive");
  if (order != 1 && order != 2) throw std::invalid_argument("element order must be 1 or 2");
  if (!(bounds.x1 > bounds.x0) || !(bounds.y1 > bounds.y0))
    throw std::invalid_argument("degenerate bounding rectangle");

  QuadMesh mesh;
  mesh.order = order;
  mesh.nx = nx;
  mesh.ny = ny;
  mesh.bounds = bounds;

  const double hx = mesh.hx();
  const double tol = 1e-9 * hx;
  int interface_col = -1;  // element column index of Γ, in [1, nx-1]
  if (interface_x > bounds.x0 + tol && interface_x < bounds.x1 - tol) {
    const double k = (interface_x - bounds.x0) / hx;
    const double kr = std::round(k);
    if (std::abs(k - kr) * hx > tol)
      throw std::invalid_argument("interface abscissa is not aligned with a mesh line");
    interface_col = static_cast<int>(kr);
    mesh.interface_x = bounds.x0 + interface_col * hx;
    mesh.interface_lattice_col = order * interface_col;
  }

  const int mx = mesh.lattice_nx(), my = mesh.lattice_ny();
  const double dx = (bounds.x1 - bounds.x0) / (mx - 1);
  const double dy = (bounds.y1 - bounds.y0) / (my - 1);
  mesh.nodes.reserve(static_cast<std::size_t>(mx) * my);
  for (int j = 0; j < my; ++j)
    for (int i = 0; i < mx; ++i)
      mesh.nodes.emplace_back(i == mx - 1 ? bounds.x1 : bounds.x0 + i * dx,
                              j == my - 1 ? bounds.y1 : bounds.y0 + j * dy);

  const auto offsets = local_lattice_offsets(order);
  mesh.connectivity.reserve(static_cast<std::size_t>(nx) * ny * offsets.size());
  mesh.elem_subdomain.reserve(static_cast<std::size_t>(nx) * ny);
  for (int ej = 0; ej < ny; ++ej) {
    for (int ei = 0; ei < nx; ++ei) {
      for (const auto& [a, b] : offsets)
        mesh.connectivity.push_back((order * ej + b) * mx + order * ei + a);
      const double xc = bounds.x0 + (ei + 0.5) * hx;
      mesh.elem_subdomain.push_back(xc < interface_x ? 1 : 2);
    }
  }

  for (int ei = 0; ei < nx; ++ei) {
    mesh.boundary_edges.push_back({ei, 0, Vec2(0.0, -1.0)});
    mesh.boundary_edges.push_back({(ny - 1) * nx + ei, 2, Vec2(0.0, 1.0)});
  }
  for (int ej = 0; ej < ny; ++ej) {
    mesh.boundary_edges.push_back({ej * nx, 3, Vec2(-1.0, 0.0)});
    mesh.boundary_edges.push_back({ej * nx + nx - 1, 1, Vec2(1.0, 0.0)});
  }

  const double hy = mesh.hy();
  for (int ej = 0; ej < ny; ++ej) {
    for (int ei = 0; ei < nx; ++ei) {
      const int e = ej * nx + ei;
      if (ei + 1 < nx) mesh.interior_edges.push_back({e + 1, e, 3, 1, Vec2(-1.0, 0.0), hy});
      if (ej + 1 < ny) mesh.interior_edges.push_back({e + nx, e, 0, 2, Vec2(0.0, -1.0), hx});
    }
  }

  if (interface_col > 0) {
    const int col = mesh.interface_lattice_col;
    for (int j = 0; j < my; ++j) mesh.interface_nodes.push_back(j * mx + col);
    for (int ej = 0; ej < ny; ++ej) {
      const int e1 = ej * nx + interface_col - 1;
      InterfaceEdge edge{e1, e1 + 1, {}, Vec2(1.0, 0.0), Vec2(0.0, 1.0)};
      const auto conn = mesh.element_nodes(e1);
      for (int l : local_edge_nodes(order, 1)) edge.nodes.push_back(conn[static_cast<std::size_t>(l)]);
      mesh.interface_edges.push_back(std::move(edge));
    }
  }
  return mesh;
}

/// One entry per interface node with the unit normal (Ω1 → Ω2) and tangent.
inline std::vector<InterfaceNode> classify_interface(const QuadMesh& mesh) {
  std::vector<InterfaceNode> out;
  out.reserve(mesh.interface_nodes.size());
  for (int node : mesh.interface_nodes) out.push_back({node, Vec2(1.0, 0.0), Vec2(0.0, 1.0)});
  return out;
}

/// Subdomain a node belongs to; interface nodes report 2, the reference side.
inline int node_subdomain(const QuadMesh& mesh, int node) {
  if (!mesh.interface_x) return mesh.elem_subdomain.empty() ? 1 : mesh.elem_subdomain.front();
  if (mesh.on_interface(node)) return 2;
  return mesh.nodes[static_cast<std::size_t>(node)].x() < *mesh.interface_x ? 1 : 2;
}

/// Debug listing: "id x y" per node, then "id n0 n1 ... tag" per element.
inline void write_mesh_dump(std::ostream& os, const QuadMesh& mesh) {
  os << "nodes " << mesh.num_nodes() << '\n';
  for (int i = 0; i < mesh.num_nodes(); ++i)
    os << i << ' ' << mesh.nodes[static_cast<std::size_t>(i)].x() << ' '
       << mesh.nodes[static_cast<std::size_t>(i)].y() << '\n';
  os << "elements " << mesh.num_elements() << '\n';
  for (int e = 0; e < mesh.num_elements(); ++e) {
    os << e;
    for (int n : mesh.element_nodes(e)) os << ' ' << n;
    os << ' ' << mesh.elem_subdomain[static_cast<std::size_t>(e)] << '\n';
  }
}

}  // namespace darcy
