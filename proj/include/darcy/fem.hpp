#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "darcy/mesh.hpp"

namespace darcy {

class DegenerateElementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Values, reference gradients and reference Hessians of the Q1 (4) or
/// Q2 (9) tensor-product Lagrange basis at one reference point.
struct ShapeSet {
  int order = 1;
  int size = 4;
  std::array<double, 9> values{};
  std::array<Vec2, 9> gradients{};
  std::array<Mat2, 9> hessians{};
};

namespace detail {

// 1D Lagrange polynomials on {-1, 1} (k=1) or {-1, 0, 1} (k=2): value, first
// and second derivative of polynomial `i` at `t`.
inline std::array<double, 3> lagrange_1d(int order, int i, double t) {
  if (order == 1) {
    const double s = i == 0 ? -0.5 : 0.5;
    return {0.5 + s * t, s, 0.0};
  }
  switch (i) {
    case 0: return {0.5 * t * (t - 1.0), t - 0.5, 1.0};
    case 1: return {1.0 - t * t, -2.0 * t, -2.0};
    default: return {0.5 * t * (t + 1.0), t + 0.5, 1.0};
  }
}

}  // namespace detail

inline ShapeSet reference_basis(int order, const Vec2& xi) {
  const auto offsets = local_lattice_offsets(order);  // throws for bad order
  ShapeSet s;
  s.order = order;
  s.size = static_cast<int>(offsets.size());
  for (int a = 0; a < s.size; ++a) {
    const auto [i, j] = offsets[static_cast<std::size_t>(a)];
    const auto fx = detail::lagrange_1d(order, i, xi.x());
    const auto fy = detail::lagrange_1d(order, j, xi.y());
    s.values[a] = fx[0] * fy[0];
    s.gradients[a] = Vec2(fx[1] * fy[0], fx[0] * fy[1]);
    s.hessians[a] << fx[2] * fy[0], fx[1] * fy[1], fx[1] * fy[1], fx[0] * fy[2];
  }
  return s;
}

/// Reference coordinates of the local nodes.
inline std::vector<Vec2> reference_nodes(int order) {
  std::vector<Vec2> out;
  for (const auto& [i, j] : local_lattice_offsets(order))
    out.emplace_back(-1.0 + 2.0 * i / order, -1.0 + 2.0 * j / order);
  return out;
}

struct QuadratureRule1D {
  std::vector<double> points;
  std::vector<double> weights;
};

struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  std::size_t size() const { return points.size(); }
};

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
inline QuadratureRule1D gauss_rule_1d(int n) {
  if (n < 1 || n > 5) throw std::invalid_argument("Gauss rule supports 1..5 points");
  // P_n(x) and P_n'(x) by the three-term recurrence
  const auto legendre = [n](double x) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    return std::array<double, 2>{p1, n * (x * p1 - p0) / (x * x - 1.0)};
  };
  QuadratureRule1D rule;
  rule.points.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    if (std::abs(x) < 1e-15) x = 0.0;
    const double dp = legendre(x)[1];
    const auto slot = static_cast<std::size_t>(n - 1 - i);
    rule.points[slot] = x;
    rule.weights[slot] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

/// n x n tensor-product Gauss rule on [-1, 1]^2.
inline QuadratureRule gauss_rule(int n) {
  const auto r = gauss_rule_1d(n);
  QuadratureRule q;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      q.points.emplace_back(r.points[static_cast<std::size_t>(i)], r.points[static_cast<std::size_t>(j)]);
      q.weights.push_back(r.weights[static_cast<std::size_t>(i)] * r.weights[static_cast<std::size_t>(j)]);
    }
  return q;
}

/// Default volume rule: 3x3 for Q1, 4x4 for Q2.
inline int default_gauss_points(int order) { return order == 1 ? 3 : 4; }

/// Isoparametric map evaluated at one reference point.
struct ElementPoint {
  Vec2 x;
  Mat2 jacobian;  // d x / d xi
  double det_j = 0.0;
  ShapeSet shape;
  std::array<Vec2, 9> gradients{};  // physical
  std::array<Mat2, 9> hessians{};   // physical, exact for parallelogram elements
};

inline ElementPoint map_to_physical(const QuadMesh& mesh, int element, const Vec2& xi) {
  if (element < 0 || element >= mesh.num_elements())
    throw std::out_of_range("element index out of range");
  ElementPoint ep;
  ep.shape = reference_basis(mesh.order, xi);
  const auto conn = mesh.element_nodes(element);
  ep.x.setZero();
  ep.jacobian.setZero();
  for (int a = 0; a < ep.shape.size; ++a) {
    const Vec2& xa = mesh.nodes[static_cast<std::size_t>(conn[static_cast<std::size_t>(a)])];
    ep.x += ep.shape.values[a] * xa;
    ep.jacobian += xa * ep.shape.gradients[a].transpose();
  }
  ep.det_j = ep.jacobian.determinant();
  if (!(ep.det_j > 0.0)) throw DegenerateElementError("non-positive Jacobian determinant");
  const Mat2 jinv = ep.jacobian.inverse();
  for (int a = 0; a < ep.shape.size; ++a) {
    ep.gradients[a] = jinv.transpose() * ep.shape.gradients[a];
    ep.hessians[a] = jinv.transpose() * ep.shape.hessians[a] * jinv;
  }
  return ep;
}

/// Reference coordinates of the point with edge parameter s in [-1, 1] on
/// local edge `edge`, traversed counterclockwise.
inline Vec2 edge_reference_point(int edge, double s) {
  switch (edge) {
    case 0: return {s, -1.0};
    case 1: return {1.0, s};
    case 2: return {-s, 1.0};
    case 3: return {-1.0, -s};
    default: throw std::invalid_argument("local edge must be 0..3");
  }
}

inline double element_area(const QuadMesh& mesh, int element) {
  const auto q = gauss_rule(default_gauss_points(mesh.order));
  double area = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i)
    area += q.weights[i] * map_to_physical(mesh, element, q.points[i]).det_j;
  return area;
}

}  // namespace darcy
