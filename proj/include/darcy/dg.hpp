#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "darcy/assembly.hpp"
#include "darcy/fem.hpp"
#include "darcy/fields.hpp"
#include "darcy/linsolve.hpp"
#include "darcy/material.hpp"
#include "darcy/mesh.hpp"

namespace darcy {

/// alpha = -1 gives the symmetric form, +1 the nonsymmetric one. The edge
/// penalty is beta0 / h_e.
struct DGParams {
  double alpha = -1.0;
  double beta0 = 10.0;

  static DGParams defaults(int order, double alpha = -1.0) { return {alpha, 10.0 * order * order}; }

  void validate() const {
    if (!(alpha >= -1.0 && alpha <= 1.0)) throw std::invalid_argument("DG alpha must lie in [-1, 1]");
    if (!(beta0 >= 0.0)) throw std::invalid_argument("DG beta0 must be non-negative");
  }
};

/// Without a penalty only the α = 1 form keeps b(q,q) = Σ(𝒦∇q,∇q).
inline bool dg_stability_guaranteed(const DGParams& p) { return p.beta0 > 0.0 || p.alpha == 1.0; }

/// Element-wise nodal coefficients with no inter-element continuity.
struct BrokenField {
  int nodes_per_element = 4;
  std::vector<double> coefficients;

  int num_elements() const { return static_cast<int>(coefficients.size()) / nodes_per_element; }
  std::span<const double> element(int e) const {
    return {coefficients.data() + static_cast<std::size_t>(e) * nodes_per_element,
            static_cast<std::size_t>(nodes_per_element)};
  }

  /// Nodal interpolant of `q`, sampled from each element's own side.
  static BrokenField interpolate(const QuadMesh& mesh, const ScalarField& q) {
    BrokenField f{mesh.nodes_per_element(), {}};
    for (int e = 0; e < mesh.num_elements(); ++e) {
      const int tag = mesh.elem_subdomain[static_cast<std::size_t>(e)];
      for (int n : mesh.element_nodes(e)) f.coefficients.push_back(q(mesh.nodes[static_cast<std::size_t>(n)], tag));
    }
    return f;
  }

  /// Injection of a continuous nodal field.
  static BrokenField from_nodal(const QuadMesh& mesh, std::span<const double> nodal) {
    BrokenField f{mesh.nodes_per_element(), {}};
    for (int e = 0; e < mesh.num_elements(); ++e)
      for (int n : mesh.element_nodes(e)) f.coefficients.push_back(nodal[static_cast<std::size_t>(n)]);
    return f;
  }
};

/// Quantities at the edge quadrature points (k+1 Gauss points).
struct EdgeTrace {
  std::vector<Vec2> points;
  std::vector<double> weights;  // include the edge Jacobian
  std::vector<double> jump;     // plus minus minus
  std::vector<double> average;
  std::vector<double> flux_average;  // {𝒦∇q·n}, n outward from plus
};

namespace detail {

inline void check_edge(const QuadMesh& mesh, const InteriorEdge& edge) {
  const int ne = mesh.num_elements();
  if (edge.minus < 0 || edge.plus < 0) throw std::invalid_argument("boundary edge passed where an interior edge is required");
  if (edge.plus >= ne || edge.minus >= ne || edge.plus == edge.minus)
    throw std::invalid_argument("interior edge has missing or invalid adjacency");
}

struct EdgeSide {
  ElementPoint point;
  const Mat2* k;
};

inline EdgeSide edge_side(const QuadMesh& mesh, const MaterialField& material, int element, int local_edge,
                          double s) {
  return {map_to_physical(mesh, element, edge_reference_point(local_edge, s)),
          &material.conductivity(mesh.elem_subdomain[static_cast<std::size_t>(element)])};
}

inline double edge_length(const QuadMesh& mesh, int element, int local_edge) {
  const auto conn = mesh.element_nodes(element);
  const auto ends = local_edge_nodes(mesh.order, local_edge);
  return (mesh.nodes[static_cast<std::size_t>(conn[static_cast<std::size_t>(ends.front())])] -
          mesh.nodes[static_cast<std::size_t>(conn[static_cast<std::size_t>(ends.back())])])
      .norm();
}

}  // namespace detail

inline EdgeTrace dg_jump_average(const QuadMesh& mesh, const MaterialField& material, const InteriorEdge& edge,
                                 const BrokenField& field) {
  detail::check_edge(mesh, edge);
  const auto rule = gauss_rule_1d(mesh.order + 1);
  const double half = 0.5 * detail::edge_length(mesh, edge.plus, edge.plus_edge);
  EdgeTrace tr;
  for (std::size_t g = 0; g < rule.points.size(); ++g) {
    const double s = rule.points[g];
    const auto plus = detail::edge_side(mesh, material, edge.plus, edge.plus_edge, s);
    const auto minus = detail::edge_side(mesh, material, edge.minus, edge.minus_edge, -s);
    const auto cp = field.element(edge.plus);
    const auto cm = field.element(edge.minus);
    double qp = 0.0, qm = 0.0;
    Vec2 gp = Vec2::Zero(), gm = Vec2::Zero();
    for (int a = 0; a < plus.point.shape.size; ++a) {
      qp += cp[static_cast<std::size_t>(a)] * plus.point.shape.values[a];
      gp += cp[static_cast<std::size_t>(a)] * plus.point.gradients[a];
      qm += cm[static_cast<std::size_t>(a)] * minus.point.shape.values[a];
      gm += cm[static_cast<std::size_t>(a)] * minus.point.gradients[a];
    }
    tr.points.push_back(plus.point.x);
    tr.weights.push_back(rule.weights[g] * half);
    tr.jump.push_back(qp - qm);
    tr.average.push_back(0.5 * (qp + qm));
    tr.flux_average.push_back(0.5 * ((*plus.k * gp).dot(edge.normal) + (*minus.k * gm).dot(edge.normal)));
  }
  return tr;
}

/// Interior-penalty broken form
///   Σ_κ(𝒦∇p,∇q) + ∫_int(α⟦p⟧{𝒦∇q·n} − {𝒦∇p·n}⟦q⟧ + β⟦p⟧⟦q⟧) + b_∂(p,q)
/// with the Dirichlet trace `dirichlet` entering the right-hand side through
/// the boundary terms. Unknowns are numbered element * nodes_per_element + a.
inline LinearSystem assemble_dg(const QuadMesh& mesh, const MaterialField& material, const ScalarField& source,
                                const DGParams& params, const ScalarField& dirichlet,
                                std::span<const InteriorEdge> interior_edges) {
  params.validate();
  const int nloc = mesh.nodes_per_element();
  const int n = nloc * mesh.num_elements();
  std::vector<Triplet> triplets;
  std::vector<double> rhs(static_cast<std::size_t>(n), 0.0);

  std::vector<int> dofs(static_cast<std::size_t>(nloc));
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto es = galerkin_element_system(mesh, material, source, e);
    for (int a = 0; a < nloc; ++a) dofs[static_cast<std::size_t>(a)] = e * nloc + a;
    detail::scatter(triplets, rhs, dofs, es.matrix, es.rhs);
  }

  const auto rule = gauss_rule_1d(mesh.order + 1);
  const double alpha = params.alpha;

  // interior edges: 2*nloc coupled unknowns, plus element first
  std::vector<double> jump(static_cast<std::size_t>(2 * nloc)), flux(static_cast<std::size_t>(2 * nloc));
  std::vector<int> edofs(static_cast<std::size_t>(2 * nloc));
  for (const auto& edge : interior_edges) {
    detail::check_edge(mesh, edge);
    const double len = detail::edge_length(mesh, edge.plus, edge.plus_edge);
    const double beta = params.beta0 / len;
    for (int a = 0; a < nloc; ++a) {
      edofs[static_cast<std::size_t>(a)] = edge.plus * nloc + a;
      edofs[static_cast<std::size_t>(nloc + a)] = edge.minus * nloc + a;
    }
    Eigen::MatrixXd ke = Eigen::MatrixXd::Zero(2 * nloc, 2 * nloc);
    for (std::size_t g = 0; g < rule.points.size(); ++g) {
      const double s = rule.points[g];
      const double w = rule.weights[g] * 0.5 * len;
      const auto plus = detail::edge_side(mesh, material, edge.plus, edge.plus_edge, s);
      const auto minus = detail::edge_side(mesh, material, edge.minus, edge.minus_edge, -s);
      for (int a = 0; a < nloc; ++a) {
        jump[static_cast<std::size_t>(a)] = plus.point.shape.values[a];
        flux[static_cast<std::size_t>(a)] = 0.5 * (*plus.k * plus.point.gradients[a]).dot(edge.normal);
        jump[static_cast<std::size_t>(nloc + a)] = -minus.point.shape.values[a];
        flux[static_cast<std::size_t>(nloc + a)] = 0.5 * (*minus.k * minus.point.gradients[a]).dot(edge.normal);
      }
      for (int i = 0; i < 2 * nloc; ++i)
        for (int j = 0; j < 2 * nloc; ++j) {
          const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
          ke(i, j) += w * (alpha * jump[uj] * flux[ui] - flux[uj] * jump[ui] + beta * jump[uj] * jump[ui]);
        }
    }
    detail::scatter(triplets, rhs, edofs, ke, Eigen::VectorXd::Zero(2 * nloc));
  }

  for (const auto& be : mesh.boundary_edges) {
    const double len = detail::edge_length(mesh, be.element, be.local_edge);
    const double beta = params.beta0 / len;
    const int tag = mesh.elem_subdomain[static_cast<std::size_t>(be.element)];
    for (int a = 0; a < nloc; ++a) dofs[static_cast<std::size_t>(a)] = be.element * nloc + a;
    Eigen::MatrixXd ke = Eigen::MatrixXd::Zero(nloc, nloc);
    Eigen::VectorXd fe = Eigen::VectorXd::Zero(nloc);
    for (std::size_t g = 0; g < rule.points.size(); ++g) {
      const double w = rule.weights[g] * 0.5 * len;
      const auto side = detail::edge_side(mesh, material, be.element, be.local_edge, rule.points[g]);
      const double gval = dirichlet(side.point.x, tag);
      for (int i = 0; i < nloc; ++i) {
        const double ni = side.point.shape.values[i];
        const double fi = (*side.k * side.point.gradients[i]).dot(be.normal);
        fe(i) += w * (alpha * gval * fi + beta * gval * ni);
        for (int j = 0; j < nloc; ++j) {
          const double nj = side.point.shape.values[j];
          const double fj = (*side.k * side.point.gradients[j]).dot(be.normal);
          ke(i, j) += w * (alpha * nj * fi - fj * ni + beta * nj * ni);
        }
      }
    }
    detail::scatter(triplets, rhs, dofs, ke, fe);
  }

  return {compress(n, n, triplets), std::move(rhs), alpha == -1.0};
}

inline LinearSystem assemble_dg(const QuadMesh& mesh, const MaterialField& material, const ScalarField& source,
                                const DGParams& params, const ScalarField& dirichlet) {
  return assemble_dg(mesh, material, source, params, dirichlet, mesh.interior_edges);
}

/// J_b(q) = ½Σ_κ(𝒦∇q,∇q) − ∫_int {𝒦∇q·n}⟦q⟧ − Σ_κ(f,q); boundary terms are
/// omitted (strong Dirichlet data assumed).
inline double evaluate_broken_functional(const QuadMesh& mesh, const MaterialField& material,
                                         const ScalarField& source, const BrokenField& field) {
  if (field.nodes_per_element != mesh.nodes_per_element() || field.num_elements() != mesh.num_elements())
    throw std::invalid_argument("broken field does not match the mesh");
  double energy = 0.0, load = 0.0, edge_term = 0.0;
  const auto q = gauss_rule(default_gauss_points(mesh.order));
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const int tag = mesh.elem_subdomain[static_cast<std::size_t>(e)];
    const Mat2& k = material.conductivity(tag);
    const auto c = field.element(e);
    for (std::size_t g = 0; g < q.size(); ++g) {
      const auto ep = map_to_physical(mesh, e, q.points[g]);
      const double w = q.weights[g] * ep.det_j;
      double val = 0.0;
      Vec2 grad = Vec2::Zero();
      for (int a = 0; a < ep.shape.size; ++a) {
        val += c[static_cast<std::size_t>(a)] * ep.shape.values[a];
        grad += c[static_cast<std::size_t>(a)] * ep.gradients[a];
      }
      energy += w * grad.dot(k * grad);
      load += w * source(ep.x, tag) * val;
    }
  }
  for (const auto& edge : mesh.interior_edges) {
    const auto tr = dg_jump_average(mesh, material, edge, field);
    for (std::size_t g = 0; g < tr.points.size(); ++g) edge_term += tr.weights[g] * tr.flux_average[g] * tr.jump[g];
  }
  return 0.5 * energy - edge_term - load;
}

/// qᵀAq for a broken coefficient vector.
inline double bilinear_energy(const CsrMatrix& a, std::span<const double> q) {
  const auto aq = a.multiply(q);
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) s += q[i] * aq[i];
  return s;
}

}  // namespace darcy
