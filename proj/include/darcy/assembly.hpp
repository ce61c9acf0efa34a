#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "darcy/fem.hpp"
#include "darcy/fields.hpp"
#include "darcy/interface.hpp"
#include "darcy/linsolve.hpp"
#include "darcy/material.hpp"
#include "darcy/mesh.hpp"

namespace darcy {

enum class Method { galerkin, mgls, hvm, cgls, dg };
enum class InterfaceMode { continuous, constrained, constrained_ns };

/// Weight of the Darcy-law residual term. `global_scalar` uses K = |𝒦|_∞ on
/// both subdomains; `subdomain_tensor` uses the local conductivity tensor.
enum class DarcyWeight { global_scalar, subdomain_tensor };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::galerkin: return "galerkin";
    case Method::mgls: return "mgls";
    case Method::hvm: return "hvm";
    case Method::cgls: return "cgls";
    case Method::dg: return "dg";
  }
  return "?";
}

inline std::string to_string(InterfaceMode m) {
  switch (m) {
    case InterfaceMode::continuous: return "continuous";
    case InterfaceMode::constrained: return "constrained";
    case InterfaceMode::constrained_ns: return "constrained_ns";
  }
  return "?";
}

struct StabilizationParams {
  double delta0 = 1.0;
  double delta1 = 0.5;
  double delta2 = 0.5;
  double delta3 = 0.0;
  Method method = Method::mgls;

  static StabilizationParams mgls(double delta1 = 0.5, double delta2 = 0.5) {
    if (!(delta1 > 0.0) || !(delta2 > 0.0)) throw std::invalid_argument("MGLS needs positive delta1, delta2");
    return {1.0, delta1, delta2, 0.0, Method::mgls};
  }
  static StabilizationParams hvm() { return {-1.0, 0.5, 0.0, 0.0, Method::hvm}; }
  static StabilizationParams cgls() { return {1.0, -0.5, 0.5, 0.5, Method::cgls}; }

  static StabilizationParams for_method(Method m) {
    switch (m) {
      case Method::mgls: return mgls();
      case Method::hvm: return hvm();
      case Method::cgls: return cgls();
      default: throw std::invalid_argument("not a stabilized mixed method: " + to_string(m));
    }
  }
};

struct Constraint {
  int dof;
  double value;
};

/// Node-major numbering: dof(node, field) = node * fields + field.
struct DofMap {
  int fields_per_node = 1;
  int num_nodes = 0;
  std::vector<Constraint> constraints;

  int index(int node, int field) const { return node * fields_per_node + field; }
  int size() const { return fields_per_node * num_nodes; }
};

struct LinearSystem {
  CsrMatrix matrix;
  std::vector<double> rhs;
  bool symmetric = false;
};

/// System restricted to the free DOFs, with the map back to the full vector.
struct ReducedSystem {
  LinearSystem system;
  std::vector<int> free_dofs;
  std::vector<double> prescribed;  // full length; prescribed values, zero on free DOFs

  std::vector<double> expand(std::span<const double> reduced) const {
    if (reduced.size() != free_dofs.size()) throw std::invalid_argument("reduced solution has wrong length");
    std::vector<double> full = prescribed;
    for (std::size_t k = 0; k < free_dofs.size(); ++k) full[static_cast<std::size_t>(free_dofs[k])] = reduced[k];
    return full;
  }
};

/// Eliminates constrained DOFs, moving their lifting into the right-hand
/// side. Duplicate prescriptions must agree.
inline ReducedSystem apply_essential_bc(const LinearSystem& full, std::span<const Constraint> prescribed) {
  const int n = full.matrix.rows();
  std::vector<char> fixed(static_cast<std::size_t>(n), 0);
  ReducedSystem out;
  out.prescribed.assign(static_cast<std::size_t>(n), 0.0);
  for (const auto& c : prescribed) {
    if (c.dof < 0 || c.dof >= n) throw std::out_of_range("constrained DOF out of range");
    if (!std::isfinite(c.value)) throw std::invalid_argument("prescribed value is not finite");
    auto& slot = out.prescribed[static_cast<std::size_t>(c.dof)];
    if (fixed[static_cast<std::size_t>(c.dof)]) {
      if (std::abs(slot - c.value) > 1e-12 * std::max(1.0, std::abs(c.value)))
        throw std::invalid_argument("conflicting prescriptions for DOF " + std::to_string(c.dof));
      continue;
    }
    fixed[static_cast<std::size_t>(c.dof)] = 1;
    slot = c.value;
  }

  std::vector<int> reduced_index(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i)
    if (!fixed[static_cast<std::size_t>(i)]) {
      reduced_index[static_cast<std::size_t>(i)] = static_cast<int>(out.free_dofs.size());
      out.free_dofs.push_back(i);
    }

  const auto m = static_cast<int>(out.free_dofs.size());
  std::vector<Triplet> triplets;
  triplets.reserve(full.matrix.nonzeros());
  out.system.rhs.resize(static_cast<std::size_t>(m));
  const auto rp = full.matrix.row_ptr();
  const auto ci = full.matrix.col_idx();
  const auto va = full.matrix.values();
  for (int r = 0; r < m; ++r) {
    const int i = out.free_dofs[static_cast<std::size_t>(r)];
    double b = full.rhs[static_cast<std::size_t>(i)];
    for (int k = rp[static_cast<std::size_t>(i)]; k < rp[static_cast<std::size_t>(i) + 1]; ++k) {
      const int j = ci[static_cast<std::size_t>(k)];
      const double v = va[static_cast<std::size_t>(k)];
      if (fixed[static_cast<std::size_t>(j)])
        b -= v * out.prescribed[static_cast<std::size_t>(j)];
      else
        triplets.push_back({r, reduced_index[static_cast<std::size_t>(j)], v});
    }
    out.system.rhs[static_cast<std::size_t>(r)] = b;
  }
  out.system.matrix = compress(m, m, triplets);
  out.system.symmetric = full.symmetric;
  return out;
}

namespace detail {

inline void scatter(std::vector<Triplet>& triplets, std::vector<double>& rhs, std::span<const int> dofs,
                    const Eigen::MatrixXd& ke, const Eigen::VectorXd& fe) {
  for (std::size_t i = 0; i < dofs.size(); ++i) {
    rhs[static_cast<std::size_t>(dofs[i])] += fe(static_cast<Eigen::Index>(i));
    for (std::size_t j = 0; j < dofs.size(); ++j)
      triplets.push_back({dofs[i], dofs[j], ke(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))});
  }
}

inline std::vector<int> element_dofs(const QuadMesh& mesh, const DofMap& dofs, int e) {
  std::vector<int> out;
  for (int node : mesh.element_nodes(e))
    for (int f = 0; f < dofs.fields_per_node; ++f) out.push_back(dofs.index(node, f));
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Primal Galerkin
// ---------------------------------------------------------------------------

/// Element stiffness (𝒦∇N_b, ∇N_a) and load (f, N_a).
inline ElementSystem galerkin_element_system(const QuadMesh& mesh, const MaterialField& material,
                                             const ScalarField& source, int e) {
  const int nloc = mesh.nodes_per_element();
  const int tag = mesh.elem_subdomain[static_cast<std::size_t>(e)];
  const Mat2& k = material.conductivity(tag);
  ElementSystem es{Eigen::MatrixXd::Zero(nloc, nloc), Eigen::VectorXd::Zero(nloc)};
  const auto q = gauss_rule(default_gauss_points(mesh.order));
  for (std::size_t g = 0; g < q.size(); ++g) {
    const auto ep = map_to_physical(mesh, e, q.points[g]);
    const double w = q.weights[g] * ep.det_j;
    const double fval = source(ep.x, tag);
    for (int a = 0; a < nloc; ++a) {
      const Vec2 kga = k * ep.gradients[a];
      es.rhs(a) += w * fval * ep.shape.values[a];
      for (int b = 0; b < nloc; ++b) es.matrix(a, b) += w * kga.dot(ep.gradients[b]);
    }
  }
  return es;
}

struct GalerkinProblem {
  DofMap dofs;
  LinearSystem full;
  ReducedSystem reduced;
};

/// Conforming Galerkin system with the Dirichlet trace `dirichlet` imposed
/// strongly at every boundary node.
inline GalerkinProblem assemble_galerkin(const QuadMesh& mesh, const MaterialField& material,
                                         const ScalarField& source, const ScalarField& dirichlet) {
  GalerkinProblem gp;
  gp.dofs = {1, mesh.num_nodes(), {}};
  std::vector<Triplet> triplets;
  std::vector<double> rhs(static_cast<std::size_t>(gp.dofs.size()), 0.0);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto es = galerkin_element_system(mesh, material, source, e);
    detail::scatter(triplets, rhs, detail::element_dofs(mesh, gp.dofs, e), es.matrix, es.rhs);
  }
  gp.full = {compress(gp.dofs.size(), gp.dofs.size(), triplets), std::move(rhs), true};

  for (int node = 0; node < mesh.num_nodes(); ++node)
    if (mesh.on_boundary(node))
      gp.dofs.constraints.push_back(
          {node, dirichlet(mesh.nodes[static_cast<std::size_t>(node)], node_subdomain(mesh, node))});
  gp.reduced = apply_essential_bc(gp.full, gp.dofs.constraints);
  if (gp.reduced.free_dofs.empty()) throw std::invalid_argument("Galerkin system has no free DOFs");
  return gp;
}

/// u_G = -𝒦∇p_h at the volume quadrature points of every element.
inline std::vector<std::vector<Vec2>> darcy_velocity_from_potential(const QuadMesh& mesh,
                                                                    const MaterialField& material,
                                                                    std::span<const double> potential) {
  if (static_cast<int>(potential.size()) != mesh.num_nodes())
    throw std::invalid_argument("potential must have one value per node");
  const auto q = gauss_rule(default_gauss_points(mesh.order));
  std::vector<std::vector<Vec2>> out(static_cast<std::size_t>(mesh.num_elements()));
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const Mat2& k = material.conductivity(mesh.elem_subdomain[static_cast<std::size_t>(e)]);
    const auto conn = mesh.element_nodes(e);
    for (const auto& xi : q.points) {
      const auto ep = map_to_physical(mesh, e, xi);
      Vec2 grad = Vec2::Zero();
      for (int a = 0; a < ep.shape.size; ++a)
        grad += potential[static_cast<std::size_t>(conn[static_cast<std::size_t>(a)])] * ep.gradients[a];
      out[static_cast<std::size_t>(e)].push_back(-(k * grad));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stabilized mixed methods
// ---------------------------------------------------------------------------

struct MixedOptions {
  InterfaceMode interface_mode = InterfaceMode::continuous;
  DarcyWeight weight = DarcyWeight::subdomain_tensor;
  /// Potential value imposed at node 0 (lower-left corner) to fix the
  /// constant null mode left by pure normal-velocity data.
  std::optional<double> pinned_potential;
};

/// Element matrix of B_α and vector of F_α with unknowns ordered
/// (u_x, u_y, p) per local node.
///
///   (Λu,v) − (div v,p) − δ0(div u,q) + δ1(W(Λu+∇p), δ0Λv+∇q)
///   + δ2(λ div u, div v) + δ3(K curl Λu, curl Λv)
///   F = −δ0(f,q) + δ2(λf, div v)
///
/// with W = K·I or 𝒦_i depending on `weight`, and curl w = ∂w₂/∂x − ∂w₁/∂y.
inline ElementSystem mixed_element_system(const QuadMesh& mesh, const MaterialField& material,
                                          const StabilizationParams& prm, const ScalarField& source, int e,
                                          DarcyWeight weight = DarcyWeight::subdomain_tensor) {
  const int nloc = mesh.nodes_per_element();
  const int ndof = 3 * nloc;
  const int tag = mesh.elem_subdomain[static_cast<std::size_t>(e)];
  const Mat2& lam = material.resistivity(tag);
  const Mat2 wmat = weight == DarcyWeight::global_scalar ? Mat2(material.kinf * Mat2::Identity())
                                                         : material.conductivity(tag);
  const double kscal = material.kinf;
  const double lscal = material.lambda;

  ElementSystem es{Eigen::MatrixXd::Zero(ndof, ndof), Eigen::VectorXd::Zero(ndof)};
  // Per-DOF operator values at one quadrature point.
  std::vector<Vec2> vel(static_cast<std::size_t>(ndof)), lvel(static_cast<std::size_t>(ndof)),
      grad(static_cast<std::size_t>(ndof)), resid(static_cast<std::size_t>(ndof)),
      test(static_cast<std::size_t>(ndof));
  std::vector<double> div(static_cast<std::size_t>(ndof)), val(static_cast<std::size_t>(ndof)),
      curl(static_cast<std::size_t>(ndof));

  const auto q = gauss_rule(default_gauss_points(mesh.order));
  for (std::size_t g = 0; g < q.size(); ++g) {
    const auto ep = map_to_physical(mesh, e, q.points[g]);
    const double w = q.weights[g] * ep.det_j;
    const double fval = source(ep.x, tag);
    for (int a = 0; a < nloc; ++a) {
      const double na = ep.shape.values[a];
      const Vec2& ga = ep.gradients[a];
      for (int c = 0; c < 3; ++c) {
        const auto d = static_cast<std::size_t>(3 * a + c);
        vel[d].setZero();
        grad[d].setZero();
        div[d] = val[d] = curl[d] = 0.0;
        if (c < 2) {
          vel[d](c) = na;
          div[d] = ga(c);
          curl[d] = lam(1, c) * ga.x() - lam(0, c) * ga.y();
        } else {
          grad[d] = ga;
          val[d] = na;
        }
        lvel[d] = lam * vel[d];
        resid[d] = wmat * (lvel[d] + grad[d]);
        test[d] = prm.delta0 * lvel[d] + grad[d];
      }
    }
    for (int i = 0; i < ndof; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      es.rhs(i) += w * (-prm.delta0 * fval * val[ui] + prm.delta2 * lscal * fval * div[ui]);
      for (int j = 0; j < ndof; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        es.matrix(i, j) +=
            w * (lvel[uj].dot(vel[ui]) - div[ui] * val[uj] - prm.delta0 * div[uj] * val[ui] +
                 prm.delta1 * resid[uj].dot(test[ui]) + prm.delta2 * lscal * div[uj] * div[ui] +
                 prm.delta3 * kscal * curl[uj] * curl[ui]);
      }
    }
  }
  return es;
}

struct MixedProblem {
  DofMap dofs;
  LinearSystem full;
  ReducedSystem reduced;
  InterfaceTransform transform;  // empty in continuous mode
  MixedOptions options;
};

/// Assembles B_α for equal-order Q_k velocity/potential and prescribes the
/// normal velocity of `boundary_velocity` on ∂Ω.
///
/// In constrained modes the subdomain-1 elements touching Γ are transformed
/// before accumulation, so the unknowns are the continuous reference field
/// (equal to the subdomain-2 trace on Γ).
inline MixedProblem assemble_stabilized_mixed(const QuadMesh& mesh, const MaterialField& material,
                                              const StabilizationParams& params, const ScalarField& source,
                                              const VectorField& boundary_velocity, const MixedOptions& options) {
  if (!options.pinned_potential)
    throw std::invalid_argument(
        "mixed system is singular: the potential is fixed only up to a constant and no pinning is configured");
  MixedProblem mp;
  mp.options = options;
  mp.dofs = {3, mesh.num_nodes(), {}};
  const bool constrained = options.interface_mode != InterfaceMode::continuous;
  if (constrained) mp.transform = InterfaceTransform::build(mesh, material);
  const TransformMode tmode = options.interface_mode == InterfaceMode::constrained_ns ? TransformMode::nonsymmetric
                                                                                      : TransformMode::symmetric;

  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.num_elements()) * 9u * static_cast<std::size_t>(mesh.nodes_per_element() * mesh.nodes_per_element()));
  std::vector<double> rhs(static_cast<std::size_t>(mp.dofs.size()), 0.0);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    auto es = mixed_element_system(mesh, material, params, source, e, options.weight);
    if (constrained && mp.transform.affects(mesh, e))
      es = transform_element_system(es.matrix, es.rhs, element_transform(mesh, e, mp.transform), tmode);
    detail::scatter(triplets, rhs, detail::element_dofs(mesh, mp.dofs, e), es.matrix, es.rhs);
  }
  const bool symmetric = params.delta0 > 0.0 && options.interface_mode != InterfaceMode::constrained_ns;
  mp.full = {compress(mp.dofs.size(), mp.dofs.size(), triplets), std::move(rhs), symmetric};

  // Normal velocity on the axis-aligned boundary: one Cartesian component per
  // boundary side, both at corners. On Γ ∩ ∂Ω constrained modes fix the whole
  // reference velocity to the subdomain-2 trace, since π of a free tangential
  // component would leak into the subdomain-1 normal; continuous mode uses
  // the two-sided mean of the normal component.
  for (int node = 0; node < mesh.num_nodes(); ++node) {
    if (!mesh.on_boundary(node)) continue;
    const Vec2& x = mesh.nodes[static_cast<std::size_t>(node)];
    Vec2 u;
    if (mesh.on_interface(node))
      u = constrained ? boundary_velocity(x, 2) : Vec2(0.5 * (boundary_velocity(x, 1) + boundary_velocity(x, 2)));
    else
      u = boundary_velocity(x, node_subdomain(mesh, node));
    if (constrained && mesh.on_interface(node)) {
      mp.dofs.constraints.push_back({mp.dofs.index(node, 0), u(0)});
      mp.dofs.constraints.push_back({mp.dofs.index(node, 1), u(1)});
      continue;
    }
    for (const Vec2& n : mesh.boundary_normals(node)) {
      const int comp = std::abs(n.x()) > 0.5 ? 0 : 1;
      mp.dofs.constraints.push_back({mp.dofs.index(node, comp), u(comp)});
    }
  }
  mp.dofs.constraints.push_back({mp.dofs.index(0, 2), *options.pinned_potential});
  mp.reduced = apply_essential_bc(mp.full, mp.dofs.constraints);
  return mp;
}

}  // namespace darcy
