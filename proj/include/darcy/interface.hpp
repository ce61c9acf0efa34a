#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "darcy/linsolve.hpp"
#include "darcy/material.hpp"
#include "darcy/mesh.hpp"

namespace darcy {

/// Row 1 holds the tangential resistivity functional (Λτ)ᵀ, row 2 the
/// normal nᵀ, so that Q w = (Λw·τ, w·n).
inline Mat2 q_matrix(const Mat2& resistivity, const Vec2& n, const Vec2& tau) {
  const Mat2& l = resistivity;
  Mat2 q;
  q << l(0, 0) * tau.x() + l(1, 0) * tau.y(), l(0, 1) * tau.x() + l(1, 1) * tau.y(),  //
      n.x(), n.y();
  return q;
}

/// Node transformation acting on (u_x, u_y, p); the potential passes through.
inline Eigen::Matrix3d t_matrix(const Mat2& resistivity, const Vec2& n, const Vec2& tau) {
  Eigen::Matrix3d t = Eigen::Matrix3d::Zero();
  t.topLeftCorner<2, 2>() = q_matrix(resistivity, n, tau);
  t(2, 2) = 1.0;
  return t;
}

/// Closed form of det T for an orthonormal (n, τ) frame: Λτ·τ.
inline double t_matrix_determinant(const Mat2& resistivity, const Vec2& tau) {
  return tau.dot(resistivity * tau);
}

/// π = Q1⁻¹ Q2 maps the subdomain-2 (reference) velocity to the subdomain-1
/// velocity with the same normal component and matching Λτ projection.
inline Mat2 pi_node(const Mat2& resistivity1, const Mat2& resistivity2, const Vec2& n, const Vec2& tau) {
  const Mat2 q1 = q_matrix(resistivity1, n, tau);
  const Mat2 q2 = q_matrix(resistivity2, n, tau);
  Eigen::JacobiSVD<Mat2> svd(q1);
  const auto sv = svd.singularValues();
  if (!(sv(1) > 0.0) || sv(0) / sv(1) > 1e12) throw NumericalError("interface matrix Q1 is near-singular");
  return q1.inverse() * q2;
}

/// Per-node π table for every interface node, plus the data needed to check
/// the discrete interface conditions.
class InterfaceTransform {
 public:
  InterfaceTransform() = default;

  static InterfaceTransform build(const QuadMesh& mesh, const MaterialField& material) {
    InterfaceTransform t;
    t.resistivity1_ = material.resistivity1;
    t.resistivity2_ = material.resistivity2;
    t.slot_.assign(static_cast<std::size_t>(mesh.num_nodes()), -1);
    for (const auto& in : classify_interface(mesh)) {
      t.slot_[static_cast<std::size_t>(in.node)] = static_cast<int>(t.nodes_.size());
      t.nodes_.push_back(in);
      t.pi_.push_back(pi_node(material.resistivity1, material.resistivity2, in.normal, in.tangent));
    }
    return t;
  }

  bool empty() const { return nodes_.empty(); }
  std::span<const InterfaceNode> nodes() const { return nodes_; }

  /// π at `node`, or nullptr off the interface.
  const Mat2* pi_at(int node) const {
    if (node < 0 || static_cast<std::size_t>(node) >= slot_.size()) return nullptr;
    const int s = slot_[static_cast<std::size_t>(node)];
    return s < 0 ? nullptr : &pi_[static_cast<std::size_t>(s)];
  }

  /// Only subdomain-1 elements touching Γ see a non-identity transform.
  bool affects(const QuadMesh& mesh, int element) const {
    if (mesh.elem_subdomain[static_cast<std::size_t>(element)] != 1) return false;
    const auto conn = mesh.element_nodes(element);
    return std::any_of(conn.begin(), conn.end(), [&](int n) { return pi_at(n) != nullptr; });
  }

  const Mat2& resistivity1() const { return resistivity1_; }
  const Mat2& resistivity2() const { return resistivity2_; }

 private:
  Mat2 resistivity1_ = Mat2::Identity();
  Mat2 resistivity2_ = Mat2::Identity();
  std::vector<int> slot_;
  std::vector<InterfaceNode> nodes_;
  std::vector<Mat2> pi_;
};

/// Block-diagonal T for an element with 3 unknowns (u_x, u_y, p) per node:
/// diag(π, 1) where `pis[a]` is non-null, identity elsewhere.
inline Eigen::MatrixXd build_element_transform(std::span<const Mat2* const> pis) {
  const auto n = static_cast<Eigen::Index>(3 * pis.size());
  Eigen::MatrixXd t = Eigen::MatrixXd::Identity(n, n);
  for (std::size_t a = 0; a < pis.size(); ++a)
    if (pis[a]) t.block<2, 2>(static_cast<Eigen::Index>(3 * a), static_cast<Eigen::Index>(3 * a)) = *pis[a];
  return t;
}

inline Eigen::MatrixXd element_transform(const QuadMesh& mesh, int element, const InterfaceTransform& transform) {
  if (!transform.affects(mesh, element))
    throw std::invalid_argument("element is not a subdomain-1 element adjacent to the interface");
  std::vector<const Mat2*> pis;
  for (int n : mesh.element_nodes(element)) pis.push_back(transform.pi_at(n));
  return build_element_transform(pis);
}

enum class TransformMode { symmetric, nonsymmetric };

struct ElementSystem {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd rhs;
};

/// Symmetric mode: (Tᵀ K T, Tᵀ F). Nonsymmetric mode transforms only the
/// trial side: (K T, F).
inline ElementSystem transform_element_system(const Eigen::MatrixXd& k, const Eigen::VectorXd& f,
                                              const Eigen::MatrixXd& t, TransformMode mode) {
  if (k.rows() != k.cols() || t.rows() != t.cols() || k.cols() != t.rows() || f.size() != k.rows())
    throw std::invalid_argument("element system and transform dimensions do not conform");
  if (mode == TransformMode::symmetric) return {t.transpose() * k * t, t.transpose() * f};
  return {k * t, f};
}

/// Two-sided state at one interface node.
struct InterfacePair {
  int node;
  Vec2 u1;  // subdomain-1 side, π applied
  Vec2 u2;  // subdomain-2 side = reference value
  double p;
};

/// `reference` holds (u_x, u_y, p) per mesh node.
inline std::vector<InterfacePair> recover_interface_solution(std::span<const double> reference,
                                                             const InterfaceTransform& transform) {
  std::vector<InterfacePair> out;
  for (const auto& in : transform.nodes()) {
    const auto base = static_cast<std::size_t>(3 * in.node);
    if (base + 2 >= reference.size()) throw std::out_of_range("reference vector too short");
    const Vec2 u2(reference[base], reference[base + 1]);
    out.push_back({in.node, *transform.pi_at(in.node) * u2, u2, reference[base + 2]});
  }
  return out;
}

/// Largest violation of u1·n = u2·n and Λ1u1·τ = Λ2u2·τ over the pairs.
/// Potential continuity holds by construction (a single nodal value).
inline double interface_constraint_residual(std::span<const InterfacePair> pairs,
                                            const InterfaceTransform& transform) {
  double worst = 0.0;
  for (const auto& pr : pairs) {
    const InterfaceNode* in = nullptr;
    for (const auto& cand : transform.nodes())
      if (cand.node == pr.node) in = &cand;
    if (!in) continue;
    const double scale = std::max({1.0, pr.u1.norm(), pr.u2.norm()});
    worst = std::max(worst, std::abs(pr.u1.dot(in->normal) - pr.u2.dot(in->normal)) / scale);
    worst = std::max(worst, std::abs((transform.resistivity1() * pr.u1).dot(in->tangent) -
                                     (transform.resistivity2() * pr.u2).dot(in->tangent)) /
                                scale);
  }
  return worst;
}

}  // namespace darcy
