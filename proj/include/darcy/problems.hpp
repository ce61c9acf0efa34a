#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "darcy/fields.hpp"
#include "darcy/material.hpp"
#include "darcy/mesh.hpp"

namespace darcy {

/// Benchmark with closed-form potential, velocity and source per subdomain.
struct ProblemSpec {
  std::string name;
  MaterialField material;
  Rect domain;
  double interface_x = 0.0;
  ScalarField potential;
  VectorField potential_gradient;
  VectorField velocity;  // -𝒦∇p
  ScalarField source;    // div u
};

/// Anisotropic two-material problem on [-1,1]² with the interface at x = 0:
///   p = γ(2 sin y + cos y) x + sin y   (x < 0, 𝒦 = I)
///   p = eˣ sin y                        (x > 0, 𝒦 = γ[[2,1],[1,2]])
inline ProblemSpec crumpton_problem(double gamma) {
  ProblemSpec ps;
  ps.name = "crumpton";
  ps.material = crumpton_material(gamma);
  ps.potential = [gamma](const Vec2& x, int side) {
    if (side == 1) return gamma * (2.0 * std::sin(x.y()) + std::cos(x.y())) * x.x() + std::sin(x.y());
    return std::exp(x.x()) * std::sin(x.y());
  };
  ps.potential_gradient = [gamma](const Vec2& x, int side) {
    const double s = std::sin(x.y()), c = std::cos(x.y());
    if (side == 1) return Vec2(gamma * (2.0 * s + c), gamma * (2.0 * c - s) * x.x() + c);
    const double ex = std::exp(x.x());
    return Vec2(ex * s, ex * c);
  };
  const MaterialField m = ps.material;
  const VectorField grad = ps.potential_gradient;
  ps.velocity = [m, grad](const Vec2& x, int side) { return Vec2(-(m.conductivity(side) * grad(x, side))); };
  // f = -div(𝒦∇p): equals p on the left (𝒦 = I, -Δp = p), -2γ eˣ cos y on the right.
  const ScalarField pot = ps.potential;
  ps.source = [gamma, pot](const Vec2& x, int side) {
    if (side == 1) return pot(x, 1);
    return -2.0 * gamma * std::exp(x.x()) * std::cos(x.y());
  };
  return ps;
}

/// Homogeneous isotropic problem p = eˣ sin y, 𝒦 = I, f = 0.
inline ProblemSpec smooth_problem() {
  ProblemSpec ps;
  ps.name = "smooth";
  ps.material = homogeneous_material();
  ps.potential = [](const Vec2& x, int) { return std::exp(x.x()) * std::sin(x.y()); };
  ps.potential_gradient = [](const Vec2& x, int) {
    const double ex = std::exp(x.x());
    return Vec2(ex * std::sin(x.y()), ex * std::cos(x.y()));
  };
  const VectorField grad = ps.potential_gradient;
  ps.velocity = [grad](const Vec2& x, int side) { return Vec2(-grad(x, side)); };
  ps.source = [](const Vec2&, int) { return 0.0; };
  return ps;
}

}  // namespace darcy
