#pragma once

#include <functional>

#include "darcy/mesh.hpp"

namespace darcy {

/// Closed-form data evaluated per subdomain (tag 1 or 2) so that one-sided
/// limits on the interface are well defined.
using ScalarField = std::function<double(const Vec2&, int)>;
using VectorField = std::function<Vec2(const Vec2&, int)>;

inline ScalarField zero_scalar() {
  return [](const Vec2&, int) { return 0.0; };
}

inline VectorField zero_vector() {
  return [](const Vec2&, int) { return Vec2(0.0, 0.0); };
}

}  // namespace darcy
