#pragma once

#include <algorithm>
#include <stdexcept>
#include <utility>

#include "darcy/mesh.hpp"

namespace darcy {

/// Piecewise-constant conductivity on the two subdomains.
///
/// `kinf` is the induced infinity norm (max absolute row sum) taken over
/// both tensors and `lambda` its reciprocal; these are the global scalars
/// weighting the stabilization terms.
struct MaterialField {
  Mat2 k1 = Mat2::Identity();
  Mat2 k2 = Mat2::Identity();
  Mat2 resistivity1 = Mat2::Identity();
  Mat2 resistivity2 = Mat2::Identity();
  double kinf = 1.0;
  double lambda = 1.0;
  double gamma = 1.0;

  static MaterialField from_tensors(const Mat2& k1, const Mat2& k2, double gamma = 1.0) {
    for (const Mat2* k : {&k1, &k2}) {
      if (std::abs((*k)(0, 1) - (*k)(1, 0)) > 1e-14 * k->cwiseAbs().maxCoeff())
        throw std::invalid_argument("conductivity tensor must be symmetric");
      Eigen::SelfAdjointEigenSolver<Mat2> eig(*k);
      if (!(eig.eigenvalues().minCoeff() > 0.0))
        throw std::invalid_argument("conductivity tensor must be positive definite");
    }
    MaterialField m;
    m.k1 = k1;
    m.k2 = k2;
    m.resistivity1 = k1.inverse();
    m.resistivity2 = k2.inverse();
    m.kinf = std::max(infinity_norm(k1), infinity_norm(k2));
    m.lambda = 1.0 / m.kinf;
    m.gamma = gamma;
    return m;
  }

  static double infinity_norm(const Mat2& a) { return a.cwiseAbs().rowwise().sum().maxCoeff(); }

  const Mat2& conductivity(int subdomain) const { return subdomain == 1 ? k1 : k2; }
  const Mat2& resistivity(int subdomain) const { return subdomain == 1 ? resistivity1 : resistivity2; }
};

/// K1 = I on x < 0, K2 = gamma [[2,1],[1,2]] on x > 0.
inline MaterialField crumpton_material(double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  Mat2 k2;
  k2 << 2.0, 1.0, 1.0, 2.0;
  return MaterialField::from_tensors(Mat2::Identity(), gamma * k2, gamma);
}

inline MaterialField homogeneous_material(const Mat2& k = Mat2::Identity()) {
  return MaterialField::from_tensors(k, k);
}

/// (conductivity, resistivity) of one subdomain.
inline std::pair<Mat2, Mat2> tensors_at(const MaterialField& field, int subdomain) {
  if (subdomain != 1 && subdomain != 2) throw std::invalid_argument("subdomain tag must be 1 or 2");
  return {field.conductivity(subdomain), field.resistivity(subdomain)};
}

}  // namespace darcy
