#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "darcy/fem.hpp"
#include "darcy/mesh.hpp"

using namespace darcy;

TEST(ReferenceBasis, BilinearCenterIsQuarter) {
  const auto s = reference_basis(1, Vec2(0.0, 0.0));
  for (int a = 0; a < 4; ++a) EXPECT_DOUBLE_EQ(s.values[a], 0.25);
}

TEST(ReferenceBasis, KroneckerAtNodes) {
  for (int order : {1, 2}) {
    const auto nodes = reference_nodes(order);
    for (std::size_t b = 0; b < nodes.size(); ++b) {
      const auto s = reference_basis(order, nodes[b]);
      for (int a = 0; a < s.size; ++a) EXPECT_NEAR(s.values[a], a == static_cast<int>(b) ? 1.0 : 0.0, 1e-15);
    }
  }
  const auto c = reference_basis(1, Vec2(-1.0, -1.0));
  EXPECT_EQ(c.values[0], 1.0);
  const auto q2 = reference_basis(2, Vec2(0.0, 0.0));
  EXPECT_DOUBLE_EQ(q2.values[8], 1.0);
}

TEST(ReferenceBasis, PartitionOfUnityAndReproduction) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int order : {1, 2}) {
    const auto nodes = reference_nodes(order);
    for (int t = 0; t < 50; ++t) {
      const Vec2 xi(u(rng), u(rng));
      const auto s = reference_basis(order, xi);
      double sum = 0.0, fx = 0.0;
      Vec2 grad_sum = Vec2::Zero();
      for (int a = 0; a < s.size; ++a) {
        sum += s.values[a];
        grad_sum += s.gradients[a];
        fx += s.values[a] * nodes[static_cast<std::size_t>(a)].x() * nodes[static_cast<std::size_t>(a)].y();
      }
      EXPECT_NEAR(sum, 1.0, 1e-14);
      EXPECT_NEAR(grad_sum.norm(), 0.0, 1e-13);
      EXPECT_NEAR(fx, xi.x() * xi.y(), 1e-14);
    }
  }
}

TEST(ReferenceBasis, GradientsAndHessiansMatchFiniteDifferences) {
  const double eps = 1e-5;
  for (int order : {1, 2}) {
    const Vec2 xi(0.31, -0.47);
    const auto s = reference_basis(order, xi);
    const auto sx = reference_basis(order, xi + Vec2(eps, 0.0));
    const auto sxm = reference_basis(order, xi - Vec2(eps, 0.0));
    const auto sy = reference_basis(order, xi + Vec2(0.0, eps));
    const auto sym = reference_basis(order, xi - Vec2(0.0, eps));
    for (int a = 0; a < s.size; ++a) {
      EXPECT_NEAR(s.gradients[a].x(), (sx.values[a] - sxm.values[a]) / (2 * eps), 1e-8);
      EXPECT_NEAR(s.gradients[a].y(), (sy.values[a] - sym.values[a]) / (2 * eps), 1e-8);
      EXPECT_NEAR(s.hessians[a](0, 0), (sx.gradients[a].x() - sxm.gradients[a].x()) / (2 * eps), 1e-7);
      EXPECT_NEAR(s.hessians[a](0, 1), (sy.gradients[a].x() - sym.gradients[a].x()) / (2 * eps), 1e-7);
      EXPECT_NEAR(s.hessians[a](1, 1), (sy.gradients[a].y() - sym.gradients[a].y()) / (2 * eps), 1e-7);
    }
  }
}

TEST(Gauss, TwoPointRule) {
  const auto r = gauss_rule_1d(2);
  ASSERT_EQ(r.points.size(), 2u);
  EXPECT_NEAR(std::abs(r.points[0]), 1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(r.points[0], -r.points[1], 1e-15);
  EXPECT_NEAR(r.weights[0], 1.0, 1e-15);
  EXPECT_NEAR(r.weights[1], 1.0, 1e-15);
}

TEST(Gauss, ThreePointRule) {
  const auto r = gauss_rule_1d(3);
  ASSERT_EQ(r.points.size(), 3u);
  std::vector<std::pair<double, double>> pw;
  for (std::size_t i = 0; i < 3; ++i) pw.emplace_back(r.points[i], r.weights[i]);
  std::sort(pw.begin(), pw.end());
  EXPECT_NEAR(pw[0].first, -std::sqrt(0.6), 1e-15);
  EXPECT_NEAR(pw[1].first, 0.0, 1e-15);
  EXPECT_NEAR(pw[2].first, std::sqrt(0.6), 1e-15);
  EXPECT_NEAR(pw[0].second, 5.0 / 9.0, 1e-15);
  EXPECT_NEAR(pw[1].second, 8.0 / 9.0, 1e-15);
}

TEST(Gauss, ThreeByThreeIntegratesX4Y2) {
  const auto q = gauss_rule(3);
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) s += q.weights[i] * std::pow(q.points[i].x(), 4) * std::pow(q.points[i].y(), 2);
  EXPECT_NEAR(s, (2.0 / 5.0) * (2.0 / 3.0), 1e-14);
}

TEST(Gauss, ExactForMonomialsUpToDegree2nMinus1) {
  const auto exact = [](int p) { return p % 2 ? 0.0 : 2.0 / (p + 1); };
  for (int n = 1; n <= 5; ++n) {
    const auto q = gauss_rule(n);
    for (int px = 0; px <= 2 * n - 1; ++px)
      for (int py = 0; py <= 2 * n - 1; ++py) {
        double s = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i)
          s += q.weights[i] * std::pow(q.points[i].x(), px) * std::pow(q.points[i].y(), py);
        EXPECT_NEAR(s, exact(px) * exact(py), 1e-13) << "n=" << n << " px=" << px << " py=" << py;
      }
  }
  EXPECT_THROW(gauss_rule_1d(0), std::invalid_argument);
  EXPECT_THROW(gauss_rule_1d(6), std::invalid_argument);
}

namespace {

QuadMesh single_element(const std::array<Vec2, 4>& corners) {
  auto m = build_structured_mesh(1, 1, Rect{0.0, 1.0, 0.0, 1.0}, -1.0, 1);
  for (int a = 0; a < 4; ++a) m.nodes[static_cast<std::size_t>(m.element_nodes(0)[static_cast<std::size_t>(a)])] = corners[static_cast<std::size_t>(a)];
  return m;
}

}  // namespace

TEST(MapToPhysical, UnitSquareHasQuarterJacobian) {
  const auto m = build_structured_mesh(1, 1, Rect{0.0, 1.0, 0.0, 1.0}, -1.0, 1);
  for (const auto& xi : gauss_rule(3).points) EXPECT_NEAR(map_to_physical(m, 0, xi).det_j, 0.25, 1e-15);
}

TEST(MapToPhysical, TranslationInvariance) {
  const auto a = build_structured_mesh(1, 1, Rect{0.0, 1.0, 0.0, 2.0}, -1.0, 2);
  const auto b = build_structured_mesh(1, 1, Rect{5.0, 6.0, -3.0, -1.0}, -10.0, 2);
  const Vec2 xi(0.2, -0.6);
  const auto pa = map_to_physical(a, 0, xi);
  const auto pb = map_to_physical(b, 0, xi);
  EXPECT_NEAR(pa.det_j, pb.det_j, 1e-14);
  for (int k = 0; k < 9; ++k) EXPECT_NEAR((pa.gradients[k] - pb.gradients[k]).norm(), 0.0, 1e-13);
}

TEST(MapToPhysical, ConvexQuadGradientsMatchFiniteDifferences) {
  const auto m = single_element({Vec2(0.0, 0.0), Vec2(2.0, 0.3), Vec2(1.7, 1.9), Vec2(-0.2, 1.2)});
  const double eps = 1e-6;
  for (const Vec2& xi : {Vec2(0.0, 0.0), Vec2(0.5, -0.3), Vec2(-0.7, 0.8)}) {
    const auto ep = map_to_physical(m, 0, xi);
    // Perturb the physical point by solving x(ξ) = x0 + d with Newton, then
    // difference the basis values.
    const auto basis_at = [&](const Vec2& target) {
      Vec2 z = xi;
      for (int it = 0; it < 30; ++it) {
        const auto p = map_to_physical(m, 0, z);
        z -= p.jacobian.inverse() * (p.x - target);
      }
      return reference_basis(1, z);
    };
    for (int dir = 0; dir < 2; ++dir) {
      Vec2 d = Vec2::Zero();
      d(dir) = eps;
      const auto sp = basis_at(ep.x + d);
      const auto sm = basis_at(ep.x - d);
      for (int a = 0; a < 4; ++a) EXPECT_NEAR(ep.gradients[a](dir), (sp.values[a] - sm.values[a]) / (2 * eps), 1e-6);
    }
  }
  EXPECT_GT(element_area(m, 0), 0.0);
}

TEST(MapToPhysical, AreaOfConvexQuad) {
  const std::array<Vec2, 4> c{Vec2(0.0, 0.0), Vec2(2.0, 0.3), Vec2(1.7, 1.9), Vec2(-0.2, 1.2)};
  double shoelace = 0.0;
  for (int i = 0; i < 4; ++i) {
    const Vec2& p = c[static_cast<std::size_t>(i)];
    const Vec2& q = c[static_cast<std::size_t>((i + 1) % 4)];
    shoelace += 0.5 * (p.x() * q.y() - q.x() * p.y());
  }
  EXPECT_NEAR(element_area(single_element(c), 0), shoelace, 1e-12 * shoelace);
}

TEST(MapToPhysical, DegenerateElementThrows) {
  const auto m = single_element({Vec2(0.0, 0.0), Vec2(1.0, 0.0), Vec2(1.0, 0.0), Vec2(0.0, 1.0)});
  EXPECT_THROW(map_to_physical(m, 0, Vec2(1.0, 1.0)), DegenerateElementError);
  const auto inverted = single_element({Vec2(0.0, 0.0), Vec2(0.0, 1.0), Vec2(1.0, 1.0), Vec2(1.0, 0.0)});
  EXPECT_THROW(map_to_physical(inverted, 0, Vec2(0.0, 0.0)), DegenerateElementError);
}

TEST(EdgeReferencePoint, TraversesCounterclockwise) {
  EXPECT_EQ(edge_reference_point(0, -1.0), Vec2(-1.0, -1.0));
  EXPECT_EQ(edge_reference_point(1, -1.0), Vec2(1.0, -1.0));
  EXPECT_EQ(edge_reference_point(2, -1.0), Vec2(1.0, 1.0));
  EXPECT_EQ(edge_reference_point(3, -1.0), Vec2(-1.0, 1.0));
  EXPECT_THROW(edge_reference_point(4, 0.0), std::invalid_argument);
}
