#pragma once

#include <cmath>
#include <cstdlib>
#include <future>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "darcy/assembly.hpp"
#include "darcy/dg.hpp"
#include "darcy/fem.hpp"
#include "darcy/interface.hpp"
#include "darcy/linsolve.hpp"
#include "darcy/problems.hpp"

namespace darcy {

struct FieldSample {
  double p = 0.0;
  Vec2 u = Vec2::Zero();
  double div_u = 0.0;
};

/// A discrete (p_h, u_h) that can be sampled inside any element.
class DiscreteSolution {
 public:
  virtual ~DiscreteSolution() = default;
  virtual FieldSample evaluate(int element, const ElementPoint& point) const = 0;
};

/// Conforming potential with the direct velocity u_G = -𝒦∇p_h.
class GalerkinSolution final : public DiscreteSolution {
 public:
  GalerkinSolution(const QuadMesh& mesh, const MaterialField& material, std::vector<double> potential)
      : mesh_(&mesh), material_(material), potential_(std::move(potential)) {}

  FieldSample evaluate(int e, const ElementPoint& ep) const override {
    const Mat2& k = material_.conductivity(mesh_->elem_subdomain[static_cast<std::size_t>(e)]);
    const auto conn = mesh_->element_nodes(e);
    FieldSample s;
    Vec2 grad = Vec2::Zero();
    Mat2 hess = Mat2::Zero();
    for (int a = 0; a < ep.shape.size; ++a) {
      const double c = potential_[static_cast<std::size_t>(conn[static_cast<std::size_t>(a)])];
      s.p += c * ep.shape.values[a];
      grad += c * ep.gradients[a];
      hess += c * ep.hessians[a];
    }
    s.u = -(k * grad);
    s.div_u = -(k.cwiseProduct(hess)).sum();
    return s;
  }

  std::span<const double> potential() const { return potential_; }

 private:
  const QuadMesh* mesh_;
  MaterialField material_;
  std::vector<double> potential_;
};

/// Equal-order (u_h, p_h). In constrained modes the stored vector is the
/// reference field and subdomain-1 elements touching Γ are evaluated through
/// their element transform.
class MixedSolution final : public DiscreteSolution {
 public:
  MixedSolution(const QuadMesh& mesh, std::vector<double> reference, InterfaceTransform transform)
      : mesh_(&mesh), reference_(std::move(reference)), transform_(std::move(transform)) {}

  Eigen::VectorXd element_unknowns(int e) const {
    const auto conn = mesh_->element_nodes(e);
    Eigen::VectorXd ue(static_cast<Eigen::Index>(3 * conn.size()));
    for (std::size_t a = 0; a < conn.size(); ++a)
      for (int c = 0; c < 3; ++c)
        ue(static_cast<Eigen::Index>(3 * a) + c) = reference_[static_cast<std::size_t>(3 * conn[a] + c)];
    if (!transform_.empty() && transform_.affects(*mesh_, e)) return element_transform(*mesh_, e, transform_) * ue;
    return ue;
  }

  FieldSample evaluate(int e, const ElementPoint& ep) const override {
    const auto ue = element_unknowns(e);
    FieldSample s;
    for (int a = 0; a < ep.shape.size; ++a) {
      const Vec2 ua(ue(3 * a), ue(3 * a + 1));
      s.u += ep.shape.values[a] * ua;
      s.div_u += ep.gradients[a].dot(ua);
      s.p += ep.shape.values[a] * ue(3 * a + 2);
    }
    return s;
  }

  std::span<const double> reference() const { return reference_; }
  const InterfaceTransform& transform() const { return transform_; }

 private:
  const QuadMesh* mesh_;
  std::vector<double> reference_;
  InterfaceTransform transform_;
};

/// Broken potential with elementwise u = -𝒦∇p_h.
class DgSolution final : public DiscreteSolution {
 public:
  DgSolution(const QuadMesh& mesh, const MaterialField& material, BrokenField field)
      : mesh_(&mesh), material_(material), field_(std::move(field)) {}

  FieldSample evaluate(int e, const ElementPoint& ep) const override {
    const Mat2& k = material_.conductivity(mesh_->elem_subdomain[static_cast<std::size_t>(e)]);
    const auto c = field_.element(e);
    FieldSample s;
    Vec2 grad = Vec2::Zero();
    Mat2 hess = Mat2::Zero();
    for (int a = 0; a < ep.shape.size; ++a) {
      s.p += c[static_cast<std::size_t>(a)] * ep.shape.values[a];
      grad += c[static_cast<std::size_t>(a)] * ep.gradients[a];
      hess += c[static_cast<std::size_t>(a)] * ep.hessians[a];
    }
    s.u = -(k * grad);
    s.div_u = -(k.cwiseProduct(hess)).sum();
    return s;
  }

  const BrokenField& field() const { return field_; }

 private:
  const QuadMesh* mesh_;
  MaterialField material_;
  BrokenField field_;
};

struct ErrorNorms {
  double err_p = 0.0;
  double err_u = 0.0;
  double err_divu = 0.0;
};

/// L²(Ω) norms of p - p_h, u - u_h and div u - div u_h by elementwise Gauss
/// quadrature (`points` per direction; 0 selects 3 for Q1, 4 for Q2). The
/// exact divergence is the problem's source.
inline ErrorNorms l2_errors(const QuadMesh& mesh, const DiscreteSolution& solution, const ProblemSpec& problem,
                            int points = 0) {
  const auto q = gauss_rule(points > 0 ? points : default_gauss_points(mesh.order));
  double ep2 = 0.0, eu2 = 0.0, ed2 = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const int tag = mesh.elem_subdomain[static_cast<std::size_t>(e)];
    for (std::size_t g = 0; g < q.size(); ++g) {
      const auto ep = map_to_physical(mesh, e, q.points[g]);
      const double w = q.weights[g] * ep.det_j;
      const auto s = solution.evaluate(e, ep);
      const double dp = problem.potential(ep.x, tag) - s.p;
      const Vec2 du = problem.velocity(ep.x, tag) - s.u;
      const double dd = problem.source(ep.x, tag) - s.div_u;
      ep2 += w * dp * dp;
      eu2 += w * du.squaredNorm();
      ed2 += w * dd * dd;
    }
  }
  return {std::sqrt(ep2), std::sqrt(eu2), std::sqrt(ed2)};
}

/// slope_i = log(e_i / e_{i+1}) / log(h_i / h_{i+1}).
inline std::vector<double> fit_rate(std::span<const double> h, std::span<const double> errors) {
  if (h.size() != errors.size()) throw std::invalid_argument("h and error lists differ in length");
  for (std::size_t i = 0; i < h.size(); ++i)
    if (!(h[i] > 0.0) || !(errors[i] > 0.0)) throw std::invalid_argument("rates need positive h and errors");
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < h.size(); ++i)
    out.push_back(std::log(errors[i] / errors[i + 1]) / std::log(h[i] / h[i + 1]));
  return out;
}

enum class ProblemKind { crumpton, smooth };

inline ProblemSpec make_problem(ProblemKind kind, double gamma) {
  return kind == ProblemKind::crumpton ? crumpton_problem(gamma) : smooth_problem();
}

struct StudyConfig {
  Method method = Method::cgls;
  int order = 1;
  std::vector<int> meshes{8, 16, 32, 64};
  InterfaceMode interface_mode = InterfaceMode::continuous;
  double gamma = 1.0;
  ProblemKind problem = ProblemKind::crumpton;
  DGParams dg = DGParams::defaults(1);
  std::optional<StabilizationParams> params;  // overrides the default set of `method`
  DarcyWeight weight = DarcyWeight::subdomain_tensor;

  void validate() const {
    if (order != 1 && order != 2) throw std::invalid_argument("order must be 1 or 2");
    if (meshes.empty()) throw std::invalid_argument("at least one mesh size is required");
    for (std::size_t i = 0; i < meshes.size(); ++i) {
      if (meshes[i] < 1) throw std::invalid_argument("mesh sizes must be positive");
      if (i > 0 && meshes[i] <= meshes[i - 1]) throw std::invalid_argument("mesh sizes must be strictly increasing");
      if (meshes[i] % 2 != 0) throw std::invalid_argument("mesh sizes must be even so that x = 0 is a mesh line");
    }
    const bool mixed = method == Method::mgls || method == Method::hvm || method == Method::cgls;
    if (!mixed && interface_mode != InterfaceMode::continuous)
      throw std::invalid_argument("constrained interface modes apply to mixed methods only");
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    if (method == Method::dg) dg.validate();
  }
};

struct ErrorReport {
  int n = 0;
  double h = 0.0;
  double err_p = 0.0;
  double err_u = 0.0;
  double err_divu = 0.0;
  std::optional<double> rate_p, rate_u, rate_divu;
};

/// Nodal field sample for dumps; `side` is the subdomain the values belong to.
struct NodeRecord {
  double x, y, ux, uy, p;
  int side;
};

struct MeshRun {
  ErrorReport report;
  double solver_residual = 0.0;
  double interface_residual = 0.0;  // constrained modes only
  std::vector<InterfacePair> interface_pairs;
  std::vector<NodeRecord> fields;
};

namespace detail {

// Nodal values averaged over the adjacent elements. With `two_sided`, nodes
// on Γ get one record per subdomain; otherwise a single record tagged with
// node_subdomain().
inline std::vector<NodeRecord> nodal_records(const QuadMesh& mesh, const DiscreteSolution& sol, bool two_sided) {
  const auto refs = reference_nodes(mesh.order);
  const auto nn = static_cast<std::size_t>(mesh.num_nodes());
  std::array<std::vector<FieldSample>, 2> acc{std::vector<FieldSample>(nn), std::vector<FieldSample>(nn)};
  std::array<std::vector<int>, 2> cnt{std::vector<int>(nn, 0), std::vector<int>(nn, 0)};
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const int side = two_sided ? mesh.elem_subdomain[static_cast<std::size_t>(e)] - 1 : 0;
    const auto conn = mesh.element_nodes(e);
    for (std::size_t a = 0; a < conn.size(); ++a) {
      const auto s = sol.evaluate(e, map_to_physical(mesh, e, refs[a]));
      auto& slot = acc[static_cast<std::size_t>(side)][static_cast<std::size_t>(conn[a])];
      slot.p += s.p;
      slot.u += s.u;
      ++cnt[static_cast<std::size_t>(side)][static_cast<std::size_t>(conn[a])];
    }
  }
  std::vector<NodeRecord> out;
  for (std::size_t n = 0; n < nn; ++n) {
    const Vec2& x = mesh.nodes[n];
    for (int side = 0; side < 2; ++side) {
      const int c = cnt[static_cast<std::size_t>(side)][n];
      if (c == 0) continue;
      const auto& s = acc[static_cast<std::size_t>(side)][n];
      const int tag = two_sided ? side + 1 : node_subdomain(mesh, static_cast<int>(n));
      out.push_back({x.x(), x.y(), s.u.x() / c, s.u.y() / c, s.p / c, tag});
    }
  }
  return out;
}

}  // namespace detail

/// One solve plus error evaluation on the n x n mesh of [-1,1]².
inline MeshRun run_single(const StudyConfig& cfg, int n, bool collect_fields = false) {
  const ProblemSpec problem = make_problem(cfg.problem, cfg.gamma);
  const QuadMesh mesh = build_structured_mesh(n, n, problem.domain, problem.interface_x, cfg.order);
  MeshRun run;
  SolveReport sr;
  std::unique_ptr<DiscreteSolution> solution;

  switch (cfg.method) {
    case Method::galerkin: {
      const auto gp = assemble_galerkin(mesh, problem.material, problem.source, problem.potential);
      const auto x = solve(gp.reduced.system.matrix, gp.reduced.system.rhs, true, &sr);
      solution = std::make_unique<GalerkinSolution>(mesh, problem.material, gp.reduced.expand(x));
      break;
    }
    case Method::dg: {
      const auto sys = assemble_dg(mesh, problem.material, problem.source, cfg.dg, problem.potential);
      auto x = solve(sys.matrix, sys.rhs, sys.symmetric, &sr);
      solution = std::make_unique<DgSolution>(mesh, problem.material, BrokenField{mesh.nodes_per_element(), std::move(x)});
      break;
    }
    default: {
      const auto params = cfg.params ? *cfg.params : StabilizationParams::for_method(cfg.method);
      MixedOptions opt;
      opt.interface_mode = cfg.interface_mode;
      opt.weight = cfg.weight;
      opt.pinned_potential = problem.potential(mesh.nodes.front(), node_subdomain(mesh, 0));
      auto mp = assemble_stabilized_mixed(mesh, problem.material, params, problem.source, problem.velocity, opt);
      const auto x = solve(mp.reduced.system.matrix, mp.reduced.system.rhs, mp.reduced.system.symmetric, &sr);
      auto mixed = std::make_unique<MixedSolution>(mesh, mp.reduced.expand(x), std::move(mp.transform));
      if (cfg.interface_mode != InterfaceMode::continuous) {
        run.interface_pairs = recover_interface_solution(mixed->reference(), mixed->transform());
        run.interface_residual = interface_constraint_residual(run.interface_pairs, mixed->transform());
      }
      solution = std::move(mixed);
    }
  }

  const auto norms = l2_errors(mesh, *solution, problem);
  run.report = {n, mesh.h(), norms.err_p, norms.err_u, norms.err_divu, {}, {}, {}};
  run.solver_residual = sr.relative_residual;
  if (collect_fields)
    run.fields = detail::nodal_records(mesh, *solution, cfg.interface_mode != InterfaceMode::continuous);
  return run;
}

inline void fill_rates(std::vector<ErrorReport>& rows) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& a = rows[i - 1];
    auto& b = rows[i];
    const auto rate = [&](double ea, double eb) -> std::optional<double> {
      if (!(ea > 0.0) || !(eb > 0.0)) return std::nullopt;
      const double hs[2] = {a.h, b.h};
      const double es[2] = {ea, eb};
      return fit_rate(hs, es).front();
    };
    b.rate_p = rate(a.err_p, b.err_p);
    b.rate_u = rate(a.err_u, b.err_u);
    b.rate_divu = rate(a.err_divu, b.err_divu);
  }
}

/// Error of a solve on a specific mesh, carried with the mesh size.
class StudyError : public std::runtime_error {
 public:
  StudyError(int n, const std::string& what, bool numerical)
      : std::runtime_error("mesh " + std::to_string(n) + ": " + what), n_(n), numerical_(numerical) {}
  int mesh() const { return n_; }
  bool numerical() const { return numerical_; }

 private:
  int n_;
  bool numerical_;
};

/// Runs every mesh of the study (up to `threads` at a time) and returns the
/// reports ordered by mesh, with consecutive-pair rates filled in.
inline std::vector<MeshRun> convergence_runs(const StudyConfig& cfg, int threads = 1, bool collect_fields = false) {
  cfg.validate();
  const auto run_one = [&](int n) {
    try {
      return run_single(cfg, n, collect_fields);
    } catch (const NumericalError& e) {
      throw StudyError(n, e.what(), true);
    } catch (const DegenerateElementError& e) {
      throw StudyError(n, e.what(), true);
    }
  };
  std::vector<MeshRun> runs;
  if (threads <= 1) {
    for (int n : cfg.meshes) runs.push_back(run_one(n));
  } else {
    std::vector<std::future<MeshRun>> pending;
    std::size_t next = 0;
    while (next < cfg.meshes.size() || !pending.empty()) {
      while (next < cfg.meshes.size() && static_cast<int>(pending.size()) < threads)
        pending.push_back(std::async(std::launch::async, run_one, cfg.meshes[next++]));
      runs.push_back(pending.front().get());
      pending.erase(pending.begin());
    }
  }
  std::vector<ErrorReport> rows;
  for (const auto& r : runs) rows.push_back(r.report);
  fill_rates(rows);
  for (std::size_t i = 0; i < runs.size(); ++i) runs[i].report = rows[i];
  return runs;
}

inline std::vector<ErrorReport> convergence_study(const StudyConfig& cfg, int threads = 1) {
  std::vector<ErrorReport> out;
  for (auto& r : convergence_runs(cfg, threads)) out.push_back(r.report);
  return out;
}

}  // namespace darcy
