// Convergence-study driver: solves on each requested mesh and writes
// convergence.csv (plus optional nodal field dumps) into the output directory.
//
// Exit codes: 0 ok, 1 configuration error, 2 numerical failure.
// DARCY_NUM_THREADS sets how many meshes are solved concurrently (default 1).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "darcy/report.hpp"
#include "darcy/verification.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

int thread_count_from_env() {
  const char* v = std::getenv("DARCY_NUM_THREADS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1 || n > 256) throw std::invalid_argument("DARCY_NUM_THREADS must be an integer in [1, 256]");
  return static_cast<int>(n);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace darcy;

  CLI::App app{"Darcy flow convergence studies on [-1,1]^2"};
  StudyConfig cfg;
  std::string out_dir = ".";
  bool dump_fields = false;
  std::optional<double> alpha, beta0, delta1, delta2;

  const std::map<std::string, Method> methods{{"galerkin", Method::galerkin}, {"mgls", Method::mgls},
                                              {"hvm", Method::hvm},           {"cgls", Method::cgls},
                                              {"dg", Method::dg}};
  const std::map<std::string, InterfaceMode> modes{{"continuous", InterfaceMode::continuous},
                                                   {"constrained", InterfaceMode::constrained},
                                                   {"constrained_ns", InterfaceMode::constrained_ns}};
  const std::map<std::string, ProblemKind> problems{{"crumpton", ProblemKind::crumpton},
                                                    {"smooth", ProblemKind::smooth}};
  const std::map<std::string, DarcyWeight> weights{{"tensor", DarcyWeight::subdomain_tensor},
                                                   {"scalar", DarcyWeight::global_scalar}};

  app.add_option("--method", cfg.method, "galerkin | mgls | hvm | cgls | dg")
      ->required()
      ->transform(CLI::CheckedTransformer(methods, CLI::ignore_case))
      ->option_text("METHOD");
  app.add_option("--order", cfg.order, "Polynomial order (1 or 2)")->check(CLI::IsMember({1, 2}));
  app.add_option("--meshes", cfg.meshes, "Comma-separated element counts per side")->delimiter(',');
  app.add_option("--gamma", cfg.gamma, "Anisotropy scale of the two-material problem")->check(CLI::PositiveNumber);
  app.add_option("--interface", cfg.interface_mode, "continuous | constrained | constrained_ns")
      ->transform(CLI::CheckedTransformer(modes, CLI::ignore_case))
      ->option_text("MODE");
  app.add_option("--problem", cfg.problem, "crumpton | smooth")
      ->transform(CLI::CheckedTransformer(problems, CLI::ignore_case))
      ->option_text("PROBLEM");
  app.add_option("--weight", cfg.weight, "Darcy residual weight: tensor | scalar")
      ->transform(CLI::CheckedTransformer(weights, CLI::ignore_case))
      ->option_text("WEIGHT");
  app.add_option("--alpha", alpha, "DG symmetry parameter in [-1, 1] (default -1)");
  app.add_option("--beta0", beta0, "DG penalty scale, beta = beta0 / h_e (default 10 k^2)");
  app.add_option("--delta1", delta1, "MGLS Darcy-residual weight (default 0.5)");
  app.add_option("--delta2", delta2, "MGLS mass-balance weight (default 0.5)");
  app.add_option("--out", out_dir, "Output directory");
  app.add_flag("--dump-fields", dump_fields, "Write fields_n{N}.csv for every mesh");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  int threads = 1;
  try {
    threads = thread_count_from_env();
    if ((alpha || beta0) && cfg.method != Method::dg)
      throw std::invalid_argument("--alpha/--beta0 apply to --method dg only");
    if ((delta1 || delta2) && cfg.method != Method::mgls)
      throw std::invalid_argument("--delta1/--delta2 apply to --method mgls only");
    cfg.dg = DGParams::defaults(cfg.order, alpha.value_or(-1.0));
    if (beta0) cfg.dg.beta0 = *beta0;
    if (cfg.method == Method::mgls) cfg.params = StabilizationParams::mgls(delta1.value_or(0.5), delta2.value_or(0.5));
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  if (cfg.method == Method::dg && !dg_stability_guaranteed(cfg.dg))
    std::cerr << "warning: DG with alpha = " << cfg.dg.alpha
              << " and beta0 = 0 has no discrete stability guarantee\n";

  std::vector<MeshRun> runs;
  try {
    runs = convergence_runs(cfg, threads, dump_fields);
  } catch (const StudyError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.numerical() ? kExitNumerical : kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  for (const auto& r : runs) {
    if (!(r.solver_residual <= kResidualTolerance)) {
      std::cerr << "error: mesh " << r.report.n << ": solver residual " << r.solver_residual << " exceeds tolerance\n";
      return kExitNumerical;
    }
  }

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    std::cerr << "error: cannot create output directory " << out_dir << ": " << ec.message() << '\n';
    return kExitConfig;
  }

  std::vector<ErrorReport> rows;
  for (const auto& r : runs) rows.push_back(r.report);
  const fs::path csv = fs::path(out_dir) / "convergence.csv";
  std::ofstream os(csv);
  write_convergence_csv(os, cfg.method, cfg.order, cfg.interface_mode, rows);
  if (dump_fields) {
    for (const auto& r : runs) {
      std::ofstream fo(fs::path(out_dir) / fields_filename(r.report.n));
      write_fields_csv(fo, r.fields);
    }
  }
  if (!os) {
    std::cerr << "error: failed writing " << csv << '\n';
    return kExitConfig;
  }

  for (const auto& r : rows) {
    std::cout << to_string(cfg.method) << " Q" << cfg.order << " n=" << r.n << "  err_p=" << r.err_p
              << "  err_u=" << r.err_u << "  err_divu=" << r.err_divu;
    if (r.rate_p) std::cout << "  rate_p=" << *r.rate_p;
    if (r.rate_u) std::cout << "  rate_u=" << *r.rate_u;
    std::cout << '\n';
  }
  return kExitOk;
}
