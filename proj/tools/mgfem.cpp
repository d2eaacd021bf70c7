// mgfem command-line driver.
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "mgfem/apps.hpp"
#include "mgfem/backend.hpp"
#include "mgfem/config.hpp"
#include "mgfem/io.hpp"

namespace fs = std::filesystem;
using namespace mgfem;

namespace {

constexpr int kConfigError = 2;
constexpr int kSolverError = 3;

struct RunArgs {
  std::string config_path;
  std::string backend;
  std::string out;
  int stride = -1;
  bool paper_scale = false;
  std::vector<std::string> overrides;
};

RunConfig build_config(const RunArgs& a) {
  RunConfig cfg = load_config(a.config_path);
  if (!a.backend.empty()) cfg.backend = a.backend;
  if (!a.out.empty()) cfg.output_dir = a.out;
  if (a.stride >= 0) cfg.snapshot_stride = a.stride;
  if (a.paper_scale) {
    cfg.ns.cells = {32, 32, 64};
    cfg.ns.re = 1e3;
  }
  for (const auto& kv : a.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'", kv, 0);
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what(), "", 0);
  }
  return cfg;
}

void write_text(const fs::path& p, const std::string& s) {
  auto os = open_output(p);
  os << s;
}

SnapshotFn vtk_writer(const fs::path& dir) {
  return [dir](int step, double, const FeSpace& space, const std::vector<NamedField>& fields) {
    char name[64];
    std::snprintf(name, sizeof name, "snapshot_%06d.vtk", step);
    write_vtk(space, fields, dir / name);
  };
}

int run(const RunArgs& args) {
  RunConfig cfg;
  try {
    cfg = build_config(args);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir);
  write_text(dir / "config.txt", serialize_config(cfg));
  const auto backend = make_backend(cfg.backend);
  const SnapshotFn snap = cfg.snapshot_stride > 0 ? vtk_writer(dir) : SnapshotFn{};
  try {
    switch (cfg.problem) {
      case Problem::transport_diffusion: {
        auto r = run_transport_diffusion(cfg.td, cfg.solver, *backend, snap, cfg.snapshot_stride);
        auto os = open_output(dir / "errors.csv");
        write_step_table(r.steps, "l2_error", os);
        write_timing_report(r.timing, dir / "timing.csv");
        std::cout << "transport-diffusion: " << r.n_dofs << " dofs, " << r.n_levels << " levels, L2 error at T "
                  << format_double(r.steps.back().error) << '\n';
        break;
      }
      case Problem::elasticity: {
        auto r = run_elasticity(cfg.elasticity, cfg.solver, *backend, snap, cfg.snapshot_stride);
        auto os = open_output(dir / "steps.csv");
        write_step_table(r.steps, "max_displacement", os);
        write_timing_report(r.timing, dir / "timing.csv");
        std::cout << "elasticity: " << r.n_dofs << " dofs, " << r.n_levels << " levels, max displacement "
                  << format_double(r.steps.back().error) << '\n';
        break;
      }
      case Problem::driven_cavity: {
        auto r = run_driven_cavity(cfg.ns, cfg.solver, *backend, snap, cfg.snapshot_stride);
        auto os = open_output(dir / "diagnostics.csv");
        write_ns_diagnostics(r.diagnostics, os);
        write_timing_report(r.timing, dir / "timing.csv");
        std::cout << "driven-cavity: " << r.n_velocity_nodes << " velocity nodes, " << r.n_pressure_nodes
                  << " pressure nodes, kinetic energy "
                  << format_double(r.diagnostics.empty() ? 0.0 : r.diagnostics.back().kinetic_energy) << '\n';
        break;
      }
    }
  } catch (const SolverError& e) {
    std::cerr << "solver failure at step " << e.step() << ": " << e.what() << '\n';
    if (!e.record().history.empty()) {
      auto os = open_output(dir / "failure_convergence.csv");
      write_convergence_csv(e.record(), os);
    }
    return kSolverError;
  } catch (const NumericalError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolverError;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometric multigrid finite element solver"};
  app.require_subcommand(1);
  RunArgs args;
  auto* run_cmd = app.add_subcommand("run", "Run the problem described by a config file");
  run_cmd->add_option("config", args.config_path, "Config file (key = value lines)")->required();
  run_cmd->add_option("--backend", args.backend, "Compute backend");
  run_cmd->add_option("--out", args.out, "Output directory");
  run_cmd->add_option("--snapshot-stride", args.stride, "Write VTK every N steps (0 disables)")
      ->check(CLI::NonNegativeNumber);
  run_cmd->add_flag("--paper-scale", args.paper_scale, "Cavity at 32x32x64 and Re=1000");
  run_cmd->add_option("--set", args.overrides, "Override a config key (key=value)");
  auto* keys_cmd = app.add_subcommand("defaults", "Print the default configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }
  if (keys_cmd->parsed()) {
    std::cout << serialize_config(RunConfig{});
    return 0;
  }
  try {
    return run(args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
