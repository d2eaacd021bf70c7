#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>

#include "mgfem/apps.hpp"
#include "mgfem/config.hpp"

namespace py = pybind11;
using namespace mgfem;

namespace {

py::tuple csr_tuple(const CsrMatrix& a) {
  std::vector<Index> ptr(a.row_ptr().begin(), a.row_ptr().end());
  std::vector<Index> col(a.col_idx().begin(), a.col_idx().end());
  std::vector<double> val(a.values().begin(), a.values().end());
  return py::make_tuple(std::move(val), std::move(col), std::move(ptr), py::make_tuple(a.n_rows(), a.n_cols()));
}

std::vector<double> to_list(const BlockVector& v) { return {v.data().begin(), v.data().end()}; }

py::list timing_rows(const TimingReport& t) {
  py::list out;
  for (const auto& r : t.rows()) out.append(py::make_tuple(r.label, r.seconds, r.count));
  return out;
}

py::list step_rows(const std::vector<StepRecord>& steps) {
  py::list out;
  for (const auto& s : steps) {
    py::dict d;
    d["step"] = s.step;
    d["time"] = s.time;
    d["iterations"] = s.iterations;
    d["residual"] = s.residual;
    d["value"] = s.error;
    out.append(d);
  }
  return out;
}

py::dict linear_result(const LinearRunResult& r) {
  py::dict d;
  d["n_nodes"] = r.n_nodes;
  d["n_dofs"] = r.n_dofs;
  d["n_levels"] = r.n_levels;
  d["steps"] = step_rows(r.steps);
  d["timing"] = timing_rows(r.timing);
  d["solution"] = to_list(r.solution);
  return d;
}

py::dict ns_result(const NsRunResult& r) {
  py::dict d;
  d["n_velocity_nodes"] = r.n_velocity_nodes;
  d["n_pressure_nodes"] = r.n_pressure_nodes;
  py::list diag;
  for (const auto& s : r.diagnostics) {
    py::dict e;
    e["step"] = s.step;
    e["time"] = s.time;
    e["kinetic_energy"] = s.kinetic_energy;
    e["divergence"] = s.divergence;
    e["corrected_divergence"] = s.corrected_divergence;
    e["gmres_iterations"] = s.gmres_iterations;
    e["pressure_mean"] = s.pressure_mean;
    e["nodal_identity_error"] = s.nodal_identity_error;
    diag.append(e);
  }
  d["diagnostics"] = diag;
  d["timing"] = timing_rows(r.timing);
  d["velocity"] = to_list(r.velocity);
  d["pressure"] = to_list(r.pressure);
  return d;
}

RunConfig config_from(const std::string& text, const std::map<std::string, std::string>& overrides) {
  RunConfig cfg = parse_config(text);
  for (const auto& [k, v] : overrides) set_config_value(cfg, k, v);
  cfg.validate();
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_mgfem, m) {
  m.doc() = "Geometric multigrid finite element solvers";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<SolverError>(m, "SolverError", numerical.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<UnsupportedError>(m, "UnsupportedError", base.ptr());

  m.def("config_keys", &config_keys);
  m.def("default_config", [] { return serialize_config(RunConfig{}); });
  m.def(
      "normalize_config",
      [](const std::string& text, const std::map<std::string, std::string>& overrides) {
        return serialize_config(config_from(text, overrides));
      },
      py::arg("text"), py::arg("overrides") = std::map<std::string, std::string>{},
      "Parse, apply overrides, validate and print every key.");
  m.def(
      "run",
      [](const std::string& text, const std::map<std::string, std::string>& overrides) -> py::dict {
        const RunConfig cfg = config_from(text, overrides);
        auto backend = make_backend(cfg.backend);
        py::dict out;
        {
          py::gil_scoped_release release;
          switch (cfg.problem) {
            case Problem::transport_diffusion: {
              auto r = run_transport_diffusion(cfg.td, cfg.solver, *backend);
              py::gil_scoped_acquire acquire;
              out = linear_result(r);
              break;
            }
            case Problem::elasticity: {
              auto r = run_elasticity(cfg.elasticity, cfg.solver, *backend);
              py::gil_scoped_acquire acquire;
              out = linear_result(r);
              break;
            }
            case Problem::driven_cavity: {
              auto r = run_driven_cavity(cfg.ns, cfg.solver, *backend);
              py::gil_scoped_acquire acquire;
              out = ns_result(r);
              break;
            }
          }
        }
        out["problem"] = to_string(cfg.problem);
        return out;
      },
      py::arg("text") = "", py::arg("overrides") = std::map<std::string, std::string>{},
      "Run the configured problem and return its diagnostics.");

  m.def("td_exact", &td_exact, py::arg("t"), py::arg("x"), py::arg("y"));

  m.def(
      "mesh_node_count",
      [](int dim, int refinements) { return unit_box_mesh(dim, refinements).active_nodes().size(); },
      py::arg("dim"), py::arg("refinements"));
  m.def(
      "adaptive_mesh_stats",
      [](const std::string& pattern, int levels) {
        auto mesh = elasticity_mesh(parse_refine_pattern(pattern), levels);
        return py::make_tuple(mesh.active_nodes().size(), hanging_fraction(mesh, true));
      },
      py::arg("pattern"), py::arg("levels"), "(nodes, edge-hanging fraction) of the adaptive cube mesh.");

  m.def(
      "stiffness_matrix",
      [](int dim, int refinements, double coeff) {
        FeSpace s(std::make_shared<const HierMesh>(unit_box_mesh(dim, refinements)), 1);
        return csr_tuple(assemble_stiffness(s, coeff));
      },
      py::arg("dim"), py::arg("refinements"), py::arg("coeff") = 1.0,
      "(data, indices, indptr, shape) of the Q1 stiffness matrix on the unit box.");
  m.def(
      "mass_matrix",
      [](int dim, int refinements) {
        FeSpace s(std::make_shared<const HierMesh>(unit_box_mesh(dim, refinements)), 1);
        return csr_tuple(assemble_mass(s).consistent);
      },
      py::arg("dim"), py::arg("refinements"));
  m.def(
      "prolongation_matrix",
      [](int dim, int coarse_refinements) {
        auto coarse_mesh = std::make_shared<const HierMesh>(unit_box_mesh(dim, coarse_refinements));
        auto fine_mesh = std::make_shared<const HierMesh>(uniform_refine(*coarse_mesh));
        auto h = build_hierarchy(*fine_mesh, coarse_mesh->n_active());
        auto spaces = hierarchy_spaces(h, 1);
        return csr_tuple(build_prolongation(spaces[spaces.size() - 2], spaces.back()).prolongation);
      },
      py::arg("dim"), py::arg("coarse_refinements"));
}
