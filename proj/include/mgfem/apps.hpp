#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mgfem/backend.hpp"
#include "mgfem/fem.hpp"
#include "mgfem/mesh.hpp"
#include "mgfem/solve.hpp"
#include "mgfem/timing.hpp"

namespace mgfem {

/// A linear solve failed to reach its tolerance. Carries the solver record.
class SolverError : public NumericalError {
 public:
  SolverError(const std::string& what, int step, SolveRecord record)
      : NumericalError(what), step_(step), record_(std::move(record)) {}
  int step() const { return step_; }
  const SolveRecord& record() const { return record_; }

 private:
  int step_;
  SolveRecord record_;
};

struct SolverSettings {
  MgConfig mg;
  GmresConfig gmres;
  friend bool operator==(const SolverSettings&, const SolverSettings&) = default;
};

struct NamedField {
  std::string name;
  BlockVector values;
};

/// Called with the step index (0 for the initial state) and nodal fields.
using SnapshotFn = std::function<void(int step, double time, const FeSpace& space,
                                      const std::vector<NamedField>& fields)>;

/// GMRES with a multigrid preconditioner on a constrained finite element
/// system. Takes unconstrained loads and returns nodal values with hanging
/// nodes reconstructed.
class FeSolver {
 public:
  FeSolver(std::vector<FeSpace> spaces, const std::function<CsrMatrix(const FeSpace&)>& assemble,
           SmootherKind kind, const SolverSettings& settings, const Backend& backend);

  const FeSpace& space() const { return spaces_.back(); }
  const std::vector<FeSpace>& spaces() const { return spaces_; }
  const Multigrid& multigrid() const { return *mg_; }
  const MgLevel& top() const { return mg_->finest(); }

  /// Right-hand side actually handed to GMRES: H^T b with Dirichlet lifting.
  /// `dirichlet` is read at constrained entries only.
  BlockVector system_rhs(const BlockVector& b, std::span<const double> dirichlet) const;
  /// x is the initial guess on entry and the nodal solution on exit.
  SolveRecord solve(const BlockVector& b, std::span<const double> dirichlet, BlockVector& x) const;

 private:
  std::vector<FeSpace> spaces_;
  std::unique_ptr<Multigrid> mg_;
  GmresConfig gmres_;
  const Backend& backend_;
  std::vector<char> hanging_flat_;
};

// ---------------------------------------------------------------------------
// Transport-diffusion on the unit square

struct TransportDiffusionConfig {
  double lambda = 0.01;
  std::array<double, 2> b{0.0, -1.0};
  double dt = 0.02;
  double T = 2.0;
  int level = 4;  ///< uniform refinements of the unit square

  void validate() const;
  int n_steps() const;
  friend bool operator==(const TransportDiffusionConfig&, const TransportDiffusionConfig&) = default;
};

/// Closed-form solution exp(-(m(t,x)^2 + m(t,y)^2)/4), m(t,z) = 1/2 + cos(pi t/2)/4 - z.
double td_exact(double t, double x, double y);
/// Manufactured source d_t theta - lambda Lap theta + b . grad theta.
double td_source(const TransportDiffusionConfig& cfg, double t, double x, double y);

struct StepRecord {
  int step = 0;
  double time = 0.0;
  int iterations = 0;
  double residual = 0.0;
  double error = 0.0;  ///< L2 error (transport-diffusion) or max displacement (elasticity)
};

struct LinearRunResult {
  Index n_nodes = 0;
  Index n_dofs = 0;
  Index n_levels = 0;
  std::vector<StepRecord> steps;  ///< steps[0] is the initial state
  TimingReport timing = TimingReport::linear();
  BlockVector solution;
};

LinearRunResult run_transport_diffusion(const TransportDiffusionConfig& cfg, const SolverSettings& solver,
                                        const Backend& backend, const SnapshotFn& snapshot = {},
                                        int snapshot_stride = 0);

// ---------------------------------------------------------------------------
// Linear elasticity on the unit cube, written as a first-order system in (u, v)

struct ElasticityConfig {
  double lambda_lame = 8e4;
  double mu_lame = 2e4;
  std::array<double, 3> f{0.0, -1.0, 0.0};
  double dt = 0.025;
  double T = 2.5;
  RefinePattern pattern = RefinePattern::edge;
  int levels = 1;  ///< level 1 is the 8x8x8 cube; each further level adds one adaptive refinement

  void validate() const;
  int n_steps() const;
  friend bool operator==(const ElasticityConfig&, const ElasticityConfig&) = default;
};

/// The adaptive cube mesh of the given level and pattern.
HierMesh elasticity_mesh(RefinePattern pattern, int levels);

/// Block matrix [(M/dt) -M; K (M/dt)] over 6 components per node (u0..u2, v0..v2).
CsrMatrix assemble_elasticity_system(const FeSpace& space, double lambda, double mu, double dt);
/// Load of the block system: ((M/dt) u_old, M f + (M/dt) v_old).
BlockVector elasticity_rhs(const FeSpace& space, const CsrMatrix& mass, const BlockVector& state,
                           const std::array<double, 3>& f, double dt, const Backend& backend);

LinearRunResult run_elasticity(const ElasticityConfig& cfg, const SolverSettings& solver, const Backend& backend,
                               const SnapshotFn& snapshot = {}, int snapshot_stride = 0);
/// Build only the mesh, the spaces and the solver of an elasticity run.
FeSolver make_elasticity_solver(const ElasticityConfig& cfg, const SolverSettings& solver, const Backend& backend);

// ---------------------------------------------------------------------------
// Driven cavity, explicit pressure correction

struct NavierStokesConfig {
  double re = 1e3;
  double dt = 1e-4;
  double T = 0.02;
  std::array<Index, 3> cells{8, 8, 16};
  std::array<double, 3> lid{0.0, 1.0, 0.0};
  void validate() const;
  int n_steps() const;
  double nu() const { return 1.0 / re; }
  friend bool operator==(const NavierStokesConfig&, const NavierStokesConfig&) = default;
};

struct NsOperators {
  FeSpace velocity;  ///< 3 components on the refined mesh
  FeSpace pressure;  ///< scalar on the cavity mesh
  DiagOperator mv_lumped_inv;
  DiagOperator mp_lumped_inv;
  std::vector<double> mv_lumped;
  std::vector<double> mp_lumped;
  double nu = 0.0;
  CsrMatrix k_v;  ///< nu-scaled velocity stiffness
  CsrMatrix k_p;  ///< pressure Laplacian, no boundary conditions
  std::array<CsrMatrix, 3> c;  ///< convection matrices on the velocity space
  std::array<CsrMatrix, 3> g;  ///< gradient couplings velocity x pressure
};

NsOperators ns_assemble(const NavierStokesConfig& cfg);

/// Multigrid for the pure Neumann pressure Laplacian.
struct PressureSolver {
  std::vector<FeSpace> spaces;
  std::unique_ptr<Multigrid> mg;
  GmresConfig gmres;
};
PressureSolver make_pressure_solver(const NsOperators& ops, const SolverSettings& settings,
                                    const Backend& backend);

/// Step 1: explicit lumped-mass momentum update with Dirichlet values re-imposed.
BlockVector ns_momentum_step(const NsOperators& ops, const BlockVector& u_prev, const BlockVector& p_prev,
                             const BlockVector& q_prev, const BlockVector& f, double dt, const Backend& backend,
                             TimingReport* timing = nullptr);
/// sum_c G_c^T u_c on the pressure space.
BlockVector ns_divergence(const NsOperators& ops, const BlockVector& u, const Backend& backend);
/// Step 2: pressure increment with zero lumped mean. q holds the initial guess on entry.
SolveRecord ns_pressure_step(const NsOperators& ops, const BlockVector& u_new, double dt, const PressureSolver& ps,
                             BlockVector& q, const Backend& backend, TimingReport* timing = nullptr);
/// Step 3: p = p_prev + q - nu M_p^{-1} div u, mean-projected.
BlockVector ns_pressure_update(const NsOperators& ops, const BlockVector& p_prev, const BlockVector& q_new,
                               const BlockVector& u_new, double nu, const Backend& backend,
                               TimingReport* timing = nullptr);
/// u + dt M_v^{-1} sum_c G_c q at free velocity nodes.
BlockVector ns_corrected_velocity(const NsOperators& ops, const BlockVector& u, const BlockVector& q, double dt,
                                  const Backend& backend);
/// Initial pressure from (grad p, grad phi) = -(f, grad phi). f0 holds 3 components per
/// pressure node. Only a zero initial velocity is supported.
BlockVector initial_pressure(const NsOperators& ops, const BlockVector& f0, const PressureSolver& ps,
                             const Backend& backend, bool zero_initial_velocity = true);

struct NsDiagnostics {
  int step = 0;
  double time = 0.0;
  double kinetic_energy = 0.0;
  double divergence = 0.0;            ///< ||div u|| after the momentum step
  double corrected_divergence = 0.0;  ///< same after the implied pressure correction
  int gmres_iterations = 0;
  double pressure_mean = 0.0;         ///< lumped-mass mean of p
  double nodal_identity_error = 0.0;  ///< max |v^d(i,c) - u(i,d) u(i,c)|
};

struct NsRunResult {
  Index n_velocity_nodes = 0;
  Index n_pressure_nodes = 0;
  std::vector<NsDiagnostics> diagnostics;
  TimingReport timing = TimingReport::navier_stokes();
  BlockVector velocity;
  BlockVector pressure;
};

NsRunResult run_driven_cavity(const NavierStokesConfig& cfg, const SolverSettings& solver, const Backend& backend,
                              const SnapshotFn& snapshot = {}, int snapshot_stride = 0);

}  // namespace mgfem
