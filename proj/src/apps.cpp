#include "mgfem/apps.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

namespace mgfem {

namespace {

int steps_for(double T, double dt, const char* section) {
  const double n = std::round(T / dt);
  if (!(n >= 1.0) || std::abs(n * dt - T) > 1e-9 * std::max(1.0, T))
    throw Error(std::string(section) + ".T must be a positive multiple of " + section + ".dt");
  if (n > 1e8) throw Error(std::string(section) + ".T/dt exceeds 1e8 steps");
  return static_cast<int>(n);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(what);
}

void append(std::vector<Triplet>& t, const CsrMatrix& a, double scale = 1.0) {
  auto rp = a.row_ptr();
  auto ci = a.col_idx();
  auto v = a.values();
  for (Index i = 0; i < a.n_rows(); ++i)
    for (Index k = rp[i]; k < rp[i + 1]; ++k) t.push_back({i, ci[k], scale * v[k]});
}

// Optional scope; a null report records nothing.
class Scope {
 public:
  Scope(TimingReport* r, const char* label) : r_(r) {
    if (r_) r_->start(label);
  }
  ~Scope() {
    if (r_) r_->stop();
  }
  Scope(const Scope&) = delete;
  Scope& operator=(const Scope&) = delete;

 private:
  TimingReport* r_;
};

bool snapshot_due(int step, int n_steps, int stride) {
  return stride > 0 && (step % stride == 0 || step == n_steps);
}

}  // namespace

// ---------------------------------------------------------------------------

FeSolver::FeSolver(std::vector<FeSpace> spaces, const std::function<CsrMatrix(const FeSpace&)>& assemble,
                   SmootherKind kind, const SolverSettings& settings, const Backend& backend)
    : spaces_(std::move(spaces)), gmres_(settings.gmres), backend_(backend) {
  gmres_.validate();
  mg_ = std::make_unique<Multigrid>(build_levels(spaces_, assemble, kind), settings.mg, backend_);
  hanging_flat_ = hanging_mask_flat(spaces_.back());
}

BlockVector FeSolver::system_rhs(const BlockVector& b, std::span<const double> dirichlet) const {
  const MgLevel& lv = top();
  if (b.size() != lv.a.n_rows()) throw DimensionError("FeSolver: load does not match the system");
  BlockVector rhs = space().hanging().empty() ? b : constrain_rhs(b, lv.hanging, hanging_flat_, backend_);
  const auto mask = space().dirichlet_mask();
  if (static_cast<Index>(dirichlet.size()) != rhs.size()) throw DimensionError("FeSolver: Dirichlet data size");
  BlockVector g(rhs.n_nodes(), rhs.n_comp());
  for (Index k = 0; k < g.size(); ++k)
    if (mask[k]) g[k] = dirichlet[k];
  backend_.spmv(-1.0, lv.lifting, g, 1.0, rhs);
  for (Index k = 0; k < g.size(); ++k)
    if (mask[k]) rhs[k] = g[k];
  return rhs;
}

SolveRecord FeSolver::solve(const BlockVector& b, std::span<const double> dirichlet, BlockVector& x) const {
  const MgLevel& lv = top();
  BlockVector rhs = system_rhs(b, dirichlet);
  if (x.size() != rhs.size()) x = BlockVector(rhs.n_nodes(), rhs.n_comp());
  const auto mask = space().dirichlet_mask();
  for (Index k = 0; k < x.size(); ++k) {
    if (hanging_flat_[k]) x[k] = 0.0;
    if (mask[k]) x[k] = dirichlet[k];
  }
  LinearOperator apply = [&](const BlockVector& in, BlockVector& out) {
    if (out.size() != in.size()) out = BlockVector(in.n_nodes(), in.n_comp());
    backend_.spmv(1.0, lv.a, in, 0.0, out);
  };
  LinearOperator pc = [&](const BlockVector& in, BlockVector& out) { mg_->precondition(in, out); };
  SolveRecord rec = gmres(apply, pc, rhs, x, gmres_, backend_);
  if (!space().hanging().empty()) {
    BlockVector y(x.n_nodes(), x.n_comp());
    backend_.spmv(1.0, lv.hanging, x, 0.0, y);
    x = std::move(y);
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Transport-diffusion

void TransportDiffusionConfig::validate() const {
  require(lambda > 0.0 && std::isfinite(lambda), "td.lambda must be positive");
  require(dt > 0.0 && std::isfinite(dt), "td.dt must be positive");
  require(T > 0.0 && std::isfinite(T), "td.T must be positive");
  require(std::isfinite(b[0]) && std::isfinite(b[1]), "td.b must be finite");
  require(level >= 1 && level <= 12, "td.level must lie in [1, 12]");
  steps_for(T, dt, "td");
}

int TransportDiffusionConfig::n_steps() const { return steps_for(T, dt, "td"); }

namespace {

struct TdTerms {
  double theta, dt, dx, dy, lap;
};

TdTerms td_terms(double t, double x, double y) {
  const double c = 0.5 + 0.25 * std::cos(0.5 * std::numbers::pi * t);
  const double mdot = -0.125 * std::numbers::pi * std::sin(0.5 * std::numbers::pi * t);
  const double mx = c - x, my = c - y;
  const double th = std::exp(-0.25 * (mx * mx + my * my));
  return {th, -0.5 * th * mdot * (mx + my), 0.5 * th * mx, 0.5 * th * my,
          th * (0.25 * (mx * mx + my * my) - 1.0)};
}

}  // namespace

double td_exact(double t, double x, double y) { return td_terms(t, x, y).theta; }

double td_source(const TransportDiffusionConfig& cfg, double t, double x, double y) {
  const auto s = td_terms(t, x, y);
  return s.dt - cfg.lambda * s.lap + cfg.b[0] * s.dx + cfg.b[1] * s.dy;
}

LinearRunResult run_transport_diffusion(const TransportDiffusionConfig& cfg, const SolverSettings& solver,
                                        const Backend& backend, const SnapshotFn& snapshot, int snapshot_stride) {
  cfg.validate();
  LinearRunResult res;
  auto& timing = res.timing;
  const int n_steps = cfg.n_steps();
  const ExactFunction exact = [](double t, const Point& p) { return std::vector<double>{td_exact(t, p[0], p[1])}; };

  std::optional<FeSolver> fs;
  std::vector<double> lumped;
  {
    ScopedTimer st(timing, "init");
    auto h = build_hierarchy(unit_box_mesh(2, cfg.level), solver.mg.coarse_target);
    auto spaces = hierarchy_spaces(h, 1);
    for (auto& s : spaces) s.set_boundary_dirichlet([](const Point&) { return std::vector<double>{0.0}; });
    const double lambda = cfg.lambda, dt = cfg.dt;
    const std::array<double, 3> b{cfg.b[0], cfg.b[1], 0.0};
    fs.emplace(std::move(spaces), [=](const FeSpace& s) {
      std::vector<Triplet> t;
      const auto m = assemble_mass(s).lumped.diagonal();
      for (Index i = 0; i < s.n_nodes(); ++i) t.push_back({i, i, m[i] / dt});
      append(t, assemble_stiffness(s, lambda));
      append(t, assemble_advection(s, b));
      return CsrMatrix::from_triplets(s.n_nodes(), s.n_nodes(), std::move(t));
    }, SmootherKind::point_jacobi, solver, backend);
    lumped = assemble_mass(fs->space()).lumped.diagonal();
  }
  const FeSpace& space = fs->space();
  res.n_nodes = space.n_nodes();
  res.n_dofs = space.n_dofs();
  res.n_levels = fs->multigrid().n_levels();

  BlockVector theta = interpolate(space, exact, 0.0);
  res.steps.push_back({0, 0.0, 0, 0.0, l2_error(space, theta, exact, 0.0)});
  if (snapshot && snapshot_due(0, n_steps, snapshot_stride)) snapshot(0, 0.0, space, {{"theta", theta}});

  BlockVector rhs(space.n_nodes(), 1);
  for (int m = 1; m <= n_steps; ++m) {
    const double t = m * cfg.dt;
    BlockVector g;
    {
      ScopedTimer st(timing, "rhs");
      for (Index i = 0; i < space.n_nodes(); ++i) {
        const auto& x = space.node_coord(i);
        rhs[i] = lumped[i] * (td_source(cfg, t, x[0], x[1]) + theta[i] / cfg.dt);
      }
      g = interpolate(space, exact, t);
    }
    SolveRecord rec;
    {
      ScopedTimer st(timing, "solve");
      rec = fs->solve(rhs, g.data(), theta);
    }
    if (!rec.converged)
      throw SolverError("transport-diffusion: GMRES did not converge at step " + std::to_string(m), m, rec);
    res.steps.push_back({m, t, rec.iterations, rec.final_residual, l2_error(space, theta, exact, t)});
    if (snapshot && snapshot_due(m, n_steps, snapshot_stride)) snapshot(m, t, space, {{"theta", theta}});
  }
  timing.set_count("sum", n_steps);
  res.solution = std::move(theta);
  return res;
}

// ---------------------------------------------------------------------------
// Elasticity

void ElasticityConfig::validate() const {
  require(mu_lame > 0.0 && std::isfinite(mu_lame), "elasticity.mu must be positive");
  require(lambda_lame >= 0.0 && std::isfinite(lambda_lame), "elasticity.lambda must be non-negative");
  require(dt > 0.0 && std::isfinite(dt), "elasticity.dt must be positive");
  require(T > 0.0 && std::isfinite(T), "elasticity.T must be positive");
  for (double v : f) require(std::isfinite(v), "elasticity.f must be finite");
  require(levels >= 1 && levels <= 8, "elasticity.levels must lie in [1, 8]");
  steps_for(T, dt, "elasticity");
}

int ElasticityConfig::n_steps() const { return steps_for(T, dt, "elasticity"); }

HierMesh elasticity_mesh(RefinePattern pattern, int levels) {
  HierMesh m = unit_box_mesh(3, 3);
  for (int l = 1; l < levels; ++l) m = refine(m, mark_geometric(m, pattern, {1.0, 1.0, 1.0}, 4));
  return m;
}

CsrMatrix assemble_elasticity_system(const FeSpace& space, double lambda, double mu, double dt) {
  if (space.n_comp() != 6) throw DimensionError("elasticity system: space needs 6 components");
  FeSpace s3(space.mesh_ptr(), 3);
  const auto mass = assemble_mass(space).consistent;
  const auto k = assemble_elasticity(s3, lambda, mu);
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(mass.nnz() * 9 + k.nnz()));
  auto rp = mass.row_ptr();
  auto ci = mass.col_idx();
  auto v = mass.values();
  for (Index i = 0; i < mass.n_rows(); ++i)
    for (Index q = rp[i]; q < rp[i + 1]; ++q)
      for (Index c = 0; c < 3; ++c) {
        t.push_back({6 * i + c, 6 * ci[q] + c, v[q] / dt});
        t.push_back({6 * i + c, 6 * ci[q] + 3 + c, -v[q]});
        t.push_back({6 * i + 3 + c, 6 * ci[q] + 3 + c, v[q] / dt});
      }
  auto krp = k.row_ptr();
  auto kci = k.col_idx();
  auto kv = k.values();
  for (Index r = 0; r < k.n_rows(); ++r)
    for (Index q = krp[r]; q < krp[r + 1]; ++q)
      t.push_back({6 * (r / 3) + 3 + r % 3, 6 * (kci[q] / 3) + kci[q] % 3, kv[q]});
  return CsrMatrix::from_triplets(space.n_dofs(), space.n_dofs(), std::move(t));
}

BlockVector elasticity_rhs(const FeSpace& space, const CsrMatrix& mass, const BlockVector& state,
                           const std::array<double, 3>& f, double dt, const Backend& backend) {
  if (state.n_comp() != 6 || state.n_nodes() != space.n_nodes())
    throw DimensionError("elasticity_rhs: state does not match the space");
  BlockVector ms(state.n_nodes(), 6);
  backend.spmv(1.0, mass, state, 0.0, ms, Layout::per_component);
  BlockVector one(space.n_nodes(), 1, 1.0), rows(space.n_nodes(), 1);
  backend.spmv(1.0, mass, one, 0.0, rows, Layout::per_component);
  BlockVector out(state.n_nodes(), 6);
  for (Index i = 0; i < out.n_nodes(); ++i)
    for (Index c = 0; c < 3; ++c) {
      out(i, c) = ms(i, c) / dt;
      out(i, 3 + c) = ms(i, 3 + c) / dt + f[c] * rows[i];
    }
  return out;
}

FeSolver make_elasticity_solver(const ElasticityConfig& cfg, const SolverSettings& solver, const Backend& backend) {
  cfg.validate();
  auto h = build_hierarchy(elasticity_mesh(cfg.pattern, cfg.levels), solver.mg.coarse_target);
  auto spaces = hierarchy_spaces(h, 6);
  for (auto& s : spaces) s.set_boundary_dirichlet([](const Point&) { return std::vector<double>(6, 0.0); });
  const double lambda = cfg.lambda_lame, mu = cfg.mu_lame, dt = cfg.dt;
  return FeSolver(std::move(spaces),
                  [=](const FeSpace& s) { return assemble_elasticity_system(s, lambda, mu, dt); },
                  SmootherKind::block_jacobi, solver, backend);
}

LinearRunResult run_elasticity(const ElasticityConfig& cfg, const SolverSettings& solver, const Backend& backend,
                               const SnapshotFn& snapshot, int snapshot_stride) {
  cfg.validate();
  LinearRunResult res;
  auto& timing = res.timing;
  const int n_steps = cfg.n_steps();
  std::optional<FeSolver> fs;
  CsrMatrix mass;
  {
    ScopedTimer st(timing, "init");
    fs.emplace(make_elasticity_solver(cfg, solver, backend));
    mass = assemble_mass(fs->space()).consistent;
  }
  const FeSpace& space = fs->space();
  res.n_nodes = space.n_nodes();
  res.n_dofs = space.n_dofs();
  res.n_levels = fs->multigrid().n_levels();

  auto fields = [](const BlockVector& x) {
    BlockVector u(x.n_nodes(), 3), v(x.n_nodes(), 3);
    for (Index i = 0; i < x.n_nodes(); ++i)
      for (Index c = 0; c < 3; ++c) u(i, c) = x(i, c), v(i, c) = x(i, 3 + c);
    return std::vector<NamedField>{{"displacement", std::move(u)}, {"velocity", std::move(v)}};
  };
  auto max_displacement = [](const BlockVector& x) {
    double m = 0.0;
    for (Index i = 0; i < x.n_nodes(); ++i)
      m = std::max(m, std::sqrt(x(i, 0) * x(i, 0) + x(i, 1) * x(i, 1) + x(i, 2) * x(i, 2)));
    return m;
  };

  BlockVector x(space.n_nodes(), 6);
  res.steps.push_back({0, 0.0, 0, 0.0, 0.0});
  if (snapshot && snapshot_due(0, n_steps, snapshot_stride)) snapshot(0, 0.0, space, fields(x));
  BlockVector rhs;
  for (int m = 1; m <= n_steps; ++m) {
    const double t = m * cfg.dt;
    {
      ScopedTimer st(timing, "rhs");
      rhs = elasticity_rhs(space, mass, x, cfg.f, cfg.dt, backend);
    }
    SolveRecord rec;
    {
      ScopedTimer st(timing, "solve");
      rec = fs->solve(rhs, space.dirichlet_values(), x);
    }
    if (!rec.converged)
      throw SolverError("elasticity: GMRES did not converge at step " + std::to_string(m), m, rec);
    res.steps.push_back({m, t, rec.iterations, rec.final_residual, max_displacement(x)});
    if (snapshot && snapshot_due(m, n_steps, snapshot_stride)) snapshot(m, t, space, fields(x));
  }
  timing.set_count("sum", n_steps);
  res.solution = std::move(x);
  return res;
}

// ---------------------------------------------------------------------------
// Navier-Stokes

void NavierStokesConfig::validate() const {
  require(re > 0.0 && std::isfinite(re), "ns.re must be positive");
  require(dt > 0.0 && std::isfinite(dt), "ns.dt must be positive");
  require(T > 0.0 && std::isfinite(T), "ns.T must be positive");
  for (Index n : cells) require(n >= 2 && n <= 512, "ns.cells entries must lie in [2, 512]");
  for (double v : lid) require(std::isfinite(v), "ns.lid must be finite");
  steps_for(T, dt, "ns");
}

int NavierStokesConfig::n_steps() const { return steps_for(T, dt, "ns"); }

NsOperators ns_assemble(const NavierStokesConfig& cfg) {
  cfg.validate();
  auto pm = std::make_shared<const HierMesh>(graded_tensor_mesh(cfg.cells[0], cfg.cells[1], cfg.cells[2]));
  auto vm = std::make_shared<const HierMesh>(uniform_refine(*pm));
  NsOperators ops{FeSpace(vm, 3), FeSpace(pm, 1), {}, {}, {}, {}, cfg.nu(), {}, {}, {}, {}};
  const auto lid = cfg.lid;
  ops.velocity.set_boundary_dirichlet([lid](const Point& x) {
    constexpr double eps = 1e-12;
    const bool on_lid = x[0] > 1.0 - eps && x[1] > eps && x[1] < 1.0 - eps && x[2] > eps && x[2] < 2.0 - eps;
    return on_lid ? std::vector<double>{lid[0], lid[1], lid[2]} : std::vector<double>{0.0, 0.0, 0.0};
  });
  auto mv = assemble_mass(ops.velocity);
  auto mp = assemble_mass(ops.pressure);
  ops.mv_lumped_inv = mv.lumped;
  ops.mp_lumped_inv = mp.lumped;
  ops.mv_lumped = mv.lumped.diagonal();
  ops.mp_lumped = mp.lumped.diagonal();
  ops.k_v = assemble_stiffness(ops.velocity, ops.nu);
  ops.k_p = assemble_stiffness(ops.pressure, 1.0);
  for (int d = 0; d < 3; ++d) {
    ops.c[d] = assemble_convection(ops.velocity, d);
    ops.g[d] = assemble_gradient_coupling(ops.velocity, ops.pressure, d);
  }
  return ops;
}

PressureSolver make_pressure_solver(const NsOperators& ops, const SolverSettings& settings, const Backend& backend) {
  PressureSolver ps;
  auto h = build_hierarchy(ops.pressure.mesh(), settings.mg.coarse_target);
  ps.spaces = hierarchy_spaces(h, 1);
  if (ps.spaces.back().n_nodes() != ops.pressure.n_nodes())
    throw DimensionError("pressure hierarchy does not end at the pressure space");
  auto levels = build_levels(ps.spaces, [](const FeSpace& s) { return assemble_stiffness(s, 1.0); },
                             SmootherKind::point_jacobi);
  ps.mg = std::make_unique<Multigrid>(std::move(levels), settings.mg, backend);
  ps.mg->set_zero_mean_weights(ops.mp_lumped);
  ps.gmres = settings.gmres;
  ps.gmres.validate();
  return ps;
}

BlockVector ns_momentum_step(const NsOperators& ops, const BlockVector& u_prev, const BlockVector& p_prev,
                             const BlockVector& q_prev, const BlockVector& f, double dt, const Backend& backend,
                             TimingReport* timing) {
  const Index nv = ops.velocity.n_nodes(), np = ops.pressure.n_nodes();
  if (u_prev.n_nodes() != nv || u_prev.n_comp() != 3) throw DimensionError("ns_momentum_step: velocity size");
  if (p_prev.size() != np || q_prev.size() != np) throw DimensionError("ns_momentum_step: pressure size");
  if (f.size() != 0 && f.size() != u_prev.size()) throw DimensionError("ns_momentum_step: forcing size");
  Scope all(timing, "momentum");
  BlockVector r(nv, 3);
  {
    Scope rhs(timing, "mom-rhs");
    {
      Scope s(timing, "mom-rhs-nonlin");
      std::array<BlockVector, 3> v;
      backend.nodewise_products(u_prev, v);
      for (int d = 0; d < 3; ++d) backend.spmv(1.0, ops.c[d], v[d], 1.0, r, Layout::per_component);
    }
    {
      Scope s(timing, "mom-rhs-p");
      BlockVector pq = p_prev;
      backend.axpy(1.0, q_prev, pq);
      BlockVector tmp(nv, 1);
      for (int c = 0; c < 3; ++c) {
        backend.spmv(1.0, ops.g[c], pq, 0.0, tmp);
        for (Index i = 0; i < nv; ++i) r(i, c) += tmp[i];
      }
    }
    {
      Scope s(timing, "mom-rhs-visc");
      backend.spmv(-1.0, ops.k_v, u_prev, 1.0, r, Layout::per_component);
      if (f.size() != 0)
        for (Index i = 0; i < nv; ++i)
          for (Index c = 0; c < 3; ++c) r(i, c) += ops.mv_lumped[i] * f(i, c);
    }
  }
  Scope s(timing, "mom-solve");
  BlockVector u = u_prev, w(nv, 3);
  backend.diag_apply_nodal(ops.mv_lumped_inv, r, w);
  backend.axpy(dt, w, u);
  const auto mask = ops.velocity.dirichlet_mask();
  const auto vals = ops.velocity.dirichlet_values();
  for (Index k = 0; k < u.size(); ++k)
    if (mask[k]) u[k] = vals[k];
  return u;
}

BlockVector ns_divergence(const NsOperators& ops, const BlockVector& u, const Backend& backend) {
  BlockVector div(ops.pressure.n_nodes(), 1);
  for (int c = 0; c < 3; ++c) backend.spmv_transpose(1.0, ops.g[c], u.component(c), 1.0, div);
  return div;
}

SolveRecord ns_pressure_step(const NsOperators& ops, const BlockVector& u_new, double dt, const PressureSolver& ps,
                             BlockVector& q, const Backend& backend, TimingReport* timing) {
  Scope all(timing, "pres");
  BlockVector rhs;
  {
    Scope s(timing, "pres-rhs");
    rhs = ns_divergence(ops, u_new, backend);
    backend.scale(-1.0 / dt, rhs);
    project_rhs_compatible(rhs, ops.mp_lumped, backend);
  }
  Scope s(timing, "pres-solve");
  if (q.size() != rhs.size()) q = BlockVector(rhs.n_nodes(), 1);
  LinearOperator apply = [&](const BlockVector& in, BlockVector& out) {
    if (out.size() != in.size()) out = BlockVector(in.n_nodes(), in.n_comp());
    backend.spmv(1.0, ops.k_p, in, 0.0, out);
  };
  LinearOperator pc = [&](const BlockVector& in, BlockVector& out) { ps.mg->precondition(in, out); };
  SolveRecord rec;
  if (backend.norm2(rhs) == 0.0) {
    q = BlockVector(rhs.n_nodes(), 1);
    rec.converged = true;
    rec.history = {0.0};
  } else {
    rec = gmres(apply, pc, rhs, q, ps.gmres, backend);
  }
  project_zero_mean(q, ops.mp_lumped, backend);
  return rec;
}

BlockVector ns_pressure_update(const NsOperators& ops, const BlockVector& p_prev, const BlockVector& q_new,
                               const BlockVector& u_new, double nu, const Backend& backend, TimingReport* timing) {
  Scope all(timing, "pres-up");
  BlockVector div;
  {
    Scope s(timing, "pres-up.rhs");
    div = ns_divergence(ops, u_new, backend);
  }
  Scope s(timing, "pres-up.solve");
  BlockVector p = p_prev, w(div.n_nodes(), 1);
  backend.axpy(1.0, q_new, p);
  if (nu != 0.0) {
    backend.diag_apply(ops.mp_lumped_inv, div, w);
    backend.axpy(-nu, w, p);
  }
  project_zero_mean(p, ops.mp_lumped, backend);
  return p;
}

BlockVector ns_corrected_velocity(const NsOperators& ops, const BlockVector& u, const BlockVector& q, double dt,
                                  const Backend& backend) {
  const Index nv = ops.velocity.n_nodes();
  BlockVector out = u, tmp(nv, 1);
  const auto mask = ops.velocity.dirichlet_mask();
  const auto inv = ops.mv_lumped_inv.inv_values();
  for (int c = 0; c < 3; ++c) {
    backend.spmv(1.0, ops.g[c], q, 0.0, tmp);
    for (Index i = 0; i < nv; ++i)
      if (!mask[i * 3 + c]) out(i, c) += dt * inv[i] * tmp[i];
  }
  return out;
}

BlockVector initial_pressure(const NsOperators& ops, const BlockVector& f0, const PressureSolver& ps,
                             const Backend& backend, bool zero_initial_velocity) {
  if (!zero_initial_velocity)
    throw UnsupportedError("initial pressure: only a zero initial velocity is supported");
  const Index np = ops.pressure.n_nodes();
  if (f0.n_nodes() != np || f0.n_comp() != 3) throw DimensionError("initial pressure: forcing size");
  BlockVector rhs(np, 1);
  for (int c = 0; c < 3; ++c) backend.spmv(-1.0, assemble_convection(ops.pressure, c), f0.component(c), 1.0, rhs);
  BlockVector p(np, 1);
  if (backend.norm2(rhs) == 0.0) return p;
  project_rhs_compatible(rhs, ops.mp_lumped, backend);
  LinearOperator apply = [&](const BlockVector& in, BlockVector& out) {
    if (out.size() != in.size()) out = BlockVector(in.n_nodes(), in.n_comp());
    backend.spmv(1.0, ops.k_p, in, 0.0, out);
  };
  LinearOperator pc = [&](const BlockVector& in, BlockVector& out) { ps.mg->precondition(in, out); };
  auto rec = gmres(apply, pc, rhs, p, ps.gmres, backend);
  if (!rec.converged) throw SolverError("initial pressure: GMRES did not converge", 0, rec);
  project_zero_mean(p, ops.mp_lumped, backend);
  return p;
}

NsRunResult run_driven_cavity(const NavierStokesConfig& cfg, const SolverSettings& solver, const Backend& backend,
                              const SnapshotFn& snapshot, int snapshot_stride) {
  cfg.validate();
  NsRunResult res;
  const NsOperators ops = ns_assemble(cfg);
  const PressureSolver ps = make_pressure_solver(ops, solver, backend);
  const Index nv = ops.velocity.n_nodes(), np = ops.pressure.n_nodes();
  res.n_velocity_nodes = nv;
  res.n_pressure_nodes = np;
  const int n_steps = cfg.n_steps();
  const double nu = cfg.nu();
  const double volume = 2.0;
  const double lid2 = cfg.lid[0] * cfg.lid[0] + cfg.lid[1] * cfg.lid[1] + cfg.lid[2] * cfg.lid[2];
  const double energy_bound = 100.0 * volume * (lid2 + 1.0);
  const CsrMatrix p_to_v = build_prolongation(ops.pressure, ops.velocity).prolongation;

  BlockVector u(nv, 3), q(np, 1);
  BlockVector p = initial_pressure(ops, BlockVector(np, 3), ps, backend);
  const BlockVector no_force;

  auto kinetic_energy = [&](const BlockVector& x) {
    double e = 0.0;
    for (Index i = 0; i < nv; ++i)
      e += ops.mv_lumped[i] * (x(i, 0) * x(i, 0) + x(i, 1) * x(i, 1) + x(i, 2) * x(i, 2));
    return 0.5 * e;
  };
  auto mean = [&](const BlockVector& x) {
    double s = 0.0, w = 0.0;
    for (Index i = 0; i < np; ++i) s += ops.mp_lumped[i] * x[i], w += ops.mp_lumped[i];
    return s / w;
  };
  auto emit = [&](int step, double t) {
    BlockVector pv(nv, 1);
    backend.spmv(1.0, p_to_v, p, 0.0, pv);
    snapshot(step, t, ops.velocity, {{"velocity", u}, {"pressure", pv}});
  };
  if (snapshot && snapshot_due(0, n_steps, snapshot_stride)) emit(0, 0.0);

  std::array<BlockVector, 3> v;
  for (int m = 1; m <= n_steps; ++m) {
    const double t = m * cfg.dt;
    NsDiagnostics d;
    d.step = m;
    d.time = t;
    backend.nodewise_products(u, v);
    for (Index i = 0; i < nv; ++i)
      for (int a = 0; a < 3; ++a)
        for (int c = 0; c < 3; ++c)
          d.nodal_identity_error = std::max(d.nodal_identity_error, std::abs(v[a](i, c) - u(i, a) * u(i, c)));

    BlockVector u_new = ns_momentum_step(ops, u, p, q, no_force, cfg.dt, backend, &res.timing);
    d.divergence = backend.norm2(ns_divergence(ops, u_new, backend));
    auto rec = ns_pressure_step(ops, u_new, cfg.dt, ps, q, backend, &res.timing);
    d.gmres_iterations = rec.iterations;
    if (!rec.converged)
      throw SolverError("driven cavity: pressure GMRES did not converge at step " + std::to_string(m), m, rec);
    d.corrected_divergence = backend.norm2(ns_divergence(ops, ns_corrected_velocity(ops, u_new, q, cfg.dt, backend), backend));
    p = ns_pressure_update(ops, p, q, u_new, nu, backend, &res.timing);
    u = std::move(u_new);
    d.kinetic_energy = kinetic_energy(u);
    d.pressure_mean = mean(p);
    if (!u.all_finite() || !p.all_finite() || !std::isfinite(d.kinetic_energy) || d.kinetic_energy > energy_bound) {
      throw SolverError("driven cavity: solution diverged at step " + std::to_string(m) +
                            " (kinetic energy " + std::to_string(d.kinetic_energy) + ")",
                        m, rec);
    }
    res.diagnostics.push_back(d);
    if (snapshot && snapshot_due(m, n_steps, snapshot_stride)) emit(m, t);
  }
  res.timing.set_count("sum", n_steps);
  res.velocity = std::move(u);
  res.pressure = std::move(p);
  return res;
}

}  // namespace mgfem
