#include "mgfem/solve.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>

#include "mgfem/error.hpp"

namespace mgfem {

void MgConfig::validate() const {
  if (nu_pre < 1) throw Error("mg.nu_pre must be >= 1");
  if (nu_post < 1) throw Error("mg.nu_post must be >= 1");
  if (coarse_sweeps < 1) throw Error("mg.coarse_sweeps must be >= 1");
  if (max_cycles < 1) throw Error("mg.max_cycles must be >= 1");
  if (!(omega > 0.0 && omega <= 1.0)) throw Error("mg.omega must lie in (0, 1]");
  if (!(rel_tol > 0.0)) throw Error("mg.rel_tol must be positive");
  if (coarse_target < 1) throw Error("mg.coarse_target must be >= 1");
}

void GmresConfig::validate() const {
  if (max_krylov < 1) throw Error("gmres.max_krylov must be >= 1");
  if (!(rel_tol >= 0.0)) throw Error("gmres.rel_tol must be non-negative");
  if (!(abs_tol >= 0.0)) throw Error("gmres.abs_tol must be non-negative");
  if (rel_tol == 0.0 && abs_tol == 0.0) throw Error("gmres: rel_tol and abs_tol cannot both be zero");
}

CsrMatrix jacobi_matrix(const CsrMatrix& a, Index n_comp, SmootherKind kind) {
  const Index n = a.n_rows();
  std::vector<Triplet> t;
  if (kind == SmootherKind::point_jacobi || n_comp == 1) {
    auto d = a.diagonal();
    for (Index i = 0; i < n; ++i) {
      if (d[i] == 0.0) throw NumericalError("smoother: zero diagonal in row " + std::to_string(i));
      t.push_back({i, i, 1.0 / d[i]});
    }
    return CsrMatrix::from_triplets(n, n, std::move(t));
  }
  if (n % n_comp != 0) throw DimensionError("smoother: size is not a multiple of n_comp");
  DenseMatrix block(n_comp);
  for (Index node = 0; node < n / n_comp; ++node) {
    for (Index c = 0; c < n_comp; ++c)
      for (Index d = 0; d < n_comp; ++d) block(c, d) = a.at(node * n_comp + c, node * n_comp + d);
    DenseMatrix inv;
    try {
      inv = dense_inverse(block);
    } catch (const NumericalError&) {
      throw NumericalError("smoother: singular diagonal block at node " + std::to_string(node));
    }
    for (Index c = 0; c < n_comp; ++c)
      for (Index d = 0; d < n_comp; ++d)
        if (inv(c, d) != 0.0) t.push_back({node * n_comp + c, node * n_comp + d, inv(c, d)});
  }
  return CsrMatrix::from_triplets(n, n, std::move(t));
}

double estimate_spectral_radius(const CsrMatrix& s, const CsrMatrix& a, int iterations) {
  const Index n = a.n_rows();
  if (n == 0) return 0.0;
  ReferenceBackend be;
  BlockVector x(n, 1), y(n, 1), z(n, 1);
  // Fixed pseudo-random start so the estimate is reproducible.
  std::uint64_t state = 0x9e3779b97f4a7c15ULL;
  for (Index k = 0; k < n; ++k) {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    x[k] = static_cast<double>(state >> 11) / 9007199254740992.0 - 0.5;
  }
  be.scale(1.0 / be.norm2(x), x);
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    be.spmv(1.0, a, x, 0.0, y);
    be.spmv(1.0, s, y, 0.0, z);
    const double nz = be.norm2(z);
    if (nz == 0.0) return 0.0;
    lambda = nz;
    be.scale(1.0 / nz, z);
    std::swap(x, z);
  }
  return lambda;
}

MgLevel MgLevel::make(CsrMatrix a, Index n_nodes, Index n_comp, SmootherKind kind) {
  if (a.n_rows() != a.n_cols() || a.n_rows() != n_nodes * n_comp)
    throw DimensionError("MgLevel: operator size does not match n_nodes * n_comp");
  MgLevel lv;
  lv.n_nodes = n_nodes;
  lv.n_comp = n_comp;
  lv.smoother = jacobi_matrix(a, n_comp, kind);
  // Power iteration approaches rho from below; pad it a little.
  lv.spectral_radius = 1.05 * estimate_spectral_radius(lv.smoother, a);
  if (lv.spectral_radius > kReferenceSpectrum) {
    const double f = kReferenceSpectrum / lv.spectral_radius;
    for (double& v : lv.smoother.values_mut()) v *= f;
  }
  lv.a = std::move(a);
  lv.hanging = CsrMatrix::identity(n_nodes * n_comp);
  return lv;
}

std::vector<MgLevel> build_levels(const std::vector<FeSpace>& spaces,
                                  const std::function<CsrMatrix(const FeSpace&)>& assemble,
                                  SmootherKind kind) {
  std::vector<MgLevel> levels;
  for (std::size_t l = 0; l < spaces.size(); ++l) {
    const FeSpace& s = spaces[l];
    const Index nc = s.n_comp();
    CsrMatrix a = assemble(s);
    CsrMatrix h = expand_components(build_hanging_matrix(s), nc);
    if (!s.hanging().empty()) a = constrain_system(a, h);
    auto sys = eliminate_dirichlet(a, s.dirichlet_mask());
    MgLevel lv = MgLevel::make(std::move(sys.matrix), s.n_nodes(), nc, kind);
    lv.hanging = std::move(h);
    lv.lifting = std::move(sys.lifting);
    if (l > 0) {
      const FeSpace& c = spaces[l - 1];
      const auto p = expand_components(build_prolongation(c, s).prolongation, nc);
      const auto fine_hang = hanging_mask_flat(s);
      const auto fine_dir = s.dirichlet_mask();
      const auto coarse_dir = c.dirichlet_mask();
      std::vector<Triplet> t;
      auto rp = p.row_ptr();
      auto ci = p.col_idx();
      auto v = p.values();
      for (Index i = 0; i < p.n_rows(); ++i) {
        if (fine_hang[i] || fine_dir[i]) continue;
        for (Index k = rp[i]; k < rp[i + 1]; ++k)
          if (!coarse_dir[ci[k]]) t.push_back({i, ci[k], v[k]});
      }
      lv.prolongation = CsrMatrix::from_triplets(p.n_rows(), p.n_cols(), std::move(t));
      lv.restriction = csr_transpose(lv.prolongation);
    }
    levels.push_back(std::move(lv));
  }
  return levels;
}

void write_convergence_csv(const SolveRecord& rec, std::ostream& os) {
  os << "iteration,residual\n";
  char buf[64];
  for (std::size_t k = 0; k < rec.history.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", k, rec.history[k]);
    os << buf;
  }
}

void jacobi_smooth(const MgLevel& level, const BlockVector& b, BlockVector& x, double omega, int steps,
                   const Backend& backend) {
  BlockVector r(b.n_nodes(), b.n_comp());
  for (int s = 0; s < steps; ++s) {
    backend.copy(b, r);
    backend.spmv(-1.0, level.a, x, 1.0, r);
    backend.spmv(omega, level.smoother, r, 1.0, x);
  }
}

void project_zero_mean(BlockVector& x, std::span<const double> weights, const Backend& backend) {
  if (static_cast<Index>(weights.size()) != x.size()) throw DimensionError("project_zero_mean: size mismatch");
  BlockVector w(x.n_nodes(), x.n_comp(), std::vector<double>(weights.begin(), weights.end()));
  BlockVector one(x.n_nodes(), x.n_comp(), 1.0);
  const double mean = backend.dot(w, x) / backend.dot(w, one);
  backend.axpy(-mean, one, x);
}

void project_rhs_compatible(BlockVector& b, std::span<const double> weights, const Backend& backend) {
  if (static_cast<Index>(weights.size()) != b.size()) throw DimensionError("project_rhs_compatible: size mismatch");
  BlockVector w(b.n_nodes(), b.n_comp(), std::vector<double>(weights.begin(), weights.end()));
  BlockVector one(b.n_nodes(), b.n_comp(), 1.0);
  const double f = backend.dot(one, b) / backend.dot(one, w);
  backend.axpy(-f, w, b);
}

Multigrid::Multigrid(std::vector<MgLevel> levels, MgConfig config, const Backend& backend)
    : levels_(std::move(levels)), config_(config), backend_(backend) {
  config_.validate();
  if (levels_.empty()) throw DimensionError("Multigrid: no levels");
  for (std::size_t l = 1; l < levels_.size(); ++l) {
    const auto& p = levels_[l].prolongation;
    if (p.n_rows() != levels_[l].a.n_rows() || p.n_cols() != levels_[l - 1].a.n_rows())
      throw DimensionError("Multigrid: transfer of level " + std::to_string(l) + " does not match");
  }
  if (config_.exact_coarse) coarse_dense_ = DenseMatrix::from_csr(levels_.front().a);
}

void Multigrid::v_cycle(Index l, BlockVector& x, const BlockVector& b) const {
  const MgLevel& lv = levels_[l];
  if (l == 0) {
    if (coarse_dense_) {
      auto sol = dense_lu_solve(*coarse_dense_, std::vector<double>(b.data().begin(), b.data().end()));
      x = BlockVector(b.n_nodes(), b.n_comp(), std::move(sol));
    } else {
      jacobi_smooth(lv, b, x, config_.omega, config_.coarse_sweeps, backend_);
    }
    return;
  }
  jacobi_smooth(lv, b, x, config_.omega, config_.nu_pre, backend_);
  BlockVector r(b.n_nodes(), b.n_comp());
  backend_.copy(b, r);
  backend_.spmv(-1.0, lv.a, x, 1.0, r);
  const MgLevel& coarse = levels_[l - 1];
  BlockVector d(coarse.n_nodes, coarse.n_comp);
  backend_.spmv(1.0, lv.restriction, r, 0.0, d);
  BlockVector y(coarse.n_nodes, coarse.n_comp);
  v_cycle(l - 1, y, d);
  backend_.spmv(1.0, lv.prolongation, y, 1.0, x);
  jacobi_smooth(lv, b, x, config_.omega, config_.nu_post, backend_);
}

void Multigrid::precondition(const BlockVector& r, BlockVector& z) const {
  z = BlockVector(r.n_nodes(), r.n_comp());
  v_cycle(n_levels() - 1, z, r);
  if (!weights_.empty()) project_zero_mean(z, weights_, backend_);
}

SolveRecord Multigrid::solve(const BlockVector& b, BlockVector& x) const {
  const MgLevel& top = finest();
  SolveRecord rec;
  const double bnorm = backend_.norm2(b);
  if (bnorm == 0.0) {
    x = BlockVector(b.n_nodes(), b.n_comp());
    rec.converged = true;
    rec.history = {0.0};
    return rec;
  }
  BlockVector r(b.n_nodes(), b.n_comp());
  auto residual = [&] {
    backend_.copy(b, r);
    backend_.spmv(-1.0, top.a, x, 1.0, r);
    return backend_.norm2(r);
  };
  rec.initial_residual = rec.final_residual = residual();
  rec.history.push_back(rec.initial_residual);
  while (rec.final_residual > config_.rel_tol * bnorm && rec.iterations < config_.max_cycles) {
    v_cycle(n_levels() - 1, x, b);
    if (!weights_.empty()) project_zero_mean(x, weights_, backend_);
    ++rec.iterations;
    rec.final_residual = residual();
    rec.history.push_back(rec.final_residual);
    if (!std::isfinite(rec.final_residual)) break;
  }
  rec.converged = rec.final_residual <= config_.rel_tol * bnorm;
  return rec;
}

SolveRecord gmres(const LinearOperator& apply_a, const LinearOperator& precond, const BlockVector& b,
                  BlockVector& x, const GmresConfig& config, const Backend& backend) {
  config.validate();
  if (x.size() != b.size()) x = BlockVector(b.n_nodes(), b.n_comp());
  const Index nn = b.n_nodes(), nc = b.n_comp();
  SolveRecord rec;
  const double target = std::max(config.rel_tol * backend.norm2(b), config.abs_tol);

  BlockVector r(nn, nc);
  apply_a(x, r);
  backend.scale(-1.0, r);
  backend.axpy(1.0, b, r);
  const double beta = backend.norm2(r);
  rec.initial_residual = rec.final_residual = beta;
  rec.history.push_back(beta);
  if (beta <= target) {
    rec.converged = true;
    return rec;
  }

  const int m = config.max_krylov;
  std::vector<BlockVector> v, z;
  v.reserve(m + 1);
  z.reserve(m);
  v.push_back(r);
  backend.scale(1.0 / beta, v[0]);
  std::vector<std::vector<double>> h(m + 1, std::vector<double>(m, 0.0));
  std::vector<double> cs(m, 0.0), sn(m, 0.0), g(m + 1, 0.0);
  g[0] = beta;
  int k = 0;
  BlockVector w(nn, nc);
  while (k < m) {
    z.emplace_back(nn, nc);
    precond(v[k], z[k]);
    apply_a(z[k], w);
    for (int i = 0; i <= k; ++i) {
      h[i][k] = backend.dot(w, v[i]);
      backend.axpy(-h[i][k], v[i], w);
    }
    h[k + 1][k] = backend.norm2(w);
    const double hnext = h[k + 1][k];
    for (int i = 0; i < k; ++i) {
      const double t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
      h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
      h[i][k] = t;
    }
    const double denom = std::hypot(h[k][k], h[k + 1][k]);
    if (denom == 0.0) break;
    cs[k] = h[k][k] / denom;
    sn[k] = h[k + 1][k] / denom;
    h[k][k] = denom;
    h[k + 1][k] = 0.0;
    g[k + 1] = -sn[k] * g[k];
    g[k] = cs[k] * g[k];
    ++k;
    rec.final_residual = std::abs(g[k]);
    rec.history.push_back(rec.final_residual);
    if (!std::isfinite(rec.final_residual)) break;
    if (rec.final_residual <= target) break;
    // Happy breakdown: the Krylov space is invariant.
    if (hnext <= 1e-14 * denom) break;
    v.push_back(w);
    backend.scale(1.0 / hnext, v[k]);
  }
  std::vector<double> y(k, 0.0);
  for (int i = k - 1; i >= 0; --i) {
    double s = g[i];
    for (int j = i + 1; j < k; ++j) s -= h[i][j] * y[j];
    y[i] = s / h[i][i];
  }
  for (int i = 0; i < k; ++i) backend.axpy(y[i], z[i], x);
  rec.iterations = k;
  // True residual.
  apply_a(x, r);
  backend.scale(-1.0, r);
  backend.axpy(1.0, b, r);
  rec.final_residual = backend.norm2(r);
  rec.converged = rec.final_residual <= target * (1.0 + 1e-6) || rec.history.back() <= target;
  return rec;
}

}  // namespace mgfem
