#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "mgfem/backend.hpp"
#include "mgfem/fem.hpp"
#include "mgfem/linalg.hpp"

namespace mgfem {

struct MgConfig {
  int nu_pre = 2;
  int nu_post = 2;
  double omega = 0.8;
  int coarse_sweeps = 20;
  int max_cycles = 100;
  double rel_tol = 1e-8;
  Index coarse_target = 64;
  /// Replace coarse smoothing by a dense direct solve (used by tests).
  bool exact_coarse = false;

  /// Throws Error naming the offending field.
  void validate() const;
  friend bool operator==(const MgConfig&, const MgConfig&) = default;
};

struct GmresConfig {
  int max_krylov = 50;
  double rel_tol = 1e-8;
  double abs_tol = 0.0;

  void validate() const;
  friend bool operator==(const GmresConfig&, const GmresConfig&) = default;
};

enum class SmootherKind { point_jacobi, block_jacobi };

/// One level of the multigrid hierarchy. All matrices act on the flattened
/// (node, comp) index.
/// Upper end of the Jacobi-preconditioned spectrum of uniform Q1 Laplacians.
inline constexpr double kReferenceSpectrum = 1.5;

struct MgLevel {
  Index n_nodes = 0;
  Index n_comp = 1;
  CsrMatrix a;         ///< constrained, Dirichlet-applied operator
  CsrMatrix smoother;  ///< S in x <- x + omega S (b - A x)
  /// Estimated largest |eigenvalue| of D^{-1} A (point or block D).
  double spectral_radius = 0.0;
  CsrMatrix prolongation;  ///< from the next coarser level; empty on level 0
  CsrMatrix restriction;   ///< csr_transpose(prolongation)
  CsrMatrix hanging;       ///< H expanded to n_comp
  CsrMatrix lifting;       ///< A[free, Dirichlet] entries removed by the elimination

  /// Builds the smoother from A. Throws NumericalError on a singular diagonal (block).
  /// S = D^{-1} scaled by min(1, kReferenceSpectrum / rho(D^{-1} A)), so omega keeps
  /// its meaning on anisotropic levels where the Jacobi spectrum extends further.
  static MgLevel make(CsrMatrix a, Index n_nodes, Index n_comp, SmootherKind kind);
};

/// Power-iteration estimate of the spectral radius of S A (deterministic start vector).
double estimate_spectral_radius(const CsrMatrix& s, const CsrMatrix& a, int iterations = 40);

/// A matrix as a (diagonal or block diagonal) smoother.
CsrMatrix jacobi_matrix(const CsrMatrix& a, Index n_comp, SmootherKind kind);

/// Operators for every level of a hierarchy of spaces (coarse first).
/// `assemble` returns the unconstrained operator of a space over the
/// flattened index; hanging constraints and the space's Dirichlet data are
/// applied here. The transfer from level l-1 ignores fine hanging and
/// Dirichlet rows and coarse Dirichlet columns.
std::vector<MgLevel> build_levels(const std::vector<FeSpace>& spaces,
                                  const std::function<CsrMatrix(const FeSpace&)>& assemble,
                                  SmootherKind kind);

/// Iteration history of a solver run.
struct SolveRecord {
  bool converged = false;
  int iterations = 0;
  double initial_residual = 0.0;
  double final_residual = 0.0;
  std::vector<double> history;  ///< residual norm after each iteration, history[0] initial
};
/// CSV with header iteration,residual.
void write_convergence_csv(const SolveRecord& rec, std::ostream& os);

/// steps applications of x <- x + omega S (b - A x).
void jacobi_smooth(const MgLevel& level, const BlockVector& b, BlockVector& x, double omega,
                   int steps, const Backend& backend);

/// Weighted mean removal used for pure Neumann problems.
void project_zero_mean(BlockVector& x, std::span<const double> weights, const Backend& backend);
/// Makes a right-hand side consistent with a singular Neumann operator:
/// b <- b - (sum b / sum w) w, so that sum b = 0.
void project_rhs_compatible(BlockVector& b, std::span<const double> weights, const Backend& backend);

class Multigrid {
 public:
  Multigrid(std::vector<MgLevel> levels, MgConfig config, const Backend& backend);

  Index n_levels() const { return static_cast<Index>(levels_.size()); }
  const MgLevel& level(Index l) const { return levels_[l]; }
  const MgLevel& finest() const { return levels_.back(); }
  const MgConfig& config() const { return config_; }

  /// Projects iterates onto zero weighted mean after every cycle (singular systems).
  void set_zero_mean_weights(std::vector<double> weights) { weights_ = std::move(weights); }

  /// One V-cycle on level l.
  void v_cycle(Index l, BlockVector& x, const BlockVector& b) const;
  /// z = V-cycle(0 initial guess, r) on the finest level, mean-projected if configured.
  void precondition(const BlockVector& r, BlockVector& z) const;
  /// Repeated V-cycles until ||b - A x|| <= rel_tol ||b|| or max_cycles.
  SolveRecord solve(const BlockVector& b, BlockVector& x) const;

 private:
  std::vector<MgLevel> levels_;
  MgConfig config_;
  const Backend& backend_;
  std::vector<double> weights_;
  std::optional<DenseMatrix> coarse_dense_;
};

using LinearOperator = std::function<void(const BlockVector& in, BlockVector& out)>;

/// Right-preconditioned GMRES with modified Gram-Schmidt and Givens
/// rotations, no restarts. Convergence: ||b - A x|| <= max(rel_tol ||b||, abs_tol).
SolveRecord gmres(const LinearOperator& apply_a, const LinearOperator& precond, const BlockVector& b,
                  BlockVector& x, const GmresConfig& config, const Backend& backend);

}  // namespace mgfem
