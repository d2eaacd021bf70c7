#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "mgfem/backend.hpp"
#include "mgfem/linalg.hpp"
#include "mgfem/mesh.hpp"

namespace mgfem {

/// Tensor-product rule on the reference cell [0,1]^dim.
struct QuadratureRule {
  int dim = 0;
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;

  /// Two Gauss points per direction; exact for polynomials of degree 3 per variable.
  static QuadratureRule gauss2(int dim);
};

/// Degree-1 nodal space with n_comp components per node on the active mesh.
///
/// Nodes are numbered locally in increasing global-id order. Hanging nodes are
/// part of the numbering; their values are reconstructed with the hanging
/// matrix. Dirichlet data is held per flattened (node, comp) index.
class FeSpace {
 public:
  FeSpace(std::shared_ptr<const HierMesh> mesh, Index n_comp);

  const HierMesh& mesh() const { return *mesh_; }
  std::shared_ptr<const HierMesh> mesh_ptr() const { return mesh_; }
  int dim() const { return mesh_->dim(); }
  Index n_comp() const { return n_comp_; }
  Index n_nodes() const { return static_cast<Index>(nodes_.size()); }
  Index n_dofs() const { return n_nodes() * n_comp_; }

  std::span<const NodeId> global_nodes() const { return nodes_; }
  /// Local index of a mesh node, or -1 if the node is not part of this space.
  Index local_index(NodeId global) const;
  const Point& node_coord(Index local) const { return mesh_->coord(nodes_[local]); }

  std::span<const ElementId> elements() const { return elements_; }
  /// Local node ids of the k-th active element (lexicographic corners).
  std::span<const Index> element_nodes(Index k) const;

  const std::vector<HangingConstraint>& hanging() const { return hanging_; }
  bool is_hanging(Index local) const { return hanging_flag_[local] != 0; }
  /// Nodes on the boundary of the root box.
  bool on_boundary(Index local) const;

  /// Throws if the node is hanging.
  void set_dirichlet(Index local, Index comp, double value);
  /// Calls `values(point)` for every regular boundary node; a returned vector
  /// of size n_comp constrains all components of that node.
  void set_boundary_dirichlet(const std::function<std::vector<double>(const Point&)>& values);
  void clear_dirichlet();
  std::span<const char> dirichlet_mask() const { return dirichlet_mask_; }
  std::span<const double> dirichlet_values() const { return dirichlet_values_; }
  Index n_dirichlet() const;

 private:
  std::shared_ptr<const HierMesh> mesh_;
  Index n_comp_ = 1;
  std::vector<NodeId> nodes_;
  std::vector<Index> global_to_local_;
  std::vector<ElementId> elements_;
  std::vector<Index> element_nodes_;
  std::vector<HangingConstraint> hanging_;  // in local ids
  std::vector<char> hanging_flag_;
  std::vector<char> dirichlet_mask_;
  std::vector<double> dirichlet_values_;
};

/// Basis values, physical gradients and Jacobian determinant at one point of one element.
struct ElementGeometry {
  int n_corners = 0;
  std::array<double, 8> shape{};
  std::array<std::array<double, 3>, 8> grad{};
  double det_j = 0.0;
  Point x{};
};

/// Evaluates the Q1 basis of element k of `space` at reference point xi.
/// Throws NumericalError naming the element when det J <= 0.
ElementGeometry evaluate_element(const FeSpace& space, Index k, const std::array<double, 3>& xi);

/// Q1 basis values of the reference cell at xi.
std::array<double, 8> reference_shape(int dim, const std::array<double, 3>& xi);

struct MassMatrices {
  CsrMatrix consistent;
  DiagOperator lumped;  // row sums, stored inverted
};

/// Scalar mass matrix (per node) with its lumped counterpart.
MassMatrices assemble_mass(const FeSpace& space);
/// coeff * (grad phi_j, grad phi_i), scalar.
CsrMatrix assemble_stiffness(const FeSpace& space, double coeff);
/// ((b . grad phi_j), phi_i), scalar.
CsrMatrix assemble_advection(const FeSpace& space, const std::array<double, 3>& b);
/// (sigma(phi_j e_d), eps(phi_i e_c)) over the flattened (node, comp) index; n_comp must be 3.
CsrMatrix assemble_elasticity(const FeSpace& space, double lambda, double mu);
/// C_d[i][j] = (phi_j, d/dx_d phi_i), scalar.
CsrMatrix assemble_convection(const FeSpace& space, int direction);
/// G_c[i][j] = (psi_j, d/dx_c phi_i) with phi on the velocity mesh (a uniform
/// refinement of the pressure mesh) and psi on the pressure mesh.
CsrMatrix assemble_gradient_coupling(const FeSpace& velocity, const FeSpace& pressure,
                                     int direction);
/// Local index in `fine` of every node of `coarse` (both spaces on one tree).
std::vector<Index> node_injection(const FeSpace& coarse, const FeSpace& fine);

/// Prolongation P (N_fine x N_coarse) and restriction R = P^T.
struct TransferPair {
  CsrMatrix prolongation;
  CsrMatrix restriction;
};

/// One space per hierarchy level, coarse first.
std::vector<FeSpace> hierarchy_spaces(const MeshHierarchy& h, Index n_comp);

/// Finite element embedding of the coarse conforming space: coarse Q1 basis
/// values at fine nodes, with coarse hanging nodes expressed by their masters.
TransferPair build_prolongation(const FeSpace& coarse, const FeSpace& fine);

/// Identity on regular nodes; master weights on hanging rows.
CsrMatrix build_hanging_matrix(const FeSpace& space);

/// H^T A H with hanging rows/columns replaced by identity. Symmetric input
/// gives a bit-exact symmetric result.
CsrMatrix constrain_system(const CsrMatrix& a, const CsrMatrix& h);
/// H^T b with hanging entries set to zero (flat layout, H already expanded).
BlockVector constrain_rhs(const BlockVector& b, const CsrMatrix& h, std::span<const char> hanging_flat,
                          const Backend& backend);
/// Hanging flags expanded to the flattened index.
std::vector<char> hanging_mask_flat(const FeSpace& space);

/// Symmetric elimination of Dirichlet dofs.
struct DirichletSystem {
  CsrMatrix matrix;   ///< constrained rows and columns replaced by identity
  CsrMatrix lifting;  ///< original A[free, constrained] entries
};
DirichletSystem eliminate_dirichlet(const CsrMatrix& a, std::span<const char> mask);
/// b_free -= lifting * g, b_constrained = g.
void lift_dirichlet_rhs(const DirichletSystem& sys, std::span<const char> mask,
                        std::span<const double> values, BlockVector& b, const Backend& backend);
/// One-shot elimination using the space's Dirichlet data.
std::pair<CsrMatrix, BlockVector> apply_dirichlet(const CsrMatrix& a, const BlockVector& b,
                                                  const FeSpace& space);

using ExactFunction = std::function<std::vector<double>(double t, const Point& x)>;

/// Nodal interpolant of f(t, x) on every node of the space.
BlockVector interpolate(const FeSpace& space, const ExactFunction& f, double t);
/// L2 norm of u_h - exact with the space's quadrature. u_h holds values at all nodes.
double l2_error(const FeSpace& space, const BlockVector& u_h, const ExactFunction& exact, double t);

}  // namespace mgfem
