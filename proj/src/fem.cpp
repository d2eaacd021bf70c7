#include "mgfem/fem.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace mgfem {
namespace {

std::array<Index, 3> corner_offset(int c) { return {c & 1, (c >> 1) & 1, (c >> 2) & 1}; }

// Scalar element matrix callback: (geometry, weight * detJ, local matrix).
template <class Kernel>
CsrMatrix assemble_scalar(const FeSpace& space, Kernel&& kernel) {
  const auto rule = QuadratureRule::gauss2(space.dim());
  const int nc = space.mesh().n_corners();
  std::vector<Triplet> trips;
  trips.reserve(space.elements().size() * nc * nc);
  std::array<std::array<double, 8>, 8> loc{};
  for (Index k = 0; k < static_cast<Index>(space.elements().size()); ++k) {
    for (auto& row : loc) row.fill(0.0);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto g = evaluate_element(space, k, rule.points[q]);
      kernel(g, rule.weights[q] * g.det_j, loc);
    }
    auto nodes = space.element_nodes(k);
    for (int i = 0; i < nc; ++i)
      for (int j = 0; j < nc; ++j) trips.push_back({nodes[i], nodes[j], loc[i][j]});
  }
  return CsrMatrix::from_triplets(space.n_nodes(), space.n_nodes(), std::move(trips));
}

double dot3(const std::array<double, 3>& a, const std::array<double, 3>& b, int dim) {
  double s = 0.0;
  for (int d = 0; d < dim; ++d) s += a[d] * b[d];
  return s;
}

}  // namespace

QuadratureRule QuadratureRule::gauss2(int dim) {
  const double g = 0.5 / std::sqrt(3.0);
  const std::array<double, 2> pts{0.5 - g, 0.5 + g};
  QuadratureRule r;
  r.dim = dim;
  const int n = 1 << dim;
  for (int q = 0; q < n; ++q) {
    auto o = corner_offset(q);
    r.points.push_back({pts[o[0]], pts[o[1]], dim == 3 ? pts[o[2]] : 0.0});
    r.weights.push_back(1.0 / static_cast<double>(n));
  }
  return r;
}

FeSpace::FeSpace(std::shared_ptr<const HierMesh> mesh, Index n_comp)
    : mesh_(std::move(mesh)), n_comp_(n_comp) {
  if (n_comp_ < 1) throw DimensionError("FeSpace: n_comp must be >= 1");
  nodes_ = mesh_->active_nodes();
  global_to_local_.assign(mesh_->n_nodes_total(), -1);
  for (std::size_t i = 0; i < nodes_.size(); ++i) global_to_local_[nodes_[i]] = static_cast<Index>(i);
  elements_ = mesh_->active_elements();
  const int nc = mesh_->n_corners();
  element_nodes_.reserve(elements_.size() * nc);
  for (ElementId e : elements_)
    for (int c = 0; c < nc; ++c) element_nodes_.push_back(global_to_local_[mesh_->element(e).nodes[c]]);
  hanging_flag_.assign(nodes_.size(), 0);
  for (auto hc : hanging_constraints(*mesh_)) {
    hc.hanging = global_to_local_[hc.hanging];
    for (auto& m : hc.masters) m = global_to_local_[m];
    hanging_flag_[hc.hanging] = 1;
    hanging_.push_back(std::move(hc));
  }
  dirichlet_mask_.assign(n_dofs(), 0);
  dirichlet_values_.assign(n_dofs(), 0.0);
}

Index FeSpace::local_index(NodeId global) const {
  if (global < 0 || global >= static_cast<Index>(global_to_local_.size())) return -1;
  return global_to_local_[global];
}

std::span<const Index> FeSpace::element_nodes(Index k) const {
  const int nc = mesh_->n_corners();
  return std::span<const Index>(element_nodes_).subspan(k * nc, nc);
}

bool FeSpace::on_boundary(Index local) const {
  const auto& key = mesh_->node_key(nodes_[local]);
  const Index s = HierMesh::lattice_size(0);
  for (int a = 0; a < dim(); ++a)
    if (key[a] == 0 || key[a] == mesh_->root_dims()[a] * s) return true;
  return false;
}

void FeSpace::set_dirichlet(Index local, Index comp, double value) {
  if (is_hanging(local)) throw Error("FeSpace::set_dirichlet: node " + std::to_string(local) + " is hanging");
  dirichlet_mask_[local * n_comp_ + comp] = 1;
  dirichlet_values_[local * n_comp_ + comp] = value;
}

void FeSpace::set_boundary_dirichlet(const std::function<std::vector<double>(const Point&)>& values) {
  for (Index i = 0; i < n_nodes(); ++i) {
    if (!on_boundary(i) || is_hanging(i)) continue;
    auto v = values(node_coord(i));
    if (static_cast<Index>(v.size()) != n_comp_)
      throw DimensionError("FeSpace::set_boundary_dirichlet: wrong number of values");
    for (Index c = 0; c < n_comp_; ++c) set_dirichlet(i, c, v[c]);
  }
}

void FeSpace::clear_dirichlet() {
  std::fill(dirichlet_mask_.begin(), dirichlet_mask_.end(), 0);
  std::fill(dirichlet_values_.begin(), dirichlet_values_.end(), 0.0);
}

Index FeSpace::n_dirichlet() const {
  return std::count(dirichlet_mask_.begin(), dirichlet_mask_.end(), 1);
}

std::array<double, 8> reference_shape(int dim, const std::array<double, 3>& xi) {
  std::array<double, 8> n{};
  for (int c = 0; c < (1 << dim); ++c) {
    auto o = corner_offset(c);
    double w = 1.0;
    for (int a = 0; a < dim; ++a) w *= o[a] ? xi[a] : 1.0 - xi[a];
    n[c] = w;
  }
  return n;
}

ElementGeometry evaluate_element(const FeSpace& space, Index k, const std::array<double, 3>& xi) {
  const int dim = space.dim();
  ElementGeometry g;
  g.n_corners = 1 << dim;
  std::array<std::array<double, 3>, 8> dref{};
  for (int c = 0; c < g.n_corners; ++c) {
    auto o = corner_offset(c);
    double w = 1.0;
    for (int a = 0; a < dim; ++a) w *= o[a] ? xi[a] : 1.0 - xi[a];
    g.shape[c] = w;
    for (int b = 0; b < dim; ++b) {
      double d = o[b] ? 1.0 : -1.0;
      for (int a = 0; a < dim; ++a)
        if (a != b) d *= o[a] ? xi[a] : 1.0 - xi[a];
      dref[c][b] = d;
    }
  }
  auto nodes = space.element_nodes(k);
  double j[3][3] = {};
  for (int c = 0; c < g.n_corners; ++c) {
    const Point& x = space.node_coord(nodes[c]);
    for (int a = 0; a < 3; ++a) g.x[a] += g.shape[c] * x[a];
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b) j[a][b] += x[a] * dref[c][b];
  }
  double inv[3][3] = {};
  if (dim == 2) {
    g.det_j = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    inv[0][0] = j[1][1] / g.det_j;
    inv[0][1] = -j[0][1] / g.det_j;
    inv[1][0] = -j[1][0] / g.det_j;
    inv[1][1] = j[0][0] / g.det_j;
  } else {
    g.det_j = j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1]) -
              j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0]) +
              j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
    inv[0][0] = (j[1][1] * j[2][2] - j[1][2] * j[2][1]) / g.det_j;
    inv[0][1] = (j[0][2] * j[2][1] - j[0][1] * j[2][2]) / g.det_j;
    inv[0][2] = (j[0][1] * j[1][2] - j[0][2] * j[1][1]) / g.det_j;
    inv[1][0] = (j[1][2] * j[2][0] - j[1][0] * j[2][2]) / g.det_j;
    inv[1][1] = (j[0][0] * j[2][2] - j[0][2] * j[2][0]) / g.det_j;
    inv[1][2] = (j[0][2] * j[1][0] - j[0][0] * j[1][2]) / g.det_j;
    inv[2][0] = (j[1][0] * j[2][1] - j[1][1] * j[2][0]) / g.det_j;
    inv[2][1] = (j[0][1] * j[2][0] - j[0][0] * j[2][1]) / g.det_j;
    inv[2][2] = (j[0][0] * j[1][1] - j[0][1] * j[1][0]) / g.det_j;
  }
  if (!(g.det_j > 0.0))
    throw NumericalError("degenerate element " + std::to_string(space.elements()[k]) +
                         ": non-positive Jacobian determinant");
  // grad = J^{-T} dref
  for (int c = 0; c < g.n_corners; ++c)
    for (int a = 0; a < dim; ++a) {
      double s = 0.0;
      for (int b = 0; b < dim; ++b) s += inv[b][a] * dref[c][b];
      g.grad[c][a] = s;
    }
  return g;
}

MassMatrices assemble_mass(const FeSpace& space) {
  const int nc = space.mesh().n_corners();
  MassMatrices m;
  m.consistent = assemble_scalar(space, [nc](const ElementGeometry& g, double w, auto& loc) {
    for (int i = 0; i < nc; ++i)
      for (int j = 0; j < nc; ++j) loc[i][j] += w * (g.shape[i] * g.shape[j]);
  });
  std::vector<double> rows(space.n_nodes(), 0.0);
  auto rp = m.consistent.row_ptr();
  auto v = m.consistent.values();
  for (Index i = 0; i < space.n_nodes(); ++i)
    for (Index k = rp[i]; k < rp[i + 1]; ++k) rows[i] += v[k];
  m.lumped = DiagOperator::from_diagonal(rows);
  return m;
}

CsrMatrix assemble_stiffness(const FeSpace& space, double coeff) {
  const int nc = space.mesh().n_corners();
  const int dim = space.dim();
  return assemble_scalar(space, [=](const ElementGeometry& g, double w, auto& loc) {
    for (int i = 0; i < nc; ++i)
      for (int j = 0; j < nc; ++j) loc[i][j] += coeff * w * dot3(g.grad[i], g.grad[j], dim);
  });
}

CsrMatrix assemble_advection(const FeSpace& space, const std::array<double, 3>& b) {
  const int nc = space.mesh().n_corners();
  const int dim = space.dim();
  return assemble_scalar(space, [=](const ElementGeometry& g, double w, auto& loc) {
    for (int i = 0; i < nc; ++i)
      for (int j = 0; j < nc; ++j) loc[i][j] += w * dot3(b, g.grad[j], dim) * g.shape[i];
  });
}

CsrMatrix assemble_convection(const FeSpace& space, int direction) {
  if (direction < 0 || direction >= space.dim()) throw DimensionError("assemble_convection: bad direction");
  const int nc = space.mesh().n_corners();
  return assemble_scalar(space, [=](const ElementGeometry& g, double w, auto& loc) {
    for (int i = 0; i < nc; ++i)
      for (int j = 0; j < nc; ++j) loc[i][j] += w * g.shape[j] * g.grad[i][direction];
  });
}

CsrMatrix assemble_elasticity(const FeSpace& space, double lambda, double mu) {
  if (space.dim() != 3 || space.n_comp() != 3)
    throw DimensionError("assemble_elasticity: needs a 3D space with 3 components");
  const auto rule = QuadratureRule::gauss2(3);
  std::vector<Triplet> trips;
  trips.reserve(space.elements().size() * 24 * 24);
  std::array<std::array<double, 24>, 24> loc{};
  for (Index k = 0; k < static_cast<Index>(space.elements().size()); ++k) {
    for (auto& row : loc) row.fill(0.0);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto g = evaluate_element(space, k, rule.points[q]);
      const double w = rule.weights[q] * g.det_j;
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) {
          const double gij = dot3(g.grad[i], g.grad[j], 3);
          for (int c = 0; c < 3; ++c)
            for (int d = 0; d < 3; ++d) {
              double s = lambda * (g.grad[i][c] * g.grad[j][d]) + mu * (g.grad[i][d] * g.grad[j][c]);
              if (c == d) s += mu * gij;
              loc[i * 3 + c][j * 3 + d] += w * s;
            }
        }
    }
    auto nodes = space.element_nodes(k);
    for (int i = 0; i < 8; ++i)
      for (int c = 0; c < 3; ++c)
        for (int j = 0; j < 8; ++j)
          for (int d = 0; d < 3; ++d)
            trips.push_back({nodes[i] * 3 + c, nodes[j] * 3 + d, loc[i * 3 + c][j * 3 + d]});
  }
  return CsrMatrix::from_triplets(space.n_dofs(), space.n_dofs(), std::move(trips));
}

namespace {

// Active element of `coarse` containing fine element e, walking the fine tree.
ElementId covering_element(const HierMesh& fine_mesh, const HierMesh& coarse_mesh, ElementId e) {
  const Index n_coarse_tree = static_cast<Index>(coarse_mesh.elements().size());
  while (e >= 0) {
    if (e < n_coarse_tree && coarse_mesh.is_active(e)) return e;
    e = fine_mesh.element(e).parent;
  }
  return -1;
}

// Reference coordinates inside coarse element ce of a lattice point.
std::array<double, 3> lattice_to_reference(const HierMesh& mesh, ElementId ce, const LatticeKey& key) {
  const Element& el = mesh.element(ce);
  const Index s = HierMesh::lattice_size(el.level);
  std::array<double, 3> xi{0.0, 0.0, 0.0};
  for (int a = 0; a < mesh.dim(); ++a)
    xi[a] = static_cast<double>(key[a] - el.cell[a] * s) / static_cast<double>(s);
  return xi;
}

// Expansion of every local node into regular nodes (identity for regular nodes).
std::vector<std::vector<std::pair<Index, double>>> node_expansions(const FeSpace& space) {
  std::vector<std::vector<std::pair<Index, double>>> ex(space.n_nodes());
  for (Index i = 0; i < space.n_nodes(); ++i) ex[i] = {{i, 1.0}};
  for (const auto& hc : space.hanging()) {
    ex[hc.hanging].clear();
    for (std::size_t m = 0; m < hc.masters.size(); ++m) ex[hc.hanging].push_back({hc.masters[m], hc.weights[m]});
  }
  return ex;
}

}  // namespace

CsrMatrix assemble_gradient_coupling(const FeSpace& velocity, const FeSpace& pressure, int direction) {
  if (direction < 0 || direction >= velocity.dim()) throw DimensionError("assemble_gradient_coupling: bad direction");
  if (velocity.dim() != pressure.dim()) throw DimensionError("assemble_gradient_coupling: dimension mismatch");
  if (!velocity.hanging().empty() || !pressure.hanging().empty())
    throw UnsupportedError("assemble_gradient_coupling: meshes with hanging nodes are not supported");
  const auto rule = QuadratureRule::gauss2(velocity.dim());
  const int nc = velocity.mesh().n_corners();
  const int dim = velocity.dim();
  std::vector<Triplet> trips;
  for (Index k = 0; k < static_cast<Index>(velocity.elements().size()); ++k) {
    const ElementId fe = velocity.elements()[k];
    const ElementId ce = covering_element(velocity.mesh(), pressure.mesh(), fe);
    if (ce < 0 || velocity.mesh().element(fe).level != pressure.mesh().element(ce).level + 1)
      throw DimensionError("assemble_gradient_coupling: velocity mesh is not a uniform refinement of the pressure mesh");
    const Element& fel = velocity.mesh().element(fe);
    const Element& cel = pressure.mesh().element(ce);
    std::array<std::array<double, 8>, 8> loc{};
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto g = evaluate_element(velocity, k, rule.points[q]);
      std::array<double, 3> xc{0.0, 0.0, 0.0};
      for (int a = 0; a < dim; ++a)
        xc[a] = 0.5 * (static_cast<double>(fel.cell[a] - 2 * cel.cell[a]) + rule.points[q][a]);
      const auto psi = reference_shape(dim, xc);
      const double w = rule.weights[q] * g.det_j;
      for (int i = 0; i < nc; ++i)
        for (int j = 0; j < nc; ++j) loc[i][j] += w * psi[j] * g.grad[i][direction];
    }
    auto vn = velocity.element_nodes(k);
    for (int i = 0; i < nc; ++i)
      for (int j = 0; j < nc; ++j)
        trips.push_back({vn[i], pressure.local_index(cel.nodes[j]), loc[i][j]});
  }
  return CsrMatrix::from_triplets(velocity.n_nodes(), pressure.n_nodes(), std::move(trips));
}

std::vector<Index> node_injection(const FeSpace& coarse, const FeSpace& fine) {
  std::vector<Index> map(coarse.n_nodes());
  for (Index i = 0; i < coarse.n_nodes(); ++i) {
    map[i] = fine.local_index(coarse.global_nodes()[i]);
    if (map[i] < 0) throw DimensionError("node_injection: coarse node missing from fine space");
  }
  return map;
}

TransferPair build_prolongation(const FeSpace& coarse, const FeSpace& fine) {
  const auto cex = node_expansions(coarse);
  const int nc = fine.mesh().n_corners();
  std::vector<char> done(fine.n_nodes(), 0);
  std::vector<Triplet> trips;
  for (Index k = 0; k < static_cast<Index>(fine.elements().size()); ++k) {
    const ElementId fe = fine.elements()[k];
    const ElementId ce = covering_element(fine.mesh(), coarse.mesh(), fe);
    if (ce < 0) throw DimensionError("build_prolongation: fine element not covered by the coarse mesh");
    const Element& cel = coarse.mesh().element(ce);
    auto fnodes = fine.element_nodes(k);
    for (int c = 0; c < nc; ++c) {
      const Index fi = fnodes[c];
      if (done[fi]) continue;
      done[fi] = 1;
      const auto xi = lattice_to_reference(fine.mesh(), ce, fine.mesh().node_key(fine.global_nodes()[fi]));
      const auto w = reference_shape(fine.dim(), xi);
      std::map<Index, double> row;
      for (int j = 0; j < nc; ++j) {
        if (w[j] == 0.0) continue;
        for (auto [m, mw] : cex[coarse.local_index(cel.nodes[j])]) row[m] += w[j] * mw;
      }
      for (auto [col, val] : row)
        if (val != 0.0) trips.push_back({fi, col, val});
    }
  }
  TransferPair t;
  t.prolongation = CsrMatrix::from_triplets(fine.n_nodes(), coarse.n_nodes(), std::move(trips));
  t.restriction = csr_transpose(t.prolongation);
  return t;
}

std::vector<FeSpace> hierarchy_spaces(const MeshHierarchy& h, Index n_comp) {
  std::vector<FeSpace> spaces;
  spaces.reserve(h.levels.size());
  for (const auto& m : h.levels) spaces.emplace_back(std::make_shared<const HierMesh>(m), n_comp);
  return spaces;
}

CsrMatrix build_hanging_matrix(const FeSpace& space) {
  std::vector<Triplet> trips;
  for (Index i = 0; i < space.n_nodes(); ++i)
    if (!space.is_hanging(i)) trips.push_back({i, i, 1.0});
  for (const auto& hc : space.hanging())
    for (std::size_t m = 0; m < hc.masters.size(); ++m) {
      if (space.is_hanging(hc.masters[m]))
        throw NumericalError("build_hanging_matrix: master node " + std::to_string(hc.masters[m]) +
                             " of hanging node " + std::to_string(hc.hanging) + " is itself hanging");
      trips.push_back({hc.hanging, hc.masters[m], hc.weights[m]});
    }
  return CsrMatrix::from_triplets(space.n_nodes(), space.n_nodes(), std::move(trips));
}

CsrMatrix constrain_system(const CsrMatrix& a, const CsrMatrix& h) {
  const Index n = a.n_rows();
  if (a.n_cols() != n || h.n_rows() != n || h.n_cols() != n)
    throw DimensionError("constrain_system: size mismatch");
  auto hrp = h.row_ptr();
  auto hci = h.col_idx();
  auto hv = h.values();
  // A row is "hanging" when H has no unit diagonal there.
  std::vector<char> hanging(n, 1);
  for (Index i = 0; i < n; ++i)
    for (Index k = hrp[i]; k < hrp[i + 1]; ++k)
      if (hci[k] == i && hv[k] == 1.0 && hrp[i + 1] - hrp[i] == 1) hanging[i] = 0;
  struct Contribution {
    Index m, n, k1, k2;
    double v;
  };
  std::vector<Contribution> contrib;
  contrib.reserve(a.nnz());
  auto arp = a.row_ptr();
  auto aci = a.col_idx();
  auto av = a.values();
  for (Index i = 0; i < n; ++i)
    for (Index ka = arp[i]; ka < arp[i + 1]; ++ka) {
      const Index j = aci[ka];
      for (Index ki = hrp[i]; ki < hrp[i + 1]; ++ki)
        for (Index kj = hrp[j]; kj < hrp[j + 1]; ++kj) {
          const Index m = hci[ki], c = hci[kj];
          // Order contributions to (m,c) and (c,m) identically so symmetric input stays bit-exact.
          const bool upper = m <= c;
          contrib.push_back({m, c, upper ? i : j, upper ? j : i, (hv[ki] * hv[kj]) * av[ka]});
        }
    }
  std::sort(contrib.begin(), contrib.end(), [](const Contribution& x, const Contribution& y) {
    if (x.m != y.m) return x.m < y.m;
    if (x.n != y.n) return x.n < y.n;
    if (x.k1 != y.k1) return x.k1 < y.k1;
    return x.k2 < y.k2;
  });
  std::vector<Triplet> trips;
  trips.reserve(contrib.size() + n);
  for (const auto& c : contrib) {
    if (!trips.empty() && trips.back().row == c.m && trips.back().col == c.n)
      trips.back().value += c.v;
    else
      trips.push_back({c.m, c.n, c.v});
  }
  std::erase_if(trips, [&](const Triplet& t) { return hanging[t.row] || hanging[t.col]; });
  for (Index i = 0; i < n; ++i)
    if (hanging[i]) trips.push_back({i, i, 1.0});
  return CsrMatrix::from_triplets(n, n, std::move(trips));
}

std::vector<char> hanging_mask_flat(const FeSpace& space) {
  std::vector<char> mask(space.n_dofs(), 0);
  for (Index i = 0; i < space.n_nodes(); ++i)
    if (space.is_hanging(i))
      for (Index c = 0; c < space.n_comp(); ++c) mask[i * space.n_comp() + c] = 1;
  return mask;
}

BlockVector constrain_rhs(const BlockVector& b, const CsrMatrix& h, std::span<const char> hanging_flat,
                          const Backend& backend) {
  BlockVector out(b.n_nodes(), b.n_comp());
  backend.spmv_transpose(1.0, h, b, 0.0, out, Layout::flat);
  for (Index k = 0; k < out.size(); ++k)
    if (hanging_flat[k]) out[k] = 0.0;
  return out;
}

DirichletSystem eliminate_dirichlet(const CsrMatrix& a, std::span<const char> mask) {
  const Index n = a.n_rows();
  if (a.n_cols() != n || static_cast<Index>(mask.size()) != n)
    throw DimensionError("eliminate_dirichlet: size mismatch");
  auto rp = a.row_ptr();
  auto ci = a.col_idx();
  auto v = a.values();
  std::vector<Triplet> keep, lift;
  for (Index i = 0; i < n; ++i) {
    if (mask[i]) {
      keep.push_back({i, i, 1.0});
      continue;
    }
    for (Index k = rp[i]; k < rp[i + 1]; ++k) {
      if (mask[ci[k]]) lift.push_back({i, ci[k], v[k]});
      else keep.push_back({i, ci[k], v[k]});
    }
  }
  return {CsrMatrix::from_triplets(n, n, std::move(keep)), CsrMatrix::from_triplets(n, n, std::move(lift))};
}

void lift_dirichlet_rhs(const DirichletSystem& sys, std::span<const char> mask,
                        std::span<const double> values, BlockVector& b, const Backend& backend) {
  const Index n = b.size();
  if (static_cast<Index>(mask.size()) != n || static_cast<Index>(values.size()) != n)
    throw DimensionError("lift_dirichlet_rhs: size mismatch");
  BlockVector g(b.n_nodes(), b.n_comp());
  for (Index k = 0; k < n; ++k)
    if (mask[k]) g[k] = values[k];
  backend.spmv(-1.0, sys.lifting, g, 1.0, b, Layout::flat);
  for (Index k = 0; k < n; ++k)
    if (mask[k]) b[k] = values[k];
}

std::pair<CsrMatrix, BlockVector> apply_dirichlet(const CsrMatrix& a, const BlockVector& b,
                                                  const FeSpace& space) {
  if (a.n_rows() != space.n_dofs() || b.size() != space.n_dofs())
    throw DimensionError("apply_dirichlet: system does not match the space");
  auto sys = eliminate_dirichlet(a, space.dirichlet_mask());
  BlockVector out = b;
  ReferenceBackend backend;
  lift_dirichlet_rhs(sys, space.dirichlet_mask(), space.dirichlet_values(), out, backend);
  return {std::move(sys.matrix), std::move(out)};
}

BlockVector interpolate(const FeSpace& space, const ExactFunction& f, double t) {
  BlockVector u(space.n_nodes(), space.n_comp());
  for (Index i = 0; i < space.n_nodes(); ++i) {
    auto v = f(t, space.node_coord(i));
    if (static_cast<Index>(v.size()) != space.n_comp()) throw DimensionError("interpolate: wrong number of components");
    for (Index c = 0; c < space.n_comp(); ++c) u(i, c) = v[c];
  }
  return u;
}

double l2_error(const FeSpace& space, const BlockVector& u_h, const ExactFunction& exact, double t) {
  if (u_h.n_nodes() != space.n_nodes() || u_h.n_comp() != space.n_comp())
    throw DimensionError("l2_error: vector does not match the space");
  const auto rule = QuadratureRule::gauss2(space.dim());
  const int nc = space.mesh().n_corners();
  double sum = 0.0;
  for (Index k = 0; k < static_cast<Index>(space.elements().size()); ++k) {
    auto nodes = space.element_nodes(k);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto g = evaluate_element(space, k, rule.points[q]);
      const auto ex = exact(t, g.x);
      for (Index c = 0; c < space.n_comp(); ++c) {
        double uh = 0.0;
        for (int i = 0; i < nc; ++i) uh += g.shape[i] * u_h(nodes[i], c);
        const double d = uh - ex[c];
        sum += rule.weights[q] * g.det_j * d * d;
      }
    }
  }
  return std::sqrt(sum);
}

}  // namespace mgfem
