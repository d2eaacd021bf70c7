#include "mgfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

namespace mgfem {
namespace {

std::array<Index, 3> corner_offset(int c) { return {c & 1, (c >> 1) & 1, (c >> 2) & 1}; }

// Face directions, plus edge directions in 3D.
std::vector<std::array<Index, 3>> balance_directions(int dim) {
  std::vector<std::array<Index, 3>> dirs;
  const int max_nonzero = dim == 3 ? 2 : 1;
  const Index zr = dim == 3 ? 1 : 0;
  for (Index dz = -zr; dz <= zr; ++dz)
    for (Index dy = -1; dy <= 1; ++dy)
      for (Index dx = -1; dx <= 1; ++dx) {
        int nz = (dx != 0) + (dy != 0) + (dz != 0);
        if (nz >= 1 && nz <= max_nonzero) dirs.push_back({dx, dy, dz});
      }
  return dirs;
}

std::array<Index, 3> shifted(const std::array<Index, 3>& c, const std::array<Index, 3>& d) {
  return {c[0] + d[0], c[1] + d[1], c[2] + d[2]};
}

}  // namespace

HierMesh HierMesh::tensor_grid(int dim, const std::array<std::vector<double>, 3>& axes) {
  if (dim != 2 && dim != 3) throw UnsupportedError("HierMesh: dim must be 2 or 3");
  HierMesh m;
  m.dim_ = dim;
  for (int a = 0; a < dim; ++a) {
    if (axes[a].size() < 2) throw DimensionError("HierMesh: each axis needs at least 2 coordinates");
    for (std::size_t i = 1; i < axes[a].size(); ++i)
      if (!(axes[a][i] > axes[a][i - 1])) throw NumericalError("HierMesh: axis coordinates must ascend");
    m.root_dims_[a] = static_cast<Index>(axes[a].size()) - 1;
  }
  if (dim == 2) m.root_dims_[2] = 1;
  const Index s = lattice_size(0);
  const Index nzn = dim == 3 ? m.root_dims_[2] + 1 : 1;
  for (Index k = 0; k < nzn; ++k)
    for (Index j = 0; j <= m.root_dims_[1]; ++j)
      for (Index i = 0; i <= m.root_dims_[0]; ++i) {
        Point p{axes[0][i], axes[1][j], dim == 3 ? axes[2][k] : 0.0};
        m.get_or_create_node({i * s, j * s, k * s}, p);
      }
  for (Index k = 0; k < m.root_dims_[2]; ++k)
    for (Index j = 0; j < m.root_dims_[1]; ++j)
      for (Index i = 0; i < m.root_dims_[0]; ++i) {
        Element e;
        e.level = 0;
        e.cell = {i, j, k};
        for (int c = 0; c < m.n_corners(); ++c) {
          auto o = corner_offset(c);
          e.nodes[c] = m.find_node({(i + o[0]) * s, (j + o[1]) * s, dim == 3 ? (k + o[2]) * s : 0});
        }
        const ElementId id = static_cast<ElementId>(m.elements_.size());
        m.cell_lookup_.emplace(CellKey{0, i, j, k}, id);
        m.elements_.push_back(e);
        m.active_.push_back(1);
        ++m.n_active_;
      }
  return m;
}

NodeId HierMesh::get_or_create_node(const LatticeKey& key, const Point& p) {
  auto [it, inserted] = node_lookup_.try_emplace(key, static_cast<NodeId>(coords_.size()));
  if (inserted) {
    coords_.push_back(p);
    keys_.push_back(key);
  }
  return it->second;
}

std::vector<ElementId> HierMesh::active_elements() const {
  std::vector<ElementId> out;
  out.reserve(n_active_);
  for (ElementId e = 0; e < static_cast<ElementId>(elements_.size()); ++e)
    if (active_[e]) out.push_back(e);
  return out;
}

std::vector<NodeId> HierMesh::active_nodes() const {
  std::vector<char> used(coords_.size(), 0);
  for (ElementId e = 0; e < static_cast<ElementId>(elements_.size()); ++e)
    if (active_[e])
      for (int c = 0; c < n_corners(); ++c) used[elements_[e].nodes[c]] = 1;
  std::vector<NodeId> out;
  for (NodeId n = 0; n < static_cast<NodeId>(used.size()); ++n)
    if (used[n]) out.push_back(n);
  return out;
}

int HierMesh::max_active_level() const {
  int m = 0;
  for (ElementId e = 0; e < static_cast<ElementId>(elements_.size()); ++e)
    if (active_[e]) m = std::max(m, elements_[e].level);
  return m;
}

ElementId HierMesh::find_cell(int level, const std::array<Index, 3>& cell) const {
  auto it = cell_lookup_.find(CellKey{level, cell[0], cell[1], cell[2]});
  return it == cell_lookup_.end() ? -1 : it->second;
}

NodeId HierMesh::find_node(const LatticeKey& key) const {
  auto it = node_lookup_.find(key);
  return it == node_lookup_.end() ? -1 : it->second;
}

bool HierMesh::cell_in_domain(int level, const std::array<Index, 3>& cell) const {
  for (int a = 0; a < 3; ++a) {
    const Index extent = (a < dim_ ? root_dims_[a] : 1) << (a < dim_ ? level : 0);
    if (cell[a] < 0 || cell[a] >= extent) return false;
  }
  return true;
}

ElementId HierMesh::active_cover(int level, const std::array<Index, 3>& cell) const {
  if (!cell_in_domain(level, cell)) return -1;
  for (int l = level; l >= 0; --l) {
    const int shift = level - l;
    std::array<Index, 3> c{cell[0] >> shift, cell[1] >> shift, dim_ == 3 ? cell[2] >> shift : cell[2]};
    ElementId e = find_cell(l, c);
    if (e >= 0 && active_[e]) return e;
  }
  return -1;
}

ElementId HierMesh::active_ancestor(ElementId e) const {
  while (e >= 0 && !active_[e]) e = elements_[e].parent;
  return e;
}

LatticeKey HierMesh::element_point_key(ElementId e, const std::array<Index, 3>& num, Index den) const {
  const Element& el = elements_[e];
  const Index s = lattice_size(el.level);
  LatticeKey k{};
  for (int a = 0; a < 3; ++a)
    k[a] = a < dim_ ? el.cell[a] * s + num[a] * (s / den) : 0;
  return k;
}

Point HierMesh::map_to_physical(ElementId e, const std::array<double, 3>& xi) const {
  const Element& el = elements_[e];
  Point p{0.0, 0.0, 0.0};
  for (int c = 0; c < n_corners(); ++c) {
    auto o = corner_offset(c);
    double w = 1.0;
    for (int a = 0; a < dim_; ++a) w *= o[a] ? xi[a] : 1.0 - xi[a];
    const Point& x = coords_[el.nodes[c]];
    for (int a = 0; a < 3; ++a) p[a] += w * x[a];
  }
  return p;
}

void HierMesh::split(ElementId e) {
  if (!active_[e]) throw Error("HierMesh::split: element is not active");
  if (elements_[e].level >= kMaxDepth) throw UnsupportedError("HierMesh::split: maximum depth reached");
  if (elements_[e].first_child < 0) {
    const ElementId first = static_cast<ElementId>(elements_.size());
    const Element parent = elements_[e];
    for (int k = 0; k < n_children(); ++k) {
      auto off = corner_offset(k);
      Element ch;
      ch.level = parent.level + 1;
      ch.parent = e;
      for (int a = 0; a < 3; ++a) ch.cell[a] = a < dim_ ? 2 * parent.cell[a] + off[a] : 0;
      for (int c = 0; c < n_corners(); ++c) {
        auto co = corner_offset(c);
        std::array<Index, 3> num{off[0] + co[0], off[1] + co[1], off[2] + co[2]};
        LatticeKey key = element_point_key(e, num, 2);
        std::array<double, 3> xi{0.5 * num[0], 0.5 * num[1], 0.5 * num[2]};
        ch.nodes[c] = get_or_create_node(key, map_to_physical(e, xi));
      }
      cell_lookup_.emplace(CellKey{ch.level, ch.cell[0], ch.cell[1], ch.cell[2]},
                           first + k);
      elements_.push_back(ch);
      active_.push_back(0);
    }
    elements_[e].first_child = first;
  }
  active_[e] = 0;
  for (int k = 0; k < n_children(); ++k) active_[elements_[e].first_child + k] = 1;
  n_active_ += n_children() - 1;
}

void HierMesh::merge(ElementId parent) {
  const Element& p = elements_[parent];
  if (p.first_child < 0) throw Error("HierMesh::merge: element has no children");
  for (int k = 0; k < n_children(); ++k)
    if (!active_[p.first_child + k]) throw Error("HierMesh::merge: sibling group not active");
  for (int k = 0; k < n_children(); ++k) active_[p.first_child + k] = 0;
  active_[parent] = 1;
  n_active_ -= n_children() - 1;
}

HierMesh unit_box_mesh(int dim, int n_refinements) {
  std::array<std::vector<double>, 3> axes{std::vector<double>{0.0, 1.0},
                                          std::vector<double>{0.0, 1.0},
                                          std::vector<double>{0.0, 1.0}};
  HierMesh m = HierMesh::tensor_grid(dim, axes);
  for (int r = 0; r < n_refinements; ++r) m = uniform_refine(m);
  return m;
}

HierMesh structured_box_mesh(int dim, std::array<Index, 3> cells, std::array<double, 3> extent) {
  std::array<std::vector<double>, 3> axes;
  for (int a = 0; a < 3; ++a) {
    const Index n = a < dim ? cells[a] : 1;
    axes[a].resize(n + 1);
    for (Index i = 0; i <= n; ++i) axes[a][i] = extent[a] * static_cast<double>(i) / static_cast<double>(n);
  }
  return HierMesh::tensor_grid(dim, axes);
}

HierMesh refine(const HierMesh& mesh, std::span<const ElementId> marked) {
  HierMesh m = mesh;
  std::vector<ElementId> work;
  for (ElementId e : marked) {
    if (!m.is_active(e)) continue;
    m.split(e);
    for (int k = 0; k < m.n_children(); ++k) work.push_back(m.child(e, k));
  }
  const auto dirs = balance_directions(m.dim());
  // Only newly created elements can be two levels finer than a neighbour.
  while (!work.empty()) {
    const ElementId e = work.back();
    work.pop_back();
    if (!m.is_active(e)) continue;
    const int level = m.element(e).level;
    for (const auto& d : dirs) {
      const auto nc = shifted(m.element(e).cell, d);
      const ElementId cov = m.active_cover(level, nc);
      if (cov < 0 || m.element(cov).level >= level - 1) continue;
      m.split(cov);
      for (int k = 0; k < m.n_children(); ++k) work.push_back(m.child(cov, k));
      work.push_back(e);
      break;
    }
  }
  return m;
}

HierMesh uniform_refine(const HierMesh& mesh) {
  HierMesh m = mesh;
  for (ElementId e : mesh.active_elements()) m.split(e);
  return m;
}

HierMesh global_coarsen(const HierMesh& mesh) {
  HierMesh m = mesh;
  std::vector<ElementId> groups;
  for (ElementId e : mesh.active_elements()) {
    const ElementId p = mesh.element(e).parent;
    if (p < 0 || mesh.child(p, 0) != e) continue;
    bool complete = true;
    for (int k = 0; k < mesh.n_children(); ++k) complete = complete && mesh.is_active(mesh.child(p, k));
    if (complete) groups.push_back(p);
  }
  std::stable_sort(groups.begin(), groups.end(), [&](ElementId a, ElementId b) {
    return mesh.element(a).level > mesh.element(b).level;
  });
  const auto dirs = balance_directions(m.dim());
  for (ElementId p : groups) {
    const Element& pe = m.element(p);
    bool legal = true;
    for (const auto& d : dirs) {
      const auto nc = shifted(pe.cell, d);
      if (!m.cell_in_domain(pe.level, nc)) continue;
      if (m.active_cover(pe.level, nc) >= 0) continue;
      // Neighbour is refined: its children touching p must be leaves of this view.
      const ElementId ne = m.find_cell(pe.level, nc);
      for (int k = 0; k < m.n_children() && legal; ++k) {
        auto off = corner_offset(k);
        bool touches = true;
        for (int a = 0; a < m.dim(); ++a) {
          if (d[a] == 1 && off[a] != 0) touches = false;
          if (d[a] == -1 && off[a] != 1) touches = false;
        }
        if (touches && !m.is_active(m.child(ne, k))) legal = false;
      }
      if (!legal) break;
    }
    if (legal) m.merge(p);
  }
  return m;
}

MeshHierarchy build_hierarchy(const HierMesh& fine, Index coarse_target) {
  std::vector<HierMesh> rev{fine};
  while (rev.back().n_active() > coarse_target) {
    HierMesh c = global_coarsen(rev.back());
    if (c.n_active() == rev.back().n_active()) break;
    rev.push_back(std::move(c));
  }
  MeshHierarchy h;
  h.levels.assign(std::make_move_iterator(rev.rbegin()), std::make_move_iterator(rev.rend()));
  return h;
}

std::vector<HangingConstraint> hanging_constraints(const HierMesh& mesh) {
  std::vector<char> in_mesh(mesh.n_nodes_total(), 0);
  for (NodeId n : mesh.active_nodes()) in_mesh[n] = 1;
  std::map<NodeId, HangingConstraint> found;
  const int dim = mesh.dim();
  auto try_add = [&](ElementId e, const std::vector<int>& corners) {
    const Element& el = mesh.element(e);
    LatticeKey key{0, 0, 0};
    for (int c : corners)
      for (int a = 0; a < 3; ++a) key[a] += mesh.node_key(el.nodes[c])[a];
    for (int a = 0; a < 3; ++a) key[a] /= static_cast<Index>(corners.size());
    const NodeId n = mesh.find_node(key);
    if (n < 0 || !in_mesh[n] || found.count(n)) return;
    HangingConstraint hc{n, {}, {}};
    for (int c : corners) {
      hc.masters.push_back(el.nodes[c]);
      hc.weights.push_back(1.0 / static_cast<double>(corners.size()));
    }
    found.emplace(n, std::move(hc));
  };
  for (ElementId e : mesh.active_elements()) {
    // Edges: corner pairs differing in exactly one axis bit.
    for (int c = 0; c < mesh.n_corners(); ++c)
      for (int a = 0; a < dim; ++a)
        if (!(c & (1 << a))) try_add(e, {c, c | (1 << a)});
    if (dim == 3)
      for (int a = 0; a < 3; ++a)
        for (int side = 0; side < 2; ++side) {
          std::vector<int> face;
          for (int c = 0; c < 8; ++c)
            if (((c >> a) & 1) == side) face.push_back(c);
          try_add(e, face);
        }
  }
  std::vector<HangingConstraint> out;
  out.reserve(found.size());
  for (auto& [n, hc] : found) out.push_back(std::move(hc));
  return out;
}

double distance_to_entity(const HierMesh& mesh, ElementId e, RefinePattern pattern,
                          const Point& target) {
  const int n_fixed = pattern == RefinePattern::face ? 1 : pattern == RefinePattern::edge ? 2 : 3;
  const Element& el = mesh.element(e);
  double dist = 0.0;
  for (int a = 0; a < std::min(n_fixed, mesh.dim()); ++a) {
    double lo = mesh.coord(el.nodes[0])[a], hi = lo;
    for (int c = 1; c < mesh.n_corners(); ++c) {
      lo = std::min(lo, mesh.coord(el.nodes[c])[a]);
      hi = std::max(hi, mesh.coord(el.nodes[c])[a]);
    }
    dist = std::max(dist, std::max({0.0, lo - target[a], target[a] - hi}));
  }
  return dist;
}

std::vector<ElementId> mark_geometric(const HierMesh& mesh, RefinePattern pattern,
                                      const Point& target, int layers) {
  const int n_fixed = pattern == RefinePattern::face ? 1 : pattern == RefinePattern::edge ? 2 : 3;
  std::vector<ElementId> marked;
  for (ElementId e : mesh.active_elements()) {
    const Element& el = mesh.element(e);
    double h = 0.0;
    for (int a = 0; a < std::min(n_fixed, mesh.dim()); ++a) {
      double lo = mesh.coord(el.nodes[0])[a], hi = lo;
      for (int c = 1; c < mesh.n_corners(); ++c) {
        lo = std::min(lo, mesh.coord(el.nodes[c])[a]);
        hi = std::max(hi, mesh.coord(el.nodes[c])[a]);
      }
      h = a == 0 ? hi - lo : std::min(h, hi - lo);
    }
    const double d = distance_to_entity(mesh, e, pattern, target);
    const bool hit = layers == 0 ? d <= 1e-12 * h : d < layers * h * (1.0 - 1e-9);
    if (hit) marked.push_back(e);
  }
  return marked;
}

std::vector<double> cosine_graded_axis(Index n) {
  std::vector<double> x(n + 1);
  for (Index i = 0; 2 * i < n; ++i) {
    x[i] = 0.5 * (1.0 - std::cos(static_cast<double>(i) * std::numbers::pi / static_cast<double>(n)));
    x[n - i] = 1.0 - x[i];
  }
  if (n % 2 == 0) x[n / 2] = 0.5;
  return x;
}

std::vector<double> sine_graded_axis(Index n) {
  std::vector<double> z(n + 1);
  for (Index k = 0; 2 * k < n; ++k) {
    z[k] = 1.0 + std::sin(static_cast<double>(2 * k - n) * std::numbers::pi /
                          (2.0 * static_cast<double>(n)));
    z[n - k] = 2.0 - z[k];
  }
  if (n % 2 == 0) z[n / 2] = 1.0;
  return z;
}

HierMesh graded_tensor_mesh(Index nx, Index ny, Index nz) {
  if (nx < 2 || ny < 2 || nz < 2) throw DimensionError("graded_tensor_mesh: need at least 2 cells per axis");
  int k = 0;
  while (((nx | ny | nz) & ((Index{2} << k) - 1)) == 0) ++k;
  HierMesh m = HierMesh::tensor_grid(
      3, {cosine_graded_axis(nx >> k), cosine_graded_axis(ny >> k), sine_graded_axis(nz >> k)});
  for (int r = 0; r < k; ++r) m = uniform_refine(m);
  const auto xs = cosine_graded_axis(nx), ys = cosine_graded_axis(ny), zs = sine_graded_axis(nz);
  const Index s = HierMesh::lattice_size(k);
  for (NodeId n = 0; n < m.n_nodes_total(); ++n) {
    const auto& key = m.node_key(n);
    m.set_coord(n, {xs[key[0] / s], ys[key[1] / s], zs[key[2] / s]});
  }
  return m;
}

bool is_balanced(const HierMesh& mesh) {
  const auto dirs = balance_directions(mesh.dim());
  for (ElementId e : mesh.active_elements()) {
    const Element& el = mesh.element(e);
    for (const auto& d : dirs) {
      const ElementId cov = mesh.active_cover(el.level, shifted(el.cell, d));
      if (cov >= 0 && el.level - mesh.element(cov).level > 1) return false;
    }
  }
  return true;
}

void write_mesh_text(const HierMesh& mesh, std::ostream& os) {
  const auto nodes = mesh.active_nodes();
  std::vector<Index> local(mesh.n_nodes_total(), -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) local[nodes[i]] = static_cast<Index>(i);
  const auto elems = mesh.active_elements();
  const auto hc = hanging_constraints(mesh);
  char buf[96];
  os << "mgfem-mesh 1\n" << "dim " << mesh.dim() << '\n';
  os << "nodes " << nodes.size() << '\n';
  for (NodeId n : nodes) {
    const Point& p = mesh.coord(n);
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g", p[0], p[1], p[2]);
    os << buf << '\n';
  }
  os << "elements " << elems.size() << '\n';
  for (ElementId e : elems) {
    for (int c = 0; c < mesh.n_corners(); ++c) os << (c ? " " : "") << local[mesh.element(e).nodes[c]];
    os << '\n';
  }
  os << "constraints " << hc.size() << '\n';
  for (const auto& c : hc) {
    os << local[c.hanging] << ' ' << c.masters.size();
    for (std::size_t k = 0; k < c.masters.size(); ++k) {
      std::snprintf(buf, sizeof buf, " %lld %.17g", static_cast<long long>(local[c.masters[k]]), c.weights[k]);
      os << buf;
    }
    os << '\n';
  }
}

MeshText read_mesh_text(std::istream& is) {
  MeshText mt;
  std::string tag;
  int version = 0;
  if (!(is >> tag >> version) || tag != "mgfem-mesh" || version != 1)
    throw Error("read_mesh_text: missing 'mgfem-mesh 1' header");
  std::size_t count = 0;
  auto expect = [&](const char* name) {
    if (!(is >> tag) || tag != name) throw Error(std::string("read_mesh_text: expected '") + name + "'");
  };
  expect("dim");
  is >> mt.dim;
  expect("nodes");
  is >> count;
  mt.nodes.resize(count);
  for (auto& p : mt.nodes) is >> p[0] >> p[1] >> p[2];
  expect("elements");
  is >> count;
  mt.elements.assign(count, std::vector<Index>(std::size_t{1} << mt.dim));
  for (auto& el : mt.elements)
    for (auto& n : el) is >> n;
  expect("constraints");
  is >> count;
  mt.constraints.resize(count);
  for (auto& c : mt.constraints) {
    std::size_t nm = 0;
    is >> c.hanging >> nm;
    c.masters.resize(nm);
    c.weights.resize(nm);
    for (std::size_t k = 0; k < nm; ++k) is >> c.masters[k] >> c.weights[k];
  }
  if (!is) throw Error("read_mesh_text: truncated input");
  return mt;
}

RefinePattern parse_refine_pattern(const std::string& s) {
  if (s == "face") return RefinePattern::face;
  if (s == "edge") return RefinePattern::edge;
  if (s == "vertex") return RefinePattern::vertex;
  throw Error("unknown refinement pattern '" + s + "'");
}

std::string to_string(RefinePattern p) {
  switch (p) {
    case RefinePattern::face: return "face";
    case RefinePattern::edge: return "edge";
    case RefinePattern::vertex: return "vertex";
  }
  return "?";
}

double hanging_fraction(const HierMesh& mesh, bool edge_only) {
  const auto nodes = mesh.active_nodes();
  if (nodes.empty()) return 0.0;
  std::size_t count = 0;
  for (const auto& hc : hanging_constraints(mesh))
    if (!edge_only || hc.masters.size() == 2) ++count;
  return static_cast<double>(count) / static_cast<double>(nodes.size());
}

}  // namespace mgfem
