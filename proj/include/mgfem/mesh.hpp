#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mgfem/linalg.hpp"

namespace mgfem {

using NodeId = Index;
using ElementId = Index;
using Point = std::array<double, 3>;

/// Integer position on the finest representable lattice.
using LatticeKey = std::array<Index, 3>;

/// Refinement level plus integer cell position at that level.
using CellKey = std::array<Index, 4>;

struct IndexArrayHash {
  template <std::size_t N>
  std::size_t operator()(const std::array<Index, N>& k) const noexcept {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (Index v : k) h = (h ^ static_cast<std::size_t>(v)) * 0x100000001b3ULL;
    return h;
  }
};

/// Deepest refinement level representable by LatticeKey.
inline constexpr int kMaxDepth = 24;

/// A quadrilateral (2D) or hexahedral (3D) cell of the refinement tree.
struct Element {
  int level = 0;
  /// Integer position of the cell at its own level.
  std::array<Index, 3> cell{};
  /// Corner nodes in lexicographic order: corner c sits at offsets (c&1, c>>1&1, c>>2&1).
  std::array<NodeId, 8> nodes{};
  ElementId parent = -1;
  /// Children are stored consecutively in lexicographic child-offset order.
  ElementId first_child = -1;
};

/// A node lying inside a coarser neighbour's edge or face.
struct HangingConstraint {
  NodeId hanging;
  std::vector<NodeId> masters;
  std::vector<double> weights;
};

/// Hierarchical quad/hex mesh over a structured root grid.
///
/// The refinement tree (elements and nodes) only ever grows; which elements
/// form the mesh is described by the active set. Coarsened hierarchy levels
/// share the tree of the fine mesh and differ only in their active sets, so
/// node and element ids agree across all levels derived from one mesh.
class HierMesh {
 public:
  /// Root grid with the given per-axis coordinates (each ascending, at least
  /// two entries). For dim == 2 the third axis is ignored.
  static HierMesh tensor_grid(int dim, const std::array<std::vector<double>, 3>& axes);

  int dim() const { return dim_; }
  int n_corners() const { return 1 << dim_; }
  int n_children() const { return 1 << dim_; }
  const std::array<Index, 3>& root_dims() const { return root_dims_; }

  Index n_nodes_total() const { return static_cast<Index>(coords_.size()); }
  const Point& coord(NodeId n) const { return coords_[n]; }
  const LatticeKey& node_key(NodeId n) const { return keys_[n]; }
  void set_coord(NodeId n, const Point& p) { coords_[n] = p; }

  std::span<const Element> elements() const { return elements_; }
  const Element& element(ElementId e) const { return elements_[e]; }
  bool is_active(ElementId e) const { return active_[e] != 0; }
  bool is_leaf(ElementId e) const { return elements_[e].first_child < 0; }
  ElementId child(ElementId e, int k) const { return elements_[e].first_child + k; }

  /// Active elements in increasing id order.
  std::vector<ElementId> active_elements() const;
  Index n_active() const { return n_active_; }
  /// Nodes used by active elements, in increasing id order.
  std::vector<NodeId> active_nodes() const;
  int max_active_level() const;

  /// Element occupying `cell` at `level`, or -1 if it was never created.
  ElementId find_cell(int level, const std::array<Index, 3>& cell) const;
  NodeId find_node(const LatticeKey& key) const;
  /// Active element equal to or containing the given cell, or -1 when the
  /// cell is covered by finer active elements or lies outside the domain.
  ElementId active_cover(int level, const std::array<Index, 3>& cell) const;
  /// The element itself if active, else its nearest active ancestor (or -1).
  ElementId active_ancestor(ElementId e) const;
  bool cell_in_domain(int level, const std::array<Index, 3>& cell) const;

  /// Lattice key of the point at reference coordinates num/den of element e.
  LatticeKey element_point_key(ElementId e, const std::array<Index, 3>& num, Index den) const;
  /// Lattice spacing of an element at `level`.
  static Index lattice_size(int level) { return Index{1} << (kMaxDepth - level); }

  /// Replaces an active element by its children, creating them if needed.
  /// Does not restore balance; see refine().
  void split(ElementId e);
  /// Replaces a complete group of active children by their parent.
  void merge(ElementId parent);

  /// Physical position at reference coordinates xi in [0,1]^dim of element e
  /// (multilinear interpolation of its corners).
  Point map_to_physical(ElementId e, const std::array<double, 3>& xi) const;

 private:
  NodeId get_or_create_node(const LatticeKey& key, const Point& p);

  int dim_ = 2;
  std::array<Index, 3> root_dims_{1, 1, 1};
  std::vector<Point> coords_;
  std::vector<LatticeKey> keys_;
  std::unordered_map<LatticeKey, NodeId, IndexArrayHash> node_lookup_;
  std::vector<Element> elements_;
  std::unordered_map<CellKey, ElementId, IndexArrayHash> cell_lookup_;
  std::vector<char> active_;
  Index n_active_ = 0;
};

/// Levels ordered coarse (index 0) to fine (index L).
struct MeshHierarchy {
  std::vector<HierMesh> levels;
  Index n_levels() const { return static_cast<Index>(levels.size()); }
  const HierMesh& finest() const { return levels.back(); }
};

enum class RefinePattern { face, edge, vertex };

/// Structured unit square (dim 2) or cube (dim 3): one root cell refined n times.
HierMesh unit_box_mesh(int dim, int n_refinements);
/// Structured grid directly at the given resolution (no refinement tree).
HierMesh structured_box_mesh(int dim, std::array<Index, 3> cells, std::array<double, 3> extent);

/// Refines the marked active elements, then refines further until every face
/// (and in 3D every edge) separates elements whose levels differ by at most one.
HierMesh refine(const HierMesh& mesh, std::span<const ElementId> marked);
/// Every active element refined once.
HierMesh uniform_refine(const HierMesh& mesh);
/// Merges every sibling group whose merge keeps the mesh balanced, deepest first.
HierMesh global_coarsen(const HierMesh& mesh);
/// Repeated global coarsening until at most `coarse_target` active elements
/// remain or nothing can be merged.
MeshHierarchy build_hierarchy(const HierMesh& fine, Index coarse_target);

/// One constraint per hanging node; masters are the coarse edge/face corners.
std::vector<HangingConstraint> hanging_constraints(const HierMesh& mesh);
/// Hanging nodes over active nodes. With edge_only, only nodes hanging on a
/// coarse edge (two masters) are counted.
double hanging_fraction(const HierMesh& mesh, bool edge_only = false);

/// Max-norm distance from the box of element e to the target entity.
double distance_to_entity(const HierMesh& mesh, ElementId e, RefinePattern pattern,
                          const Point& target);
/// Active elements whose distance to the target entity is below `layers`
/// element widths; layers == 0 selects the elements touching the entity.
/// face: plane x = target.x; edge: line x = target.x, y = target.y;
/// vertex: the point target.
std::vector<ElementId> mark_geometric(const HierMesh& mesh, RefinePattern pattern,
                                      const Point& target, int layers = 0);

/// Cavity mesh on (0,1)x(0,1)x(0,2) with cosine-graded x,y and sine-graded z.
HierMesh graded_tensor_mesh(Index nx, Index ny, Index nz);
/// Ascending graded coordinates along one axis.
std::vector<double> cosine_graded_axis(Index n);
std::vector<double> sine_graded_axis(Index n);

/// Level difference across every face (and edge in 3D) is at most one.
bool is_balanced(const HierMesh& mesh);

/// Line-oriented text serialization of the active mesh.
void write_mesh_text(const HierMesh& mesh, std::ostream& os);

/// Parsed form of write_mesh_text output.
struct MeshText {
  int dim = 0;
  std::vector<Point> nodes;
  std::vector<std::vector<Index>> elements;
  std::vector<HangingConstraint> constraints;
};
MeshText read_mesh_text(std::istream& is);

RefinePattern parse_refine_pattern(const std::string& s);
std::string to_string(RefinePattern p);

}  // namespace mgfem
