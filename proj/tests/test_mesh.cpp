#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "mgfem/error.hpp"
#include "mgfem/mesh.hpp"

using namespace mgfem;

namespace {

// Level jumps across faces (and edges in 3D) by comparing lattice boxes of all pairs.
bool brute_force_balanced(const HierMesh& m) {
  const auto act = m.active_elements();
  const int min_shared = m.dim() == 3 ? 1 : m.dim() - 1;
  for (std::size_t a = 0; a < act.size(); ++a)
    for (std::size_t b = a + 1; b < act.size(); ++b) {
      const Element& ea = m.element(act[a]);
      const Element& eb = m.element(act[b]);
      const Index sa = HierMesh::lattice_size(ea.level), sb = HierMesh::lattice_size(eb.level);
      int positive = 0;
      bool touch = true;
      for (int d = 0; d < m.dim(); ++d) {
        const Index lo = std::max(ea.cell[d] * sa, eb.cell[d] * sb);
        const Index hi = std::min((ea.cell[d] + 1) * sa, (eb.cell[d] + 1) * sb);
        if (hi < lo) touch = false;
        if (hi > lo) ++positive;
      }
      if (touch && positive >= min_shared && std::abs(ea.level - eb.level) > 1) return false;
    }
  return true;
}

ElementId active_at(const HierMesh& m, int level, std::array<Index, 3> cell) {
  ElementId e = m.find_cell(level, cell);
  REQUIRE(e >= 0);
  return e;
}

void check_constraints(const HierMesh& m) {
  const auto hcs = hanging_constraints(m);
  std::set<NodeId> hanging;
  for (const auto& hc : hcs) hanging.insert(hc.hanging);
  for (const auto& hc : hcs) {
    double s = 0.0;
    for (double w : hc.weights) s += w;
    CHECK(std::abs(s - 1.0) < 1e-15);
    for (NodeId n : hc.masters) CHECK(hanging.count(n) == 0);
    Point p{0, 0, 0};
    for (std::size_t k = 0; k < hc.masters.size(); ++k)
      for (int d = 0; d < 3; ++d) p[d] += hc.weights[k] * m.coord(hc.masters[k])[d];
    for (int d = 0; d < 3; ++d) CHECK(std::abs(p[d] - m.coord(hc.hanging)[d]) < 1e-14);
  }
}

}  // namespace

TEST_SUITE("mesh") {

TEST_CASE("refining a single square") {
  auto m = unit_box_mesh(2, 0);
  auto marked = m.active_elements();
  auto r = refine(m, marked);
  CHECK(r.n_active() == 4);
  CHECK(r.active_nodes().size() == 9);
  CHECK(hanging_constraints(r).empty());
}

TEST_CASE("refining one element of a 2x2 mesh leaves two hanging nodes") {
  auto m = unit_box_mesh(2, 1);
  std::vector<ElementId> marked{active_at(m, 1, {0, 0, 0})};
  auto r = refine(m, marked);
  CHECK(r.n_active() == 7);
  auto hcs = hanging_constraints(r);
  REQUIRE(hcs.size() == 2);
  for (const auto& hc : hcs) {
    CHECK(hc.masters.size() == 2);
    CHECK(hc.weights == std::vector<double>{0.5, 0.5});
  }
  check_constraints(r);
}

TEST_CASE("refine closure restores balance") {
  auto m = unit_box_mesh(2, 1);
  std::vector<ElementId> marked{active_at(m, 1, {0, 0, 0})};
  m = refine(m, marked);
  // Child touching the mesh center.
  marked = {active_at(m, 2, {1, 1, 0})};
  auto r = refine(m, marked);
  CHECK(brute_force_balanced(r));
  CHECK(is_balanced(r));
  CHECK_FALSE(r.is_active(active_at(r, 1, {1, 0, 0})));
  CHECK_FALSE(r.is_active(active_at(r, 1, {0, 1, 0})));
  check_constraints(r);
}

TEST_CASE("random refinement keeps balance and valid constraints") {
  std::mt19937 rng(9);
  for (int dim : {2, 3}) {
    auto m = unit_box_mesh(dim, 1);
    for (int step = 0; step < (dim == 2 ? 5 : 3); ++step) {
      auto act = m.active_elements();
      std::vector<ElementId> marked;
      std::uniform_int_distribution<std::size_t> pick(0, act.size() - 1);
      for (int k = 0; k < 3; ++k) marked.push_back(act[pick(rng)]);
      m = refine(m, marked);
      CHECK(brute_force_balanced(m));
      CHECK(is_balanced(m));
      check_constraints(m);
    }
  }
}

TEST_CASE("3D hanging nodes on faces and edges") {
  auto m = unit_box_mesh(3, 1);
  std::vector<ElementId> marked{active_at(m, 1, {0, 0, 0})};
  auto r = refine(m, marked);
  auto hcs = hanging_constraints(r);
  std::size_t faces = 0, edges = 0;
  for (const auto& hc : hcs) {
    if (hc.masters.size() == 4) {
      ++faces;
      CHECK(hc.weights == std::vector<double>{0.25, 0.25, 0.25, 0.25});
    } else {
      REQUIRE(hc.masters.size() == 2);
      ++edges;
      CHECK(hc.weights == std::vector<double>{0.5, 0.5});
    }
  }
  CHECK(faces == 3);
  CHECK(edges == 9);
  check_constraints(r);
  CHECK(hanging_fraction(r) == doctest::Approx(12.0 / r.active_nodes().size()));
  CHECK(hanging_fraction(r, true) == doctest::Approx(9.0 / r.active_nodes().size()));
}

TEST_CASE("uniform refinement counts") {
  auto hex = uniform_refine(unit_box_mesh(3, 0));
  CHECK(hex.n_active() == 8);
  CHECK(hex.active_nodes().size() == 27);
  for (Index n : {1, 2, 3}) {
    auto sq = structured_box_mesh(2, {n, n, 1}, {1.0, 1.0, 1.0});
    auto f = uniform_refine(sq);
    CHECK(f.n_active() == 4 * n * n);
    CHECK(static_cast<Index>(f.active_nodes().size()) == (2 * n + 1) * (2 * n + 1));
    for (NodeId c : sq.active_nodes()) {
      NodeId fn = f.find_node(sq.node_key(c));
      REQUIRE(fn >= 0);
      CHECK(f.coord(fn) == sq.coord(c));
    }
  }
  for (int n = 0; n <= 5; ++n) {
    CHECK(static_cast<Index>(unit_box_mesh(2, n).active_nodes().size()) == ((1 << n) + 1) * ((1 << n) + 1));
  }
  CHECK(unit_box_mesh(2, 7).active_nodes().size() == 16641);
  CHECK(unit_box_mesh(3, 2).active_nodes().size() == 125);
}

TEST_CASE("child nodes lie on the parent's multilinear image") {
  auto m = graded_tensor_mesh(4, 4, 4);
  auto fine = uniform_refine(m);
  for (ElementId e : fine.active_elements()) {
    const Element& el = fine.element(e);
    REQUIRE(el.parent >= 0);
    const Element& par = fine.element(el.parent);
    CHECK(par.first_child >= 0);
    for (int c = 0; c < 8; ++c) {
      const Index s = HierMesh::lattice_size(par.level);
      std::array<double, 3> xi{};
      for (int d = 0; d < 3; ++d)
        xi[d] = static_cast<double>(fine.node_key(el.nodes[c])[d] - par.cell[d] * s) / static_cast<double>(s);
      auto p = fine.map_to_physical(el.parent, xi);
      for (int d = 0; d < 3; ++d) CHECK(std::abs(p[d] - fine.coord(el.nodes[c])[d]) < 1e-15);
    }
  }
}

TEST_CASE("global coarsening") {
  auto single = unit_box_mesh(2, 0);
  auto once = uniform_refine(single);
  auto back = global_coarsen(once);
  CHECK(back.n_active() == 1);
  CHECK(global_coarsen(single).n_active() == 1);

  auto m = unit_box_mesh(2, 2);
  auto c = global_coarsen(m);
  CHECK(c.n_active() == 4);

  // Adaptive mesh: deepest groups go first.
  auto a = unit_box_mesh(2, 1);
  std::vector<ElementId> marked{active_at(a, 1, {0, 0, 0})};
  a = refine(a, marked);
  marked = {active_at(a, 2, {0, 0, 0})};
  a = refine(a, marked);
  auto ca = global_coarsen(a);
  CHECK(ca.max_active_level() < a.max_active_level());
  CHECK(is_balanced(ca));
}

TEST_CASE("hierarchy construction") {
  auto m = unit_box_mesh(2, 3);
  auto h = build_hierarchy(m, 1);
  CHECK(h.n_levels() == 4);
  CHECK(h.levels.front().n_active() == 1);
  CHECK(build_hierarchy(unit_box_mesh(2, 0), 1).n_levels() == 1);

  auto a = unit_box_mesh(3, 2);
  for (int step = 0; step < 3; ++step) {
    auto marked = mark_geometric(a, RefinePattern::edge, {1.0, 1.0, 0.0}, 0);
    a = refine(a, marked);
  }
  auto ha = build_hierarchy(a, 8);
  CHECK(ha.n_levels() >= 3);
  for (Index l = 1; l < ha.n_levels(); ++l) {
    const auto& coarse = ha.levels[l - 1];
    const auto& fine = ha.levels[l];
    CHECK(coarse.n_active() < fine.n_active());
    CHECK(is_balanced(coarse));
    CHECK(brute_force_balanced(coarse));
    check_constraints(coarse);
    for (ElementId e : coarse.active_elements()) {
      bool ok = fine.is_active(e);
      if (!ok) {
        ok = true;
        for (int k = 0; k < 8; ++k) ok = ok && fine.is_active(fine.child(e, k));
      }
      CHECK(ok);
    }
  }
  CHECK(ha.levels.front().n_active() <= 8);
}

TEST_CASE("geometric marking") {
  auto m = unit_box_mesh(3, 1);
  CHECK(mark_geometric(m, RefinePattern::vertex, {0, 0, 0}).size() == 1);
  CHECK(mark_geometric(m, RefinePattern::face, {0, 0, 0}).size() == 4);
  CHECK(mark_geometric(m, RefinePattern::edge, {0, 0, 0}).size() == 2);
  CHECK(parse_refine_pattern("edge") == RefinePattern::edge);
  CHECK(to_string(RefinePattern::vertex) == "vertex");
  CHECK_THROWS_AS(parse_refine_pattern("corner"), Error);
}

TEST_CASE("graded axes") {
  auto x = cosine_graded_axis(2);
  CHECK(x == std::vector<double>{0.0, 0.5, 1.0});
  auto x8 = cosine_graded_axis(8);
  for (Index i = 0; i <= 8; ++i)
    CHECK(x8[i] == doctest::Approx(0.5 * (1.0 - std::cos(i * std::numbers::pi / 8))).epsilon(1e-15));
  CHECK(std::is_sorted(x8.begin(), x8.end()));
  auto z = sine_graded_axis(16);
  CHECK(z.front() == 0.0);
  CHECK(z.back() == 2.0);
  CHECK(z[8] == 1.0);
  CHECK(std::is_sorted(z.begin(), z.end()));
  CHECK(z[1] - z[0] < z[8] - z[7]);

  auto g = graded_tensor_mesh(8, 8, 16);
  CHECK(g.n_active() == 8 * 8 * 16);
  CHECK(g.active_nodes().size() == 9 * 9 * 17);
  std::set<double> xs, zs;
  for (NodeId n : g.active_nodes()) xs.insert(g.coord(n)[0]), zs.insert(g.coord(n)[2]);
  CHECK(std::vector<double>(xs.begin(), xs.end()) == x8);
  CHECK(std::vector<double>(zs.begin(), zs.end()) == z);
  auto h = build_hierarchy(g, 64);
  CHECK(h.levels.front().n_active() <= 64);
}

TEST_CASE("mesh text round trip") {
  auto m = unit_box_mesh(2, 1);
  std::vector<ElementId> marked{active_at(m, 1, {0, 0, 0})};
  m = refine(m, marked);
  std::stringstream ss;
  write_mesh_text(m, ss);
  auto t = read_mesh_text(ss);
  CHECK(t.dim == 2);
  CHECK(t.nodes.size() == m.active_nodes().size());
  CHECK(static_cast<Index>(t.elements.size()) == m.n_active());
  CHECK(t.constraints.size() == 2);
  std::stringstream bad("mgfem-mesh 1\n2\nnodes x\n");
  CHECK_THROWS_AS(read_mesh_text(bad), Error);
}

}  // TEST_SUITE
