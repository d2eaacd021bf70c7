#include <cmath>
#include <memory>
#include <random>

#include "doctest.h"
#include "mgfem/error.hpp"
#include "mgfem/fem.hpp"

using namespace mgfem;

namespace {

std::shared_ptr<const HierMesh> share(HierMesh m) { return std::make_shared<const HierMesh>(std::move(m)); }

bool bit_symmetric(const CsrMatrix& a) { return csr_transpose(a) == a; }

// Three-point Gauss-Legendre on [lo,hi].
struct Line {
  std::array<double, 3> x, w;
};
Line gauss3(double lo, double hi) {
  const double h = hi - lo, m = 0.5 * (lo + hi), g = std::sqrt(0.6) * 0.5 * h;
  return {{m - g, m, m + g}, {5.0 / 18 * h, 8.0 / 18 * h, 5.0 / 18 * h}};
}

// Q1 basis on an axis-aligned box written directly in physical coordinates.
struct BoxBasis {
  int dim;
  Point lo, hi;
  double value(int c, const Point& x) const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) {
      const double t = (x[a] - lo[a]) / (hi[a] - lo[a]);
      v *= ((c >> a) & 1) ? t : 1.0 - t;
    }
    return v;
  }
  double deriv(int c, int d, const Point& x) const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) {
      const double t = (x[a] - lo[a]) / (hi[a] - lo[a]);
      if (a == d) v *= (((c >> a) & 1) ? 1.0 : -1.0) / (hi[a] - lo[a]);
      else v *= ((c >> a) & 1) ? t : 1.0 - t;
    }
    return v;
  }
};

template <class F>
double integrate_box(int dim, const Point& lo, const Point& hi, F&& f) {
  auto gx = gauss3(lo[0], hi[0]), gy = gauss3(lo[1], hi[1]), gz = gauss3(lo[2], hi[2]);
  double s = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (dim == 2) {
        s += gx.w[i] * gy.w[j] * f(Point{gx.x[i], gy.x[j], 0.0});
        continue;
      }
      for (int k = 0; k < 3; ++k) s += gx.w[i] * gy.w[j] * gz.w[k] * f(Point{gx.x[i], gy.x[j], gz.x[k]});
    }
  return s;
}

BoxBasis element_box(const FeSpace& s, Index k) {
  BoxBasis b{s.dim(), s.node_coord(s.element_nodes(k)[0]), s.node_coord(s.element_nodes(k)[s.mesh().n_corners() - 1])};
  return b;
}

// Dense oracle: sum over elements of integrate_box(kernel(basis, i, j, x)).
template <class K>
std::vector<double> dense_oracle(const FeSpace& s, K&& kernel) {
  const Index n = s.n_nodes();
  std::vector<double> a(n * n, 0.0);
  const int nc = s.mesh().n_corners();
  for (Index k = 0; k < static_cast<Index>(s.elements().size()); ++k) {
    auto b = element_box(s, k);
    auto nodes = s.element_nodes(k);
    for (int i = 0; i < nc; ++i)
      for (int j = 0; j < nc; ++j)
        a[nodes[i] * n + nodes[j]] +=
            integrate_box(s.dim(), b.lo, b.hi, [&](const Point& x) { return kernel(b, i, j, x); });
  }
  return a;
}

void check_matches(const CsrMatrix& m, const std::vector<double>& dense, double tol) {
  auto d = m.to_dense();
  REQUIRE(d.size() == dense.size());
  for (std::size_t k = 0; k < d.size(); ++k) CHECK(std::abs(d[k] - dense[k]) <= tol);
}

HierMesh adaptive_2d() {
  auto m = unit_box_mesh(2, 2);
  std::vector<ElementId> marked{m.find_cell(2, {1, 1, 0})};
  m = refine(m, marked);
  marked = {m.find_cell(3, {3, 3, 0})};
  return refine(m, marked);
}

HierMesh adaptive_3d() {
  auto m = unit_box_mesh(3, 1);
  for (int k = 0; k < 2; ++k) m = refine(m, mark_geometric(m, RefinePattern::edge, {1.0, 1.0, 0.0}));
  return m;
}

}  // namespace

TEST_SUITE("fem") {

TEST_CASE("quadrature rule") {
  auto r = QuadratureRule::gauss2(3);
  CHECK(r.points.size() == 8);
  double s = 0.0;
  for (double w : r.weights) {
    CHECK(w > 0.0);
    s += w;
  }
  CHECK(s == doctest::Approx(1.0));
  // x^3 y^2 integrates exactly.
  auto r2 = QuadratureRule::gauss2(2);
  double q = 0.0;
  for (std::size_t k = 0; k < r2.points.size(); ++k)
    q += r2.weights[k] * std::pow(r2.points[k][0], 3) * std::pow(r2.points[k][1], 3);
  CHECK(q == doctest::Approx(1.0 / 16.0).epsilon(1e-15));
}

TEST_CASE("mass matrices") {
  FeSpace one(share(unit_box_mesh(2, 0)), 1);
  auto m = assemble_mass(one);
  CHECK(m.consistent.at(0, 0) == doctest::Approx(1.0 / 9));
  CHECK(m.consistent.at(0, 1) == doctest::Approx(1.0 / 18));
  CHECK(m.consistent.at(0, 3) == doctest::Approx(1.0 / 36));
  double total = 0.0;
  for (double d : m.lumped.diagonal()) total += d;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-15));

  FeSpace s(share(unit_box_mesh(2, 2)), 1);
  auto ms = assemble_mass(s);
  auto lumped = ms.lumped.diagonal();
  const double h = 0.25;
  for (Index i = 0; i < s.n_nodes(); ++i)
    if (!s.on_boundary(i)) CHECK(lumped[i] == doctest::Approx(h * h).epsilon(1e-14));
  CHECK(bit_symmetric(ms.consistent));
  check_matches(ms.consistent, dense_oracle(s, [](const BoxBasis& b, int i, int j, const Point& x) {
                  return b.value(i, x) * b.value(j, x);
                }), 1e-14);
}

TEST_CASE("stiffness matrix") {
  FeSpace one(share(unit_box_mesh(2, 0)), 1);
  auto k = assemble_stiffness(one, 1.0);
  CHECK(k.at(0, 0) == doctest::Approx(2.0 / 3));
  CHECK(k.at(0, 1) == doctest::Approx(-1.0 / 6));
  CHECK(k.at(0, 3) == doctest::Approx(-1.0 / 3));

  for (auto mesh : {adaptive_2d(), graded_tensor_mesh(4, 4, 4), adaptive_3d()}) {
    FeSpace s(share(mesh), 1);
    auto a = assemble_stiffness(s, 0.3);
    CHECK(bit_symmetric(a));
    ReferenceBackend be;
    BlockVector ones(s.n_nodes(), 1, 1.0), out(s.n_nodes(), 1);
    be.spmv(1.0, a, ones, 0.0, out);
    CHECK(be.norm2(out) < 1e-13);
  }
  FeSpace s3(share(unit_box_mesh(3, 1)), 1);
  check_matches(assemble_stiffness(s3, 2.0), dense_oracle(s3, [](const BoxBasis& b, int i, int j, const Point& x) {
                  double g = 0.0;
                  for (int d = 0; d < 3; ++d) g += b.deriv(i, d, x) * b.deriv(j, d, x);
                  return 2.0 * g;
                }), 1e-14);
}

TEST_CASE("advection matrix") {
  FeSpace s(share(unit_box_mesh(2, 1)), 1);
  auto zero = assemble_advection(s, {0, 0, 0});
  for (double v : zero.values()) CHECK(v == 0.0);
  auto b = assemble_advection(s, {0.0, -1.0, 0.0});
  ReferenceBackend be;
  BlockVector ones(s.n_nodes(), 1, 1.0), out(s.n_nodes(), 1);
  be.spmv(1.0, b, ones, 0.0, out);
  CHECK(be.norm2(out) < 1e-15);
  check_matches(b, dense_oracle(s, [](const BoxBasis& bb, int i, int j, const Point& x) {
                  return -bb.deriv(j, 1, x) * bb.value(i, x);
                }), 1e-15);
}

TEST_CASE("convection matrices") {
  FeSpace one(share(unit_box_mesh(2, 0)), 1);
  auto cx = assemble_convection(one, 0);
  auto rowsum = [](const CsrMatrix& a, Index i) {
    double s = 0.0;
    for (Index k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) s += a.values()[k];
    return s;
  };
  CHECK(rowsum(cx, 1) == doctest::Approx(0.5));
  CHECK(rowsum(cx, 3) == doctest::Approx(0.5));
  CHECK(rowsum(cx, 0) == doctest::Approx(-0.5));
  check_matches(cx, dense_oracle(one, [](const BoxBasis& b, int i, int j, const Point& x) {
                  return b.value(j, x) * b.deriv(i, 0, x);
                }), 1e-15);
  FeSpace s3(share(unit_box_mesh(3, 0)), 1);
  for (int d = 0; d < 3; ++d)
    check_matches(assemble_convection(s3, d), dense_oracle(s3, [d](const BoxBasis& b, int i, int j, const Point& x) {
                    return b.value(j, x) * b.deriv(i, d, x);
                  }), 1e-15);

  FeSpace g(share(graded_tensor_mesh(4, 4, 8)), 1);
  for (int d = 0; d < 3; ++d) {
    auto c = assemble_convection(g, d);
    for (Index i = 0; i < g.n_nodes(); ++i)
      if (!g.on_boundary(i)) CHECK(std::abs(rowsum(c, i)) < 1e-13);
  }
  CHECK_THROWS_AS(assemble_convection(one, 2), DimensionError);
}

TEST_CASE("elasticity operator") {
  FeSpace cube(share(unit_box_mesh(3, 0)), 3);
  auto k = assemble_elasticity(cube, 8e4, 2e4);
  CHECK(bit_symmetric(k));
  ReferenceBackend be;
  for (auto mesh : {unit_box_mesh(3, 0), graded_tensor_mesh(2, 2, 4), adaptive_3d()}) {
    FeSpace s(share(mesh), 3);
    auto a = assemble_elasticity(s, 8e4, 2e4);
    CHECK(bit_symmetric(a));
    double scale = 0.0;
    for (double v : a.values()) scale = std::max(scale, std::abs(v));
    std::vector<ExactFunction> rigid{
        [](double, const Point&) { return std::vector<double>{1, 0, 0}; },
        [](double, const Point&) { return std::vector<double>{0, 0, 1}; },
        [](double, const Point& x) { return std::vector<double>{-x[1], x[0], 0}; },
        [](double, const Point& x) { return std::vector<double>{0, -x[2], x[1]}; },
        [](double, const Point& x) { return std::vector<double>{x[2], 0, -x[0]}; }};
    for (auto& f : rigid) {
      auto u = interpolate(s, f, 0.0);
      BlockVector out(s.n_nodes(), 3);
      be.spmv(1.0, a, u, 0.0, out);
      for (Index q = 0; q < out.size(); ++q) CHECK(std::abs(out[q]) < 1e-12 * scale);
    }
  }
  // Single cube against the oracle.
  const double lam = 3.0, mu = 2.0;
  auto oracle_c = [&](int c, int d) {
    return dense_oracle(FeSpace(share(unit_box_mesh(3, 0)), 1), [&](const BoxBasis& b, int i, int j, const Point& x) {
      double s = lam * b.deriv(j, d, x) * b.deriv(i, c, x) + mu * b.deriv(j, c, x) * b.deriv(i, d, x);
      if (c == d)
        for (int e = 0; e < 3; ++e) s += mu * b.deriv(j, e, x) * b.deriv(i, e, x);
      return s;
    });
  };
  auto ke = assemble_elasticity(cube, lam, mu);
  for (int c = 0; c < 3; ++c)
    for (int d = 0; d < 3; ++d) {
      auto o = oracle_c(c, d);
      for (Index i = 0; i < 8; ++i)
        for (Index j = 0; j < 8; ++j) CHECK(std::abs(ke.at(i * 3 + c, j * 3 + d) - o[i * 8 + j]) < 1e-14);
    }
  FeSpace scalar(share(unit_box_mesh(3, 0)), 1);
  CHECK_THROWS_AS(assemble_elasticity(scalar, 1, 1), DimensionError);
}

TEST_CASE("gradient coupling") {
  auto coarse_mesh = unit_box_mesh(3, 0);
  FeSpace pres(share(coarse_mesh), 1);
  FeSpace vel(share(uniform_refine(coarse_mesh)), 1);
  for (int c = 0; c < 3; ++c) {
    auto g = assemble_gradient_coupling(vel, pres, c);
    CHECK(g.n_rows() == 27);
    CHECK(g.n_cols() == 8);
    // Oracle: coarse basis on the unit cube, fine basis per fine element.
    BoxBasis coarse{3, {0, 0, 0}, {1, 1, 1}};
    std::vector<double> o(27 * 8, 0.0);
    for (Index k = 0; k < 8; ++k) {
      auto b = element_box(vel, k);
      auto nodes = vel.element_nodes(k);
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
          o[nodes[i] * 8 + pres.local_index(coarse_mesh.element(0).nodes[j])] += integrate_box(
              3, b.lo, b.hi, [&](const Point& x) { return coarse.value(j, x) * b.deriv(i, c, x); });
    }
    check_matches(g, o, 1e-15);
  }
  auto cm = unit_box_mesh(3, 1);
  FeSpace p2(share(cm), 1);
  FeSpace v2(share(uniform_refine(cm)), 1);
  ReferenceBackend be;
  for (int c = 0; c < 3; ++c) {
    auto g = assemble_gradient_coupling(v2, p2, c);
    BlockVector one_p(p2.n_nodes(), 1, 1.0), gp(v2.n_nodes(), 1);
    be.spmv(1.0, g, one_p, 0.0, gp);
    for (Index i = 0; i < v2.n_nodes(); ++i)
      if (!v2.on_boundary(i)) CHECK(std::abs(gp[i]) < 1e-13);
    auto d = csr_transpose(g);
    BlockVector one_v(v2.n_nodes(), 1, 1.0), du(p2.n_nodes(), 1);
    be.spmv(1.0, d, one_v, 0.0, du);
    for (Index j = 0; j < p2.n_nodes(); ++j)
      if (!p2.on_boundary(j)) CHECK(std::abs(du[j]) < 1e-13);
  }
  CHECK_THROWS_AS(assemble_gradient_coupling(p2, p2, 0), DimensionError);
  FeSpace hang(share(adaptive_3d()), 1);
  FeSpace hang_fine(share(uniform_refine(adaptive_3d())), 1);
  CHECK_THROWS_AS(assemble_gradient_coupling(hang_fine, hang, 0), UnsupportedError);
}

TEST_CASE("node injection") {
  auto cm = unit_box_mesh(3, 1);
  FeSpace p(share(cm), 1);
  FeSpace v(share(uniform_refine(cm)), 1);
  auto map = node_injection(p, v);
  REQUIRE(static_cast<Index>(map.size()) == p.n_nodes());
  for (Index i = 0; i < p.n_nodes(); ++i) CHECK(v.node_coord(map[i]) == p.node_coord(i));
}

TEST_CASE("prolongation") {
  auto cm = unit_box_mesh(2, 1);
  FeSpace c(share(cm), 1);
  FeSpace f(share(uniform_refine(cm)), 1);
  auto t = build_prolongation(c, f);
  CHECK(t.restriction == csr_transpose(t.prolongation));
  auto& p = t.prolongation;
  for (Index i = 0; i < f.n_nodes(); ++i) {
    const Index n = p.row_ptr()[i + 1] - p.row_ptr()[i];
    const auto x = f.node_coord(i);
    const bool odd_x = std::abs(x[0] * 4 - std::round(x[0] * 4)) < 1e-12 && (static_cast<int>(std::round(x[0] * 4)) % 2);
    const bool odd_y = std::abs(x[1] * 4 - std::round(x[1] * 4)) < 1e-12 && (static_cast<int>(std::round(x[1] * 4)) % 2);
    const Index expect = (odd_x ? 2 : 1) * (odd_y ? 2 : 1);
    CHECK(n == expect);
    for (Index k = p.row_ptr()[i]; k < p.row_ptr()[i + 1]; ++k) CHECK(p.values()[k] == 1.0 / static_cast<double>(expect));
  }

  std::vector<std::pair<HierMesh, HierMesh>> pairs;
  {
    auto a2 = adaptive_2d();
    auto h2 = build_hierarchy(a2, 1);
    for (Index l = 1; l < h2.n_levels(); ++l) pairs.push_back({h2.levels[l - 1], h2.levels[l]});
    auto a3 = adaptive_3d();
    auto h3 = build_hierarchy(a3, 1);
    for (Index l = 1; l < h3.n_levels(); ++l) pairs.push_back({h3.levels[l - 1], h3.levels[l]});
  }
  REQUIRE(pairs.size() >= 4);
  ReferenceBackend be;
  for (auto& [cmesh, fmesh] : pairs) {
    FeSpace cs(share(cmesh), 1), fs(share(fmesh), 1);
    auto tp = build_prolongation(cs, fs);
    CHECK(tp.restriction == csr_transpose(tp.prolongation));
    auto& pp = tp.prolongation;
    for (Index i = 0; i < fs.n_nodes(); ++i) {
      const Index n = pp.row_ptr()[i + 1] - pp.row_ptr()[i];
      CHECK(n >= 1);
      double s = 0.0;
      for (Index k = pp.row_ptr()[i]; k < pp.row_ptr()[i + 1]; ++k) s += pp.values()[k];
      CHECK(std::abs(s - 1.0) < 1e-15);
    }
    // Linear functions are reproduced exactly.
    ExactFunction lin = [](double, const Point& x) { return std::vector<double>{1.0 + 2.0 * x[0] - x[1] + 0.5 * x[2]}; };
    auto uc = interpolate(cs, lin, 0.0);
    BlockVector uf(fs.n_nodes(), 1);
    be.spmv(1.0, pp, uc, 0.0, uf);
    auto ref = interpolate(fs, lin, 0.0);
    for (Index i = 0; i < fs.n_nodes(); ++i) CHECK(std::abs(uf[i] - ref[i]) < 1e-14);
    // Coarse hanging nodes carry no weight.
    auto pt = csr_transpose(pp);
    for (Index j = 0; j < cs.n_nodes(); ++j)
      if (cs.is_hanging(j)) CHECK(pt.row_ptr()[j + 1] == pt.row_ptr()[j]);
  }
}

TEST_CASE("hanging matrix") {
  FeSpace plain(share(unit_box_mesh(2, 2)), 1);
  CHECK(build_hanging_matrix(plain) == CsrMatrix::identity(plain.n_nodes()));
  ReferenceBackend be;
  for (auto mesh : {adaptive_2d(), adaptive_3d()}) {
    FeSpace s(share(mesh), 1);
    REQUIRE_FALSE(s.hanging().empty());
    auto h = build_hanging_matrix(s);
    for (const auto& hc : s.hanging()) CHECK(h.at(hc.hanging, hc.hanging) == 0.0);
    auto dh = DenseMatrix::from_csr(h);
    const Index n = s.n_nodes();
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) {
        double hh = 0.0;
        for (Index k = 0; k < n; ++k) hh += dh(i, k) * dh(k, j);
        CHECK(hh == doctest::Approx(dh(i, j)).epsilon(1e-15));
      }
    BlockVector one(n, 1, 1.0), out(n, 1);
    be.spmv(1.0, h, one, 0.0, out);
    for (Index i = 0; i < n; ++i) CHECK(out[i] == doctest::Approx(1.0).epsilon(1e-15));
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> u(-1, 1);
    BlockVector x(n, 1);
    for (Index i = 0; i < n; ++i) x[i] = u(rng);
    be.spmv(1.0, h, x, 0.0, out);
    for (const auto& hc : s.hanging()) {
      double v = 0.0;
      for (std::size_t m = 0; m < hc.masters.size(); ++m) v += hc.weights[m] * x[hc.masters[m]];
      CHECK(out[hc.hanging] == doctest::Approx(v).epsilon(1e-15));
    }
  }
}

TEST_CASE("constrain_system") {
  auto h = CsrMatrix::from_triplets(3, 3, {{0, 0, 1.0}, {1, 1, 1.0}, {2, 0, 0.5}, {2, 1, 0.5}});
  auto a = constrain_system(CsrMatrix::identity(3), h);
  std::vector<double> expect{1.25, 0.25, 0, 0.25, 1.25, 0, 0, 0, 1};
  check_matches(a, expect, 0.0);
  auto same = CsrMatrix::from_dense(2, 2, {2, 1, 1, 3});
  CHECK(constrain_system(same, CsrMatrix::identity(2)) == same);
  CHECK_THROWS_AS(constrain_system(same, CsrMatrix::identity(3)), DimensionError);

  for (auto mesh : {adaptive_2d(), adaptive_3d()}) {
    FeSpace s(share(mesh), 1);
    auto hs = build_hanging_matrix(s);
    auto k = assemble_stiffness(s, 1.0);
    auto m = assemble_mass(s).consistent;
    for (auto* op : {&k, &m}) {
      auto c = constrain_system(*op, hs);
      CHECK(bit_symmetric(c));
      for (const auto& hc : s.hanging()) {
        CHECK(c.at(hc.hanging, hc.hanging) == 1.0);
        CHECK(c.row_ptr()[hc.hanging + 1] - c.row_ptr()[hc.hanging] == 1);
      }
      // Matches H^T A H on regular rows via a dense product.
      auto dh = DenseMatrix::from_csr(hs), da = DenseMatrix::from_csr(*op);
      const Index n = s.n_nodes();
      for (Index i = 0; i < n; ++i) {
        if (s.is_hanging(i)) continue;
        for (Index j = 0; j < n; ++j) {
          if (s.is_hanging(j)) continue;
          double v = 0.0;
          for (Index p = 0; p < n; ++p)
            for (Index q = 0; q < n; ++q) v += dh(p, i) * da(p, q) * dh(q, j);
          CHECK(std::abs(c.at(i, j) - v) < 1e-13);
        }
      }
    }
  }
}

TEST_CASE("dirichlet elimination") {
  auto a = CsrMatrix::from_dense(2, 2, {2, 1, 1, 2});
  std::vector<char> mask{0, 1};
  std::vector<double> values{0.0, 3.0};
  auto sys = eliminate_dirichlet(a, mask);
  check_matches(sys.matrix, {2, 0, 0, 1}, 0.0);
  ReferenceBackend be;
  BlockVector b(2, 1, {5.0, 9.0});
  lift_dirichlet_rhs(sys, mask, values, b, be);
  CHECK(b == BlockVector(2, 1, {2.0, 3.0}));

  std::vector<char> none{0, 0};
  auto id = eliminate_dirichlet(a, none);
  CHECK(id.matrix == a);

  FeSpace s(share(unit_box_mesh(2, 2)), 1);
  s.set_boundary_dirichlet([](const Point& x) { return std::vector<double>{x[0] + x[1]}; });
  CHECK(s.n_dirichlet() == 16);
  auto k = assemble_stiffness(s, 1.0);
  auto [ad, bd] = apply_dirichlet(k, BlockVector(s.n_nodes(), 1), s);
  CHECK(bit_symmetric(ad));
  auto x = dense_lu_solve(DenseMatrix::from_csr(ad), std::vector<double>(bd.data().begin(), bd.data().end()));
  for (Index i = 0; i < s.n_nodes(); ++i) {
    const auto p = s.node_coord(i);
    CHECK(std::abs(x[i] - (p[0] + p[1])) < 1e-13);
  }

  FeSpace hs(share(adaptive_2d()), 1);
  CHECK_THROWS_AS(hs.set_dirichlet(hs.hanging()[0].hanging, 0, 1.0), Error);
}

TEST_CASE("l2 error") {
  FeSpace s(share(unit_box_mesh(2, 3)), 1);
  ExactFunction bilinear = [](double, const Point& x) { return std::vector<double>{1.0 + x[0] * x[1] - 2.0 * x[1]}; };
  CHECK(l2_error(s, interpolate(s, bilinear, 0.0), bilinear, 0.0) < 1e-13);
  BlockVector zero(s.n_nodes(), 1);
  CHECK(l2_error(s, zero, [](double, const Point&) { return std::vector<double>{1.0}; }, 0.0) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(l2_error(s, zero, [](double, const Point& x) { return std::vector<double>{x[0]}; }, 0.0) ==
        doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
}

TEST_CASE("degenerate element is reported") {
  auto m = unit_box_mesh(2, 0);
  m.set_coord(m.element(0).nodes[3], {-1.0, -1.0, 0.0});
  FeSpace s(share(m), 1);
  CHECK_THROWS_AS(assemble_mass(s), NumericalError);
  try {
    assemble_stiffness(s, 1.0);
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("element 0") != std::string::npos);
  }
}

}  // TEST_SUITE
