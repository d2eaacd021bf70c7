#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "mgfem/backend.hpp"
#include "mgfem/error.hpp"

using namespace mgfem;

namespace {

BlockVector vec(std::vector<double> v) {
  Index n = static_cast<Index>(v.size());
  return BlockVector(n, 1, std::move(v));
}

}  // namespace

TEST_SUITE("backend") {

TEST_CASE("spmv examples") {
  ReferenceBackend be;
  BlockVector y(2, 1);
  be.spmv(1.0, CsrMatrix::identity(2), vec({3, 4}), 0.0, y);
  CHECK(y == vec({3, 4}));
  auto a = CsrMatrix::from_dense(2, 2, {1, 2, 0, 3});
  be.spmv(1.0, a, vec({1, 1}), 0.0, y);
  CHECK(y == vec({3, 3}));
  y = vec({1, 1});
  be.spmv(1.0, a, vec({1, 1}), 1.0, y);
  CHECK(y == vec({4, 4}));
  be.spmv_transpose(1.0, a, vec({1, 1}), 0.0, y);
  CHECK(y == vec({1, 5}));
  auto p = CsrMatrix::from_dense(3, 2, {1, 0, 0.5, 0.5, 0, 1});
  be.spmv_transpose(1.0, p, vec({1, 1, 1}), 0.0, y);
  CHECK(y == vec({1.5, 1.5}));
}

TEST_CASE("spmv ignores y when beta is zero and rejects non-finite input") {
  ReferenceBackend be;
  BlockVector y = vec({std::nan(""), 1.0});
  be.spmv(1.0, CsrMatrix::identity(2), vec({1, 2}), 0.0, y);
  CHECK(y == vec({1, 2}));
  CHECK_THROWS_AS(be.spmv(1.0, CsrMatrix::identity(2), vec({1, std::numeric_limits<double>::infinity()}), 0.0, y),
                  NonFiniteError);
  BlockVector bad(3, 1);
  CHECK_THROWS_AS(be.spmv(1.0, CsrMatrix::identity(2), vec({1, 2}), 0.0, bad), DimensionError);
}

TEST_CASE("per-component layout applies a scalar matrix to each component") {
  ReferenceBackend be;
  auto a = CsrMatrix::from_dense(2, 2, {1, 2, 0, 3});
  BlockVector x(2, 2, {1, 10, 1, 10});
  BlockVector y(2, 2);
  be.spmv(1.0, a, x, 0.0, y, Layout::per_component);
  CHECK(y == BlockVector(2, 2, {3, 30, 3, 30}));
  be.spmv_transpose(1.0, a, x, 0.0, y, Layout::per_component);
  CHECK(y == BlockVector(2, 2, {1, 10, 5, 50}));
}

TEST_CASE("conformance against a dense oracle on random matrices") {
  ReferenceBackend be;
  std::mt19937 rng(42);
  std::uniform_int_distribution<int> dim(1, 50);
  std::uniform_real_distribution<double> u(0.0, 1.0), v(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Index m = dim(rng), n = dim(rng);
    const double density = 0.3 * u(rng);
    std::vector<double> dense(m * n, 0.0);
    for (auto& d : dense)
      if (u(rng) < density) d = v(rng);
    auto a = CsrMatrix::from_dense(m, n, dense);
    BlockVector x(n, 1), xt(m, 1), y(m, 1), yt(n, 1);
    for (Index j = 0; j < n; ++j) x[j] = v(rng);
    for (Index i = 0; i < m; ++i) xt[i] = v(rng), y[i] = v(rng);
    BlockVector y0 = y;
    be.spmv(2.0, a, x, -0.5, y);
    be.spmv_transpose(1.0, a, xt, 0.0, yt);
    for (Index i = 0; i < m; ++i) {
      double s = 0.0, scale = 0.0;
      for (Index j = 0; j < n; ++j) s += dense[i * n + j] * x[j], scale += std::abs(dense[i * n + j] * x[j]);
      double ref = 2.0 * s - 0.5 * y0[i];
      CHECK(std::abs(y[i] - ref) <= 1e-13 * (2.0 * scale + std::abs(y0[i]) + 1e-300));
    }
    for (Index j = 0; j < n; ++j) {
      double s = 0.0, scale = 0.0;
      for (Index i = 0; i < m; ++i) s += dense[i * n + j] * xt[i], scale += std::abs(dense[i * n + j] * xt[i]);
      CHECK(std::abs(yt[j] - s) <= 1e-13 * (scale + 1e-300));
    }
  }
}

TEST_CASE("blas1") {
  ReferenceBackend be;
  CHECK(be.dot(vec({1, 2}), vec({3, 4})) == 11.0);
  CHECK(be.norm2(vec({3, 4})) == 5.0);
  BlockVector y = vec({1, 2});
  be.axpy(0.0, vec({5, 5}), y);
  CHECK(y == vec({1, 2}));
  be.axpy(2.0, vec({1, 1}), y);
  CHECK(y == vec({3, 4}));
  be.scale(0.5, y);
  CHECK(y == vec({1.5, 2}));
  BlockVector z(2, 1);
  be.copy(y, z);
  CHECK(z == y);
  be.set_zero(z);
  CHECK(z == vec({0, 0}));

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> v(-1.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    BlockVector a(17, 1), b(17, 1), c(17, 1);
    for (Index k = 0; k < 17; ++k) a[k] = v(rng), b[k] = v(rng), c[k] = v(rng);
    CHECK(be.dot(a, b) == doctest::Approx(be.dot(b, a)).epsilon(1e-13));
    BlockVector ab = a;
    be.scale(3.0, ab);
    be.axpy(-2.0, b, ab);
    CHECK(std::abs(be.dot(ab, c) - (3.0 * be.dot(a, c) - 2.0 * be.dot(b, c))) < 1e-13 * 20);
  }
}

TEST_CASE("diag_apply") {
  ReferenceBackend be;
  auto d = DiagOperator::from_inverse({0.5, 0.25});
  BlockVector out(2, 1);
  be.diag_apply(d, vec({2, 4}), out);
  CHECK(out == vec({1, 1}));
  be.diag_apply(DiagOperator::from_inverse({1.0, 1.0}), vec({2, 4}), out);
  CHECK(out == vec({2, 4}));
  be.diag_apply(d, vec({0, 0}), out);
  CHECK(out == vec({0, 0}));

  std::mt19937 rng(5);
  std::uniform_real_distribution<double> v(0.5, 2.0);
  std::vector<double> diag(10);
  std::vector<Triplet> t;
  for (Index i = 0; i < 10; ++i) diag[i] = v(rng), t.push_back({i, i, 1.0 / diag[i]});
  auto dinv_csr = CsrMatrix::from_triplets(10, 10, t);
  auto op = DiagOperator::from_diagonal(diag);
  BlockVector x(10, 1), tmp(10, 1), back(10, 1);
  for (Index i = 0; i < 10; ++i) x[i] = v(rng);
  be.spmv(1.0, dinv_csr, x, 0.0, tmp);
  be.diag_apply(DiagOperator::from_inverse(diag), tmp, back);
  for (Index i = 0; i < 10; ++i) CHECK(std::abs(back[i] - x[i]) < 1e-14);

  BlockVector u(2, 3, {1, 2, 3, 4, 5, 6}), o(2, 3);
  be.diag_apply_nodal(d, u, o);
  CHECK(o == BlockVector(2, 3, {0.5, 1, 1.5, 1, 1.25, 1.5}));
}

TEST_CASE("nodewise products") {
  ReferenceBackend be;
  std::array<BlockVector, 3> v;
  be.nodewise_products(BlockVector(1, 3, {1, 2, 3}), v);
  CHECK(v[0] == BlockVector(1, 3, {1, 2, 3}));
  CHECK(v[1] == BlockVector(1, 3, {2, 4, 6}));
  CHECK(v[2] == BlockVector(1, 3, {3, 6, 9}));
  be.nodewise_products(BlockVector(1, 3, {0, 1, 0}), v);
  CHECK(v[0] == BlockVector(1, 3, {0, 0, 0}));
  CHECK(v[1] == BlockVector(1, 3, {0, 1, 0}));
  CHECK(v[2] == BlockVector(1, 3, {0, 0, 0}));
  be.nodewise_products(BlockVector(2, 3), v);
  CHECK(v[1] == BlockVector(2, 3));

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> r(-1.0, 1.0);
  BlockVector u(9, 3);
  for (Index k = 0; k < u.size(); ++k) u[k] = r(rng);
  be.nodewise_products(u, v);
  for (Index i = 0; i < 9; ++i)
    for (int d = 0; d < 3; ++d)
      for (int e = 0; e < 3; ++e) CHECK(v[d](i, e) == v[e](i, d));
}

TEST_CASE("space scatter and gather") {
  ReferenceBackend be;
  std::vector<Index> id{0, 1}, map{0, 2};
  BlockVector p = vec({5, 7}), out(2, 1), big(3, 1), back(2, 1);
  be.space_scatter(p, id, out);
  CHECK(out == p);
  be.space_scatter(p, map, big);
  CHECK(big == vec({5, 0, 7}));
  be.space_gather(big, map, back);
  CHECK(back == p);
}

TEST_CASE("backend registry") {
  CHECK(available_backends() == std::vector<std::string>{"reference"});
  CHECK(make_backend("reference")->name() == "reference");
  CHECK_THROWS_AS(make_backend("cuda"), UnsupportedError);
}

}  // TEST_SUITE
