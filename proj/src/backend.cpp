#include "mgfem/backend.hpp"

#include <cmath>
#include <string>

namespace mgfem {
namespace {

void require_finite(const BlockVector& x, const char* what) {
  if (!x.all_finite()) throw NonFiniteError(std::string(what) + ": non-finite input");
}

void require_same_length(const BlockVector& x, const BlockVector& y, const char* what) {
  if (x.size() != y.size()) throw DimensionError(std::string(what) + ": length mismatch");
}

// Checks operand shapes for y <- op(A) x. `rows`/`cols` are those of op(A).
void check_spmv_shapes(Index rows, Index cols, const BlockVector& x, const BlockVector& y,
                       Layout layout, const char* what) {
  bool ok = false;
  if (layout == Layout::flat)
    ok = cols == x.size() && rows == y.size();
  else
    ok = cols == x.n_nodes() && rows == y.n_nodes() && x.n_comp() == y.n_comp();
  if (!ok) throw DimensionError(std::string(what) + ": operand dimensions do not conform");
}

}  // namespace

void ReferenceBackend::spmv(double alpha, const CsrMatrix& a, const BlockVector& x,
                            double beta, BlockVector& y, Layout layout) const {
  check_spmv_shapes(a.n_rows(), a.n_cols(), x, y, layout, "spmv");
  require_finite(x, "spmv");
  if (beta != 0.0) require_finite(y, "spmv");
  auto rp = a.row_ptr();
  auto ci = a.col_idx();
  auto v = a.values();
  const Index nc = layout == Layout::flat ? 1 : x.n_comp();
  auto xd = x.data();
  auto yd = y.data();
  for (Index i = 0; i < a.n_rows(); ++i) {
    for (Index c = 0; c < nc; ++c) {
      double s = 0.0;
      for (Index k = rp[i]; k < rp[i + 1]; ++k) s += v[k] * xd[ci[k] * nc + c];
      double& out = yd[i * nc + c];
      out = beta == 0.0 ? alpha * s : alpha * s + beta * out;
    }
  }
}

void ReferenceBackend::spmv_transpose(double alpha, const CsrMatrix& a, const BlockVector& x,
                                      double beta, BlockVector& y, Layout layout) const {
  check_spmv_shapes(a.n_cols(), a.n_rows(), x, y, layout, "spmv_transpose");
  require_finite(x, "spmv_transpose");
  if (beta != 0.0) require_finite(y, "spmv_transpose");
  auto rp = a.row_ptr();
  auto ci = a.col_idx();
  auto v = a.values();
  const Index nc = layout == Layout::flat ? 1 : x.n_comp();
  auto xd = x.data();
  auto yd = y.data();
  if (beta == 0.0)
    for (double& e : yd) e = 0.0;
  else if (beta != 1.0)
    for (double& e : yd) e *= beta;
  for (Index i = 0; i < a.n_rows(); ++i)
    for (Index c = 0; c < nc; ++c) {
      const double xi = alpha * xd[i * nc + c];
      for (Index k = rp[i]; k < rp[i + 1]; ++k) yd[ci[k] * nc + c] += v[k] * xi;
    }
}

double ReferenceBackend::dot(const BlockVector& x, const BlockVector& y) const {
  require_same_length(x, y, "dot");
  auto xd = x.data();
  auto yd = y.data();
  double s = 0.0;
  for (std::size_t k = 0; k < xd.size(); ++k) s += xd[k] * yd[k];
  return s;
}

void ReferenceBackend::axpy(double alpha, const BlockVector& x, BlockVector& y) const {
  require_same_length(x, y, "axpy");
  require_finite(x, "axpy");
  if (alpha == 0.0) return;
  auto xd = x.data();
  auto yd = y.data();
  for (std::size_t k = 0; k < xd.size(); ++k) yd[k] += alpha * xd[k];
}

void ReferenceBackend::scale(double alpha, BlockVector& x) const {
  for (double& e : x.data()) e *= alpha;
}

double ReferenceBackend::norm2(const BlockVector& x) const {
  return std::sqrt(dot(x, x));
}

void ReferenceBackend::copy(const BlockVector& src, BlockVector& dst) const {
  if (dst.n_nodes() != src.n_nodes() || dst.n_comp() != src.n_comp()) dst = src;
  else std::copy(src.data().begin(), src.data().end(), dst.data().begin());
}

void ReferenceBackend::set_zero(BlockVector& x) const {
  for (double& e : x.data()) e = 0.0;
}

void ReferenceBackend::diag_apply(const DiagOperator& d, const BlockVector& x,
                                  BlockVector& out) const {
  if (d.size() != x.size() || out.size() != x.size())
    throw DimensionError("diag_apply: length mismatch");
  auto inv = d.inv_values();
  auto xd = x.data();
  auto od = out.data();
  for (std::size_t k = 0; k < xd.size(); ++k) od[k] = inv[k] * xd[k];
}

void ReferenceBackend::diag_apply_nodal(const DiagOperator& d, const BlockVector& x,
                                        BlockVector& out) const {
  if (d.size() != x.n_nodes() || out.size() != x.size())
    throw DimensionError("diag_apply_nodal: length mismatch");
  auto inv = d.inv_values();
  const Index nc = x.n_comp();
  auto xd = x.data();
  auto od = out.data();
  for (Index i = 0; i < x.n_nodes(); ++i)
    for (Index c = 0; c < nc; ++c) od[i * nc + c] = inv[i] * xd[i * nc + c];
}

void ReferenceBackend::nodewise_products(const BlockVector& u,
                                         std::array<BlockVector, 3>& v) const {
  if (u.n_comp() != 3) throw DimensionError("nodewise_products: expected 3 components");
  for (auto& vd : v)
    if (vd.n_nodes() != u.n_nodes() || vd.n_comp() != 3) vd = BlockVector(u.n_nodes(), 3);
  for (Index i = 0; i < u.n_nodes(); ++i)
    for (Index d = 0; d < 3; ++d)
      for (Index c = 0; c < 3; ++c) v[d](i, c) = u(i, d) * u(i, c);
}

void ReferenceBackend::space_scatter(const BlockVector& p, std::span<const Index> map,
                                     BlockVector& out) const {
  if (static_cast<Index>(map.size()) != p.n_nodes() || out.n_comp() != p.n_comp())
    throw DimensionError("space_scatter: map/vector mismatch");
  set_zero(out);
  const Index nc = p.n_comp();
  for (Index k = 0; k < p.n_nodes(); ++k) {
    if (map[k] < 0 || map[k] >= out.n_nodes()) throw DimensionError("space_scatter: map out of range");
    for (Index c = 0; c < nc; ++c) out(map[k], c) = p(k, c);
  }
}

void ReferenceBackend::space_gather(const BlockVector& v, std::span<const Index> map,
                                    BlockVector& p) const {
  if (static_cast<Index>(map.size()) != p.n_nodes() || v.n_comp() != p.n_comp())
    throw DimensionError("space_gather: map/vector mismatch");
  const Index nc = p.n_comp();
  for (Index k = 0; k < p.n_nodes(); ++k) {
    if (map[k] < 0 || map[k] >= v.n_nodes()) throw DimensionError("space_gather: map out of range");
    for (Index c = 0; c < nc; ++c) p(k, c) = v(map[k], c);
  }
}

std::vector<std::string> available_backends() { return {"reference"}; }

std::unique_ptr<Backend> make_backend(std::string_view name) {
  if (name == "reference") return std::make_unique<ReferenceBackend>();
  throw UnsupportedError("unknown backend '" + std::string(name) + "'");
}

}  // namespace mgfem
