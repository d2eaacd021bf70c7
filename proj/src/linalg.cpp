#include "mgfem/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>

namespace mgfem {

CsrMatrix::CsrMatrix(Index n_rows, Index n_cols, std::vector<Index> row_ptr,
                     std::vector<Index> col_idx, std::vector<double> values)
    : n_rows_(n_rows), n_cols_(n_cols), row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)), values_(std::move(values)) {
  if (n_rows_ < 0 || n_cols_ < 0)
    throw DimensionError("CsrMatrix: negative dimension");
  if (static_cast<Index>(row_ptr_.size()) != n_rows_ + 1)
    throw DimensionError("CsrMatrix: row_ptr must have n_rows + 1 entries");
  if (row_ptr_.front() != 0)
    throw DimensionError("CsrMatrix: row_ptr[0] must be 0");
  if (col_idx_.size() != values_.size() ||
      row_ptr_.back() != static_cast<Index>(col_idx_.size()))
    throw DimensionError("CsrMatrix: row_ptr[n_rows], col_idx and values disagree");
  for (Index i = 0; i < n_rows_; ++i) {
    if (row_ptr_[i + 1] < row_ptr_[i])
      throw DimensionError("CsrMatrix: row_ptr decreases at row " + std::to_string(i));
    for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      if (col_idx_[k] < 0 || col_idx_[k] >= n_cols_)
        throw DimensionError("CsrMatrix: column index out of range in row " +
                             std::to_string(i));
      if (k > row_ptr_[i] && col_idx_[k] <= col_idx_[k - 1])
        throw DimensionError("CsrMatrix: columns not strictly increasing in row " +
                             std::to_string(i));
    }
  }
}

CsrMatrix CsrMatrix::identity(Index n) {
  std::vector<Index> rp(n + 1), ci(n);
  std::iota(rp.begin(), rp.end(), Index{0});
  std::iota(ci.begin(), ci.end(), Index{0});
  return CsrMatrix(n, n, std::move(rp), std::move(ci), std::vector<double>(n, 1.0));
}

CsrMatrix CsrMatrix::zero(Index n_rows, Index n_cols) {
  return CsrMatrix(n_rows, n_cols, std::vector<Index>(n_rows + 1, 0), {}, {});
}

CsrMatrix CsrMatrix::from_triplets(Index n_rows, Index n_cols, std::vector<Triplet> entries) {
  for (const auto& t : entries)
    if (t.row < 0 || t.row >= n_rows || t.col < 0 || t.col >= n_cols)
      throw DimensionError("CsrMatrix::from_triplets: entry out of range");
  std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<Index> rp(n_rows + 1, 0), ci;
  std::vector<double> v;
  ci.reserve(entries.size());
  v.reserve(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto& t = entries[k];
    if (k > 0 && entries[k - 1].row == t.row && entries[k - 1].col == t.col) {
      v.back() += t.value;
      continue;
    }
    ci.push_back(t.col);
    v.push_back(t.value);
    ++rp[t.row + 1];
  }
  for (Index i = 0; i < n_rows; ++i) rp[i + 1] += rp[i];
  return CsrMatrix(n_rows, n_cols, std::move(rp), std::move(ci), std::move(v));
}

CsrMatrix CsrMatrix::from_dense(Index n_rows, Index n_cols, const std::vector<double>& dense) {
  if (static_cast<Index>(dense.size()) != n_rows * n_cols)
    throw DimensionError("CsrMatrix::from_dense: size mismatch");
  std::vector<Index> rp(n_rows + 1, 0), ci;
  std::vector<double> v;
  for (Index i = 0; i < n_rows; ++i) {
    for (Index j = 0; j < n_cols; ++j) {
      double x = dense[i * n_cols + j];
      if (x != 0.0) {
        ci.push_back(j);
        v.push_back(x);
      }
    }
    rp[i + 1] = static_cast<Index>(ci.size());
  }
  return CsrMatrix(n_rows, n_cols, std::move(rp), std::move(ci), std::move(v));
}

double CsrMatrix::at(Index i, Index j) const {
  auto first = col_idx_.begin() + row_ptr_[i];
  auto last = col_idx_.begin() + row_ptr_[i + 1];
  auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return values_[it - col_idx_.begin()];
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(std::min(n_rows_, n_cols_), 0.0);
  for (Index i = 0; i < static_cast<Index>(d.size()); ++i) d[i] = at(i, i);
  return d;
}

std::vector<double> CsrMatrix::to_dense() const {
  std::vector<double> d(static_cast<std::size_t>(n_rows_ * n_cols_), 0.0);
  for (Index i = 0; i < n_rows_; ++i)
    for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) d[i * n_cols_ + col_idx_[k]] = values_[k];
  return d;
}

BlockVector::BlockVector(Index n_nodes, Index n_comp, std::vector<double> data)
    : n_nodes_(n_nodes), n_comp_(n_comp), data_(std::move(data)) {
  if (static_cast<Index>(data_.size()) != n_nodes_ * n_comp_)
    throw DimensionError("BlockVector: data length must equal n_nodes * n_comp");
}

BlockVector BlockVector::component(Index comp) const {
  if (comp < 0 || comp >= n_comp_) throw DimensionError("BlockVector::component: out of range");
  BlockVector out(n_nodes_, 1);
  for (Index i = 0; i < n_nodes_; ++i) out[i] = (*this)(i, comp);
  return out;
}

void BlockVector::set_component(Index comp, const BlockVector& scalar) {
  if (comp < 0 || comp >= n_comp_ || scalar.size() != n_nodes_)
    throw DimensionError("BlockVector::set_component: size mismatch");
  for (Index i = 0; i < n_nodes_; ++i) (*this)(i, comp) = scalar[i];
}

bool BlockVector::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

DiagOperator DiagOperator::from_diagonal(std::span<const double> diag) {
  std::vector<double> inv(diag.size());
  for (std::size_t k = 0; k < diag.size(); ++k) {
    if (diag[k] == 0.0 || !std::isfinite(diag[k]))
      throw NumericalError("DiagOperator: zero or non-finite diagonal entry at " +
                           std::to_string(k));
    inv[k] = 1.0 / diag[k];
  }
  return from_inverse(std::move(inv));
}

DiagOperator DiagOperator::from_inverse(std::vector<double> inv_values) {
  for (std::size_t k = 0; k < inv_values.size(); ++k)
    if (inv_values[k] == 0.0 || !std::isfinite(inv_values[k]))
      throw NumericalError("DiagOperator: invalid inverse entry at " + std::to_string(k));
  DiagOperator d;
  d.inv_ = std::move(inv_values);
  return d;
}

std::vector<double> DiagOperator::diagonal() const {
  std::vector<double> d(inv_.size());
  for (std::size_t k = 0; k < inv_.size(); ++k) d[k] = 1.0 / inv_[k];
  return d;
}

CsrMatrix csr_transpose(const CsrMatrix& a) {
  const Index m = a.n_rows(), n = a.n_cols();
  auto rp = a.row_ptr();
  auto ci = a.col_idx();
  auto v = a.values();
  std::vector<Index> trp(n + 1, 0);
  for (Index k = 0; k < a.nnz(); ++k) ++trp[ci[k] + 1];
  for (Index j = 0; j < n; ++j) trp[j + 1] += trp[j];
  std::vector<Index> next(trp.begin(), trp.end() - 1);
  std::vector<Index> tci(a.nnz());
  std::vector<double> tv(a.nnz());
  // Rows are visited in increasing order, so each transposed row comes out sorted.
  for (Index i = 0; i < m; ++i) {
    for (Index k = rp[i]; k < rp[i + 1]; ++k) {
      Index dst = next[ci[k]]++;
      tci[dst] = i;
      tv[dst] = v[k];
    }
  }
  return CsrMatrix(n, m, std::move(trp), std::move(tci), std::move(tv));
}

CsrMatrix expand_components(const CsrMatrix& a, Index n_comp) {
  if (n_comp == 1) return a;
  const Index m = a.n_rows();
  auto rp = a.row_ptr();
  auto ci = a.col_idx();
  auto v = a.values();
  std::vector<Index> erp(m * n_comp + 1, 0), eci;
  std::vector<double> ev;
  eci.reserve(a.nnz() * n_comp);
  ev.reserve(a.nnz() * n_comp);
  for (Index i = 0; i < m; ++i) {
    for (Index c = 0; c < n_comp; ++c) {
      for (Index k = rp[i]; k < rp[i + 1]; ++k) {
        eci.push_back(ci[k] * n_comp + c);
        ev.push_back(v[k]);
      }
      erp[i * n_comp + c + 1] = static_cast<Index>(eci.size());
    }
  }
  return CsrMatrix(m * n_comp, a.n_cols() * n_comp, std::move(erp), std::move(eci),
                   std::move(ev));
}

DenseMatrix DenseMatrix::from_csr(const CsrMatrix& m) {
  if (m.n_rows() != m.n_cols()) throw DimensionError("DenseMatrix::from_csr: not square");
  DenseMatrix d(m.n_rows());
  d.a = m.to_dense();
  return d;
}

std::vector<double> dense_lu_solve(DenseMatrix a, std::vector<double> b) {
  const Index n = a.n;
  if (static_cast<Index>(b.size()) != n) throw DimensionError("dense_lu_solve: size mismatch");
  double scale = 0.0;
  for (double x : a.a) scale = std::max(scale, std::abs(x));
  const double tiny = scale * static_cast<double>(n) * 1e-15;
  for (Index k = 0; k < n; ++k) {
    Index piv = k;
    for (Index i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (!(std::abs(a(piv, k)) > tiny))
      throw NumericalError("dense_lu_solve: matrix is singular to working precision");
    if (piv != k) {
      for (Index j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(b[k], b[piv]);
    }
    for (Index i = k + 1; i < n; ++i) {
      const double l = a(i, k) / a(k, k);
      if (l == 0.0) continue;
      for (Index j = k + 1; j < n; ++j) a(i, j) -= l * a(k, j);
      b[i] -= l * b[k];
    }
  }
  for (Index i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (Index j = i + 1; j < n; ++j) s -= a(i, j) * b[j];
    b[i] = s / a(i, i);
  }
  return b;
}

DenseMatrix dense_inverse(const DenseMatrix& a) {
  DenseMatrix inv(a.n);
  for (Index j = 0; j < a.n; ++j) {
    std::vector<double> e(a.n, 0.0);
    e[j] = 1.0;
    auto col = dense_lu_solve(a, std::move(e));
    for (Index i = 0; i < a.n; ++i) inv(i, j) = col[i];
  }
  return inv;
}

void write_matrix_market(const CsrMatrix& a, std::ostream& os) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << a.n_rows() << ' ' << a.n_cols() << ' ' << a.nnz() << '\n';
  auto rp = a.row_ptr();
  auto ci = a.col_idx();
  auto v = a.values();
  char buf[64];
  for (Index i = 0; i < a.n_rows(); ++i)
    for (Index k = rp[i]; k < rp[i + 1]; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", v[k]);
      os << i + 1 << ' ' << ci[k] + 1 << ' ' << buf << '\n';
    }
}

}  // namespace mgfem
