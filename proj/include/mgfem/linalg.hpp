#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "mgfem/error.hpp"

namespace mgfem {

using Index = std::int64_t;

/// One (row, col, value) entry used to build a CsrMatrix. Duplicates are summed.
struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Scalar compressed-sparse-row matrix.
///
/// Column indices are strictly increasing within a row. Matrices that couple
/// several components per mesh node are stored over the flattened index
/// node * n_comp + comp, matching the BlockVector layout.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  /// Validates the structure; throws DimensionError on any inconsistency.
  CsrMatrix(Index n_rows, Index n_cols, std::vector<Index> row_ptr,
            std::vector<Index> col_idx, std::vector<double> values);

  static CsrMatrix identity(Index n);
  static CsrMatrix zero(Index n_rows, Index n_cols);
  /// Sorts and sums duplicate entries. Explicit zeros are kept.
  static CsrMatrix from_triplets(Index n_rows, Index n_cols,
                                 std::vector<Triplet> entries);
  /// Row-major dense input; entries equal to 0.0 are dropped.
  static CsrMatrix from_dense(Index n_rows, Index n_cols,
                              const std::vector<double>& dense);

  Index n_rows() const { return n_rows_; }
  Index n_cols() const { return n_cols_; }
  Index nnz() const { return static_cast<Index>(values_.size()); }

  std::span<const Index> row_ptr() const { return row_ptr_; }
  std::span<const Index> col_idx() const { return col_idx_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values_mut() { return values_; }

  /// Entry (i, j); 0 when not stored. Binary search within the row.
  double at(Index i, Index j) const;
  std::vector<double> diagonal() const;
  std::vector<double> to_dense() const;

  friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;

 private:
  Index n_rows_ = 0;
  Index n_cols_ = 0;
  std::vector<Index> row_ptr_{0};
  std::vector<Index> col_idx_;
  std::vector<double> values_;
};

/// Node-major vector holding n_comp values per mesh node.
class BlockVector {
 public:
  BlockVector() = default;
  BlockVector(Index n_nodes, Index n_comp, double fill = 0.0)
      : n_nodes_(n_nodes), n_comp_(n_comp),
        data_(static_cast<std::size_t>(n_nodes * n_comp), fill) {}
  BlockVector(Index n_nodes, Index n_comp, std::vector<double> data);

  Index n_nodes() const { return n_nodes_; }
  Index n_comp() const { return n_comp_; }
  Index size() const { return static_cast<Index>(data_.size()); }

  double& operator()(Index node, Index comp) { return data_[node * n_comp_ + comp]; }
  double operator()(Index node, Index comp) const { return data_[node * n_comp_ + comp]; }
  double& operator[](Index k) { return data_[k]; }
  double operator[](Index k) const { return data_[k]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  /// Copy of component `comp` as a scalar vector.
  BlockVector component(Index comp) const;
  void set_component(Index comp, const BlockVector& scalar);

  bool all_finite() const;

  friend bool operator==(const BlockVector&, const BlockVector&) = default;

 private:
  Index n_nodes_ = 0;
  Index n_comp_ = 1;
  std::vector<double> data_;
};

/// Diagonal operator stored by its inverse entries.
class DiagOperator {
 public:
  DiagOperator() = default;
  /// Throws NumericalError if any entry is zero or not finite.
  static DiagOperator from_diagonal(std::span<const double> diag);
  static DiagOperator from_inverse(std::vector<double> inv_values);

  Index size() const { return static_cast<Index>(inv_.size()); }
  std::span<const double> inv_values() const { return inv_; }
  /// The (non-inverted) diagonal entries.
  std::vector<double> diagonal() const;

 private:
  std::vector<double> inv_;
};

/// Exact structural transpose with sorted columns.
CsrMatrix csr_transpose(const CsrMatrix& a);

/// Kronecker product a (x) I_ncomp over the flattened node-major index.
CsrMatrix expand_components(const CsrMatrix& a, Index n_comp);

/// Dense row-major square matrix.
struct DenseMatrix {
  Index n = 0;
  std::vector<double> a;

  explicit DenseMatrix(Index size = 0) : n(size), a(static_cast<std::size_t>(size * size), 0.0) {}
  double& operator()(Index i, Index j) { return a[i * n + j]; }
  double operator()(Index i, Index j) const { return a[i * n + j]; }

  static DenseMatrix from_csr(const CsrMatrix& m);
};

/// LU with partial pivoting. Throws NumericalError when singular to working precision.
std::vector<double> dense_lu_solve(DenseMatrix a, std::vector<double> b);

/// Inverse of a small dense matrix (block-Jacobi setup).
DenseMatrix dense_inverse(const DenseMatrix& a);

/// MatrixMarket coordinate real general, 1-based indices.
void write_matrix_market(const CsrMatrix& a, std::ostream& os);

}  // namespace mgfem
