#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mgfem/linalg.hpp"

namespace mgfem {

/// How a scalar CSR matrix meets a BlockVector.
enum class Layout {
  /// A acts on each component slice independently: A.n_cols == x.n_nodes().
  per_component,
  /// A acts on the flattened (node, comp) index: A.n_cols == x.size().
  flat,
};

/// The fixed kernel set every solver stage is written against.
///
/// Implementations may parallelize internally. They own exclusive access to
/// output vectors for the duration of a call and must throw on dimension
/// mismatch or non-finite input rather than producing garbage.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string_view name() const = 0;

  /// y <- alpha * A x + beta * y
  virtual void spmv(double alpha, const CsrMatrix& a, const BlockVector& x, double beta,
                    BlockVector& y, Layout layout = Layout::flat) const = 0;
  /// y <- alpha * A^T x + beta * y
  virtual void spmv_transpose(double alpha, const CsrMatrix& a, const BlockVector& x,
                              double beta, BlockVector& y,
                              Layout layout = Layout::flat) const = 0;

  virtual double dot(const BlockVector& x, const BlockVector& y) const = 0;
  /// y <- alpha * x + y
  virtual void axpy(double alpha, const BlockVector& x, BlockVector& y) const = 0;
  virtual void scale(double alpha, BlockVector& x) const = 0;
  virtual double norm2(const BlockVector& x) const = 0;
  virtual void copy(const BlockVector& src, BlockVector& dst) const = 0;
  virtual void set_zero(BlockVector& x) const = 0;

  /// out_k = inv_k * x_k over the flattened index.
  virtual void diag_apply(const DiagOperator& d, const BlockVector& x,
                          BlockVector& out) const = 0;
  /// Scalar inverse diagonal applied to every component of a node.
  virtual void diag_apply_nodal(const DiagOperator& d, const BlockVector& x,
                                BlockVector& out) const = 0;

  /// v[d](i, c) = u(i, d) * u(i, c) for a 3-component u.
  virtual void nodewise_products(const BlockVector& u,
                                 std::array<BlockVector, 3>& v) const = 0;

  /// out(map[k]) = p(k); all other entries of out are zeroed.
  virtual void space_scatter(const BlockVector& p, std::span<const Index> map,
                             BlockVector& out) const = 0;
  /// p(k) = v(map[k]).
  virtual void space_gather(const BlockVector& v, std::span<const Index> map,
                            BlockVector& p) const = 0;
};

/// Single-threaded CPU implementation; every other backend is checked against it.
class ReferenceBackend final : public Backend {
 public:
  std::string_view name() const override { return "reference"; }

  void spmv(double alpha, const CsrMatrix& a, const BlockVector& x, double beta,
            BlockVector& y, Layout layout = Layout::flat) const override;
  void spmv_transpose(double alpha, const CsrMatrix& a, const BlockVector& x, double beta,
                      BlockVector& y, Layout layout = Layout::flat) const override;
  double dot(const BlockVector& x, const BlockVector& y) const override;
  void axpy(double alpha, const BlockVector& x, BlockVector& y) const override;
  void scale(double alpha, BlockVector& x) const override;
  double norm2(const BlockVector& x) const override;
  void copy(const BlockVector& src, BlockVector& dst) const override;
  void set_zero(BlockVector& x) const override;
  void diag_apply(const DiagOperator& d, const BlockVector& x,
                  BlockVector& out) const override;
  void diag_apply_nodal(const DiagOperator& d, const BlockVector& x,
                        BlockVector& out) const override;
  void nodewise_products(const BlockVector& u,
                         std::array<BlockVector, 3>& v) const override;
  void space_scatter(const BlockVector& p, std::span<const Index> map,
                     BlockVector& out) const override;
  void space_gather(const BlockVector& v, std::span<const Index> map,
                    BlockVector& p) const override;
};

/// Names accepted by make_backend.
std::vector<std::string> available_backends();

/// Throws UnsupportedError for an unknown name.
std::unique_ptr<Backend> make_backend(std::string_view name);

}  // namespace mgfem
