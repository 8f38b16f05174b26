#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "sesop/lp_space.hpp"

namespace sesop {

/// Bounded linear map between the two l^p spaces of a problem. Implementations
/// must realize the exact adjoint of apply: <u, A x> == <A^T u, x>.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;

  virtual Eigen::Index rows() const = 0;  // m, dimension of the data space
  virtual Eigen::Index cols() const = 0;  // n, dimension of the solution space

  virtual void apply(const Vector& x, Vector& y) const = 0;          // y = A x
  virtual void adjoint_apply(const Vector& u, Vector& v) const = 0;  // v = A^T u

  Vector apply(const Vector& x) const;
  Vector adjoint_apply(const Vector& u) const;
};

class DenseOperator final : public LinearOperator {
 public:
  using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  explicit DenseOperator(Matrix entries);

  Eigen::Index rows() const override { return a_.rows(); }
  Eigen::Index cols() const override { return a_.cols(); }
  using LinearOperator::apply;
  using LinearOperator::adjoint_apply;
  void apply(const Vector& x, Vector& y) const override;
  void adjoint_apply(const Vector& u, Vector& v) const override;

  const Matrix& entries() const { return a_; }

 private:
  Matrix a_;
};

/// Compressed-row sparse matrix. Column indices are strictly increasing inside
/// every row; construction validates the layout.
class SparseOperator final : public LinearOperator {
 public:
  SparseOperator(Eigen::Index rows, Eigen::Index cols, std::vector<Eigen::Index> row_offsets,
                 std::vector<Eigen::Index> col_indices, std::vector<double> values);

  Eigen::Index rows() const override { return m_; }
  Eigen::Index cols() const override { return n_; }
  using LinearOperator::apply;
  using LinearOperator::adjoint_apply;
  void apply(const Vector& x, Vector& y) const override;
  void adjoint_apply(const Vector& u, Vector& v) const override;

  Eigen::Index nonzeros() const { return static_cast<Eigen::Index>(values_.size()); }
  const std::vector<Eigen::Index>& row_offsets() const { return row_offsets_; }
  const std::vector<Eigen::Index>& col_indices() const { return col_indices_; }
  const std::vector<double>& values() const { return values_; }

  /// Row-by-row densification, bit-identical entries.
  DenseOperator::Matrix to_dense() const;

 private:
  Eigen::Index m_ = 0, n_ = 0;
  std::vector<Eigen::Index> row_offsets_;
  std::vector<Eigen::Index> col_indices_;
  std::vector<double> values_;
};

struct NormEstimate {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Largest singular value by power iteration on A^T A, all-ones start.
NormEstimate norm_estimate(const LinearOperator& A, double tol = 1e-8, int max_iter = 1000);

/// Text formats:
///   dense:  "rows cols" then rows*cols row-major entries, whitespace separated
///   sparse: "rows cols nnz" then nnz lines "row col value", 0-based indices
/// Parse failures throw std::runtime_error naming the offending position.
DenseOperator load_dense_operator(const std::string& path);
SparseOperator load_sparse_operator(const std::string& path);
Vector load_vector(const std::string& path);

}  // namespace sesop
