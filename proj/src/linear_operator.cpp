#include "sesop/linear_operator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace sesop {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

Vector LinearOperator::apply(const Vector& x) const {
  Vector y(rows());
  apply(x, y);
  return y;
}

Vector LinearOperator::adjoint_apply(const Vector& u) const {
  Vector v(cols());
  adjoint_apply(u, v);
  return v;
}

DenseOperator::DenseOperator(Matrix entries) : a_(std::move(entries)) {
  require(a_.rows() >= 1 && a_.cols() >= 1, "DenseOperator: empty matrix");
  require(a_.allFinite(), "DenseOperator: non-finite entries");
}

void DenseOperator::apply(const Vector& x, Vector& y) const {
  require(x.size() == a_.cols(), "DenseOperator::apply: dimension mismatch");
  y.noalias() = a_ * x;
}

void DenseOperator::adjoint_apply(const Vector& u, Vector& v) const {
  require(u.size() == a_.rows(), "DenseOperator::adjoint_apply: dimension mismatch");
  v.noalias() = a_.transpose() * u;
}

SparseOperator::SparseOperator(Eigen::Index rows, Eigen::Index cols,
                               std::vector<Eigen::Index> row_offsets,
                               std::vector<Eigen::Index> col_indices, std::vector<double> values)
    : m_(rows),
      n_(cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
  require(m_ >= 1 && n_ >= 1, "SparseOperator: empty shape");
  require(row_offsets_.size() == static_cast<size_t>(m_) + 1, "SparseOperator: bad offset count");
  require(row_offsets_.front() == 0, "SparseOperator: offsets must start at 0");
  require(row_offsets_.back() == static_cast<Eigen::Index>(values_.size()),
          "SparseOperator: offsets do not cover the value array");
  require(col_indices_.size() == values_.size(), "SparseOperator: index/value size mismatch");
  for (Eigen::Index i = 0; i < m_; ++i) {
    require(row_offsets_[i] <= row_offsets_[i + 1], "SparseOperator: decreasing offsets");
    for (Eigen::Index k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      require(col_indices_[k] >= 0 && col_indices_[k] < n_,
              "SparseOperator: column index out of range");
      require(k == row_offsets_[i] || col_indices_[k - 1] < col_indices_[k],
              "SparseOperator: column indices not strictly increasing in a row");
      require(std::isfinite(values_[k]), "SparseOperator: non-finite entry");
    }
  }
}

void SparseOperator::apply(const Vector& x, Vector& y) const {
  require(x.size() == n_, "SparseOperator::apply: dimension mismatch");
  y.resize(m_);
  for (Eigen::Index i = 0; i < m_; ++i) {
    double acc = 0.0;
    for (Eigen::Index k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
      acc += values_[k] * x[col_indices_[k]];
    y[i] = acc;
  }
}

void SparseOperator::adjoint_apply(const Vector& u, Vector& v) const {
  require(u.size() == m_, "SparseOperator::adjoint_apply: dimension mismatch");
  v = Vector::Zero(n_);
  for (Eigen::Index i = 0; i < m_; ++i) {
    const double ui = u[i];
    if (ui == 0.0) continue;
    for (Eigen::Index k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
      v[col_indices_[k]] += values_[k] * ui;
  }
}

DenseOperator::Matrix SparseOperator::to_dense() const {
  DenseOperator::Matrix a = DenseOperator::Matrix::Zero(m_, n_);
  for (Eigen::Index i = 0; i < m_; ++i)
    for (Eigen::Index k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
      a(i, col_indices_[k]) = values_[k];
  return a;
}

NormEstimate norm_estimate(const LinearOperator& A, double tol, int max_iter) {
  require(tol > 0.0 && max_iter >= 1, "norm_estimate: bad parameters");
  Vector v = Vector::Ones(A.cols());
  v /= v.norm();
  Vector av(A.rows()), w(A.cols());
  double sigma = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    A.apply(v, av);
    A.adjoint_apply(av, w);  // w = A^T A v, Rayleigh quotient v.w = sigma^2
    const double est = std::sqrt(std::max(v.dot(w), 0.0));
    const double wn = w.norm();
    if (wn == 0.0) return NormEstimate{0.0, it, true};
    if (it > 1 && std::abs(est - sigma) <= tol * std::max(est, 1e-300))
      return NormEstimate{est, it, true};
    sigma = est;
    v = w / wn;
  }
  return NormEstimate{sigma, max_iter, false};
}

namespace {

class TokenReader {
 public:
  explicit TokenReader(const std::string& path) : path_(path), in_(path) {
    if (!in_) throw std::runtime_error("cannot open " + path);
  }

  double next_real(const char* what) {
    double x;
    if (!(in_ >> x)) fail(what);
    return x;
  }

  Eigen::Index next_index(const char* what) {
    long long x;
    if (!(in_ >> x)) fail(what);
    return static_cast<Eigen::Index>(x);
  }

  bool at_end() {
    in_ >> std::ws;
    return in_.eof();
  }

 private:
  [[noreturn]] void fail(const char* what) {
    std::ostringstream os;
    os << path_ << ": expected " << what << " at token " << count_;
    throw std::runtime_error(os.str());
  }

  std::string path_;
  std::ifstream in_;
  long count_ = 0;
};

}  // namespace

DenseOperator load_dense_operator(const std::string& path) {
  TokenReader r(path);
  const Eigen::Index m = r.next_index("row count");
  const Eigen::Index n = r.next_index("column count");
  if (m < 1 || n < 1) throw std::runtime_error(path + ": non-positive shape");
  DenseOperator::Matrix a(m, n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = r.next_real("matrix entry");
  return DenseOperator(std::move(a));
}

SparseOperator load_sparse_operator(const std::string& path) {
  TokenReader r(path);
  const Eigen::Index m = r.next_index("row count");
  const Eigen::Index n = r.next_index("column count");
  const Eigen::Index nnz = r.next_index("nonzero count");
  if (m < 1 || n < 1 || nnz < 0) throw std::runtime_error(path + ": bad header");
  std::vector<std::vector<std::pair<Eigen::Index, double>>> rows(m);
  for (Eigen::Index k = 0; k < nnz; ++k) {
    const Eigen::Index i = r.next_index("row index");
    const Eigen::Index j = r.next_index("column index");
    const double x = r.next_real("value");
    if (i < 0 || i >= m || j < 0 || j >= n)
      throw std::runtime_error(path + ": entry index out of range");
    rows[i].emplace_back(j, x);
  }
  std::vector<Eigen::Index> offsets(m + 1, 0), cols;
  std::vector<double> vals;
  cols.reserve(nnz);
  vals.reserve(nnz);
  for (Eigen::Index i = 0; i < m; ++i) {
    auto& row = rows[i];
    std::sort(row.begin(), row.end());
    for (size_t k = 0; k + 1 < row.size(); ++k)
      if (row[k].first == row[k + 1].first)
        throw std::runtime_error(path + ": duplicate entry in a row");
    for (auto& [j, x] : row) {
      cols.push_back(j);
      vals.push_back(x);
    }
    offsets[i + 1] = static_cast<Eigen::Index>(cols.size());
  }
  return SparseOperator(m, n, std::move(offsets), std::move(cols), std::move(vals));
}

Vector load_vector(const std::string& path) {
  TokenReader r(path);
  std::vector<double> xs;
  while (!r.at_end()) xs.push_back(r.next_real("vector entry"));
  if (xs.empty()) throw std::runtime_error(path + ": empty vector");
  return Eigen::Map<const Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

}  // namespace sesop
