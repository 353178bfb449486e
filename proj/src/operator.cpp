#include "les/operator.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "les/error.hpp"

namespace les::operators {

const Matrix& SpdOperator::dense() const {
  if (storage_ != Storage::dense) throw_config("operator is implicit; no dense W stored");
  return w_;
}

void SpdOperator::kernel_row(Index i, double* out) const {
  const Index d = points_.cols();
  const double* xi = points_.row(i).data();
  for (Index j = 0; j < n_; ++j) {
    const double k = std::exp(-metric_.sq_distance(xi, points_.row(j).data(), d) / sigma2_);
    out[j] = k < kKernelFloor ? 0.0 : k;
  }
}

void SpdOperator::fill_rows(Index begin, Index end, RowMatrix& out) const {
  if (begin < 0 || end > n_ || begin > end) throw_config("row range out of bounds");
  out.resize(end - begin, n_);
  for (Index i = begin; i < end; ++i) {
    double* row = out.row(i - begin).data();
    if (storage_ == Storage::dense) {
      // W is symmetric, so column i is row i and is contiguous.
      std::copy_n(w_.col(i).data(), n_, row);
    } else {
      kernel_row(i, row);
      for (Index j = 0; j < n_; ++j) row[j] = entry(row[j], i, j);
    }
  }
}

Matrix SpdOperator::to_dense() const {
  if (storage_ == Storage::dense) return w_;
  Matrix w(n_, n_);
  std::vector<double> row(static_cast<std::size_t>(n_));
  for (Index i = 0; i < n_; ++i) {
    kernel_row(i, row.data());
    for (Index j = 0; j < n_; ++j) w(j, i) = entry(row[static_cast<std::size_t>(j)], i, j);
  }
  return w;
}

namespace {

void check_degrees(const Vector& v, const char* what) {
  for (Index i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i]) || !(v[i] > 0.0))
      throw_numerical(std::string("non-finite or nonpositive ") + what + " at row " +
                      std::to_string(i + 1));
}

}  // namespace

SpdOperator build_operator(const data::PointCloud& cloud, double sigma2, StorageRequest mode,
                           const data::Metric& metric) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw_config("sigma^2 must be positive");
  data::validate(cloud);
  SpdOperator op(cloud, sigma2, metric);
  const Index n = op.n_;
  const bool dense = mode == StorageRequest::dense ||
                     (mode == StorageRequest::automatic && n <= kDenseAutoLimit);
  op.storage_ = dense ? Storage::dense : Storage::implicit;

  op.d_tilde_.resize(n);
  op.d_vec_.resize(n);
  std::vector<double> row(static_cast<std::size_t>(n));

  if (dense) {
    // Column i of k holds kernel row i; K is symmetric.
    Matrix& k = op.w_;
    k.resize(n, n);
    for (Index i = 0; i < n; ++i) {
      op.kernel_row(i, k.col(i).data());
      double s = 0.0;
      for (Index j = 0; j < n; ++j) s += k(j, i);
      op.d_tilde_[i] = s;
    }
    check_degrees(op.d_tilde_, "kernel degree");
    for (Index i = 0; i < n; ++i) {
      double s = 0.0;
      for (Index j = 0; j < n; ++j) s += k(j, i) / (op.d_tilde_[i] * op.d_tilde_[j]);
      op.d_vec_[i] = s;
    }
    check_degrees(op.d_vec_, "diffusion degree");
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) k(j, i) = op.entry(k(j, i), i, j);
    return op;
  }

  // Pass 1: degrees of K.
  for (Index i = 0; i < n; ++i) {
    op.kernel_row(i, row.data());
    double s = 0.0;
    for (Index j = 0; j < n; ++j) s += row[static_cast<std::size_t>(j)];
    op.d_tilde_[i] = s;
  }
  check_degrees(op.d_tilde_, "kernel degree");
  // Pass 2: degrees of Wt.
  for (Index i = 0; i < n; ++i) {
    op.kernel_row(i, row.data());
    double s = 0.0;
    for (Index j = 0; j < n; ++j)
      s += row[static_cast<std::size_t>(j)] / (op.d_tilde_[i] * op.d_tilde_[j]);
    op.d_vec_[i] = s;
  }
  check_degrees(op.d_vec_, "diffusion degree");
  return op;
}

Matrix operator_matmul(const SpdOperator& op, const Matrix& v, Index batch_rows) {
  const Index n = op.size();
  if (v.rows() != n)
    throw_config("operator_matmul: operator is " + std::to_string(n) + "x" + std::to_string(n) +
                 " but V has " + std::to_string(v.rows()) + " rows");
  if (batch_rows < 1) throw_config("operator_matmul: batch_rows must be positive");
  const Index m = v.cols();
  const RowMatrix vr = v;
  RowMatrix out = RowMatrix::Zero(n, m);
  RowMatrix rows;

  // Rows of V are reused across the batch; blocking over j keeps them in cache
  // without changing each output row's summation order.
  constexpr Index kBlockJ = 64;
  for (Index b0 = 0; b0 < n; b0 += batch_rows) {
    const Index b1 = std::min(n, b0 + batch_rows);
    op.fill_rows(b0, b1, rows);
    for (Index j0 = 0; j0 < n; j0 += kBlockJ) {
      const Index j1 = std::min(n, j0 + kBlockJ);
      for (Index i = b0; i < b1; ++i) {
        const double* w = rows.row(i - b0).data();
        double* o = out.row(i).data();
        for (Index j = j0; j < j1; ++j) {
          const double wij = w[j];
          if (wij == 0.0) continue;
          const double* vj = vr.row(j).data();
          for (Index c = 0; c < m; ++c) o[c] += wij * vj[c];
        }
      }
    }
  }
  return out;
}

}  // namespace les::operators
