#pragma once

#include <cmath>

#include "les/data.hpp"
#include "les/types.hpp"

namespace les::operators {

enum class Storage { dense, implicit };
enum class StorageRequest { automatic, dense, implicit };

/// Above this size `automatic` keeps the operator implicit (N^2 doubles at
/// N = 4096 is ~134 MB).
inline constexpr Index kDenseAutoLimit = 4096;

/// Kernel entries below this are stored as exact zeros.
inline constexpr double kKernelFloor = 1e-300;

/// Symmetric positive-definite diffusion operator
///
///   K_ij   = exp(-d^2(x_i, x_j) / sigma^2)
///   Wt     = Dt^-1 K Dt^-1,           Dt_ii = sum_j K_ij
///   W      = D^-1/2 Wt D^-1/2,        D_ii  = sum_j Wt_ij
///
/// W is the symmetric conjugate D^1/2 W_dm D^-1/2 of the row-stochastic
/// W_dm = D^-1 Wt, so its spectrum lies in (0, 1] with top eigenvalue 1 and
/// top eigenvector proportional to sqrt(D).
///
/// Dense storage keeps W. Implicit storage keeps the samples and the two
/// degree vectors and rebuilds rows of W on demand. Both paths evaluate every
/// entry with the same expression, so they agree bitwise. Immutable once
/// built; safe to share across threads.
class SpdOperator {
 public:
  Index size() const { return n_; }
  double sigma2() const { return sigma2_; }
  Storage storage() const { return storage_; }

  /// Row sums of K.
  const Vector& d_tilde() const { return d_tilde_; }
  /// Row sums of Wt.
  const Vector& d_vec() const { return d_vec_; }

  /// Stored W; throws config if the operator is implicit.
  const Matrix& dense() const;

  /// Dense copy of W in either storage mode.
  Matrix to_dense() const;

  /// Rows [begin, end) of W into `out` ((end-begin) x N, row-major).
  void fill_rows(Index begin, Index end, RowMatrix& out) const;

  /// Kernel row K_i. (length N).
  void kernel_row(Index i, double* out) const;

 private:
  friend SpdOperator build_operator(const data::PointCloud&, double, StorageRequest,
                                    const data::Metric&);

  SpdOperator(const data::PointCloud& cloud, double sigma2, const data::Metric& metric)
      : points_(cloud.points), metric_(metric), n_(cloud.size()), sigma2_(sigma2) {}

  double entry(double kernel_value, Index i, Index j) const {
    return (kernel_value / (d_tilde_[i] * d_tilde_[j])) / std::sqrt(d_vec_[i] * d_vec_[j]);
  }

  RowMatrix points_;
  data::Metric metric_;
  Index n_ = 0;
  double sigma2_ = 0.0;
  Storage storage_ = Storage::implicit;
  Vector d_tilde_;
  Vector d_vec_;
  Matrix w_;  // empty unless dense
};

/// Builds the operator. Both degree passes run here, so an implicit operator
/// only materializes the two degree vectors. `automatic` picks dense when
/// N <= kDenseAutoLimit.
SpdOperator build_operator(const data::PointCloud& cloud, double sigma2,
                           StorageRequest mode = StorageRequest::automatic,
                           const data::Metric& metric = data::Metric::euclidean());

/// W * V. Rows of W are produced `batch_rows` at a time (from storage or
/// rebuilt from the kernel) and each output row accumulates over j in
/// ascending order, so the result does not depend on `batch_rows` or on the
/// storage mode.
Matrix operator_matmul(const SpdOperator& op, const Matrix& v, Index batch_rows = 256);

}  // namespace les::operators
