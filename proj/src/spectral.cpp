#include "les/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "les/error.hpp"
#include "les/random.hpp"

namespace les::spectral {

const char* to_string(Method m) { return m == Method::exact ? "exact" : "nystrom"; }

Method method_from_string(const std::string& s) {
  if (s == "exact") return Method::exact;
  if (s == "nystrom") return Method::nystrom;
  throw_config("unknown spectrum method '" + s + "'");
}

namespace {

Vector sorted_descending(const Vector& v) {
  std::vector<Index> idx(static_cast<std::size_t>(v.size()));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return v[a] > v[b]; });
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) out[i] = v[idx[static_cast<std::size_t>(i)]];
  return out;
}

}  // namespace

Spectrum nystrom_eigenvalues(const ApplyFn& apply, Index n, Index k, Index m,
                             std::uint64_t seed) {
  if (k < 1) throw_config("rank k must be positive");
  if (m < k + 2)
    throw_config("sketch size m=" + std::to_string(m) + " must be at least k+2=" +
                 std::to_string(k + 2));
  if (m > n)
    throw_config("sketch size m=" + std::to_string(m) + " exceeds matrix size n=" +
                 std::to_string(n));

  Rng rng(seed);
  Matrix omega = rng.normal_matrix(n, m);
  {
    Eigen::HouseholderQR<Matrix> qr(omega);
    omega = qr.householderQ() * Matrix::Identity(n, m);
  }

  const Matrix y = apply(omega);
  if (y.rows() != n || y.cols() != m) throw_numerical("sketch product has the wrong shape");
  if (!y.allFinite()) throw_numerical("sketch product is not finite");

  double nu = kShiftMu * y.norm();
  int retries = 0;
  Matrix shifted;
  Eigen::LLT<Matrix> llt;
  for (;;) {
    shifted = y + nu * omega;
    const Matrix b = omega.transpose() * shifted;
    llt.compute(0.5 * (b + b.transpose()));
    if (llt.info() == Eigen::Success) break;
    if (retries == kMaxCholeskyRetries) {
      std::ostringstream os;
      os << "Cholesky factorization failed after " << retries << " retries (final shift nu="
         << nu << ")";
      throw_numerical(os.str());
    }
    nu *= 2.0;
    ++retries;
  }

  // X C = shifted with C = L^T upper triangular.
  Matrix x = shifted;
  llt.matrixU().solveInPlace<Eigen::OnTheRight>(x);

  // Singular values of the tall X through its triangular factor.
  Eigen::HouseholderQR<Matrix> qr(x);
  const Matrix r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  Eigen::BDCSVD<Matrix> svd(r);
  const Vector& sigma = svd.singularValues();

  Vector lambda(k);
  for (Index i = 0; i < k; ++i) lambda[i] = std::max(0.0, sigma[i] * sigma[i] - nu);

  Spectrum out;
  out.values = sorted_descending(lambda);
  out.rank_k = k;
  out.sketch_m = m;
  out.seed = seed;
  out.shift_nu = nu;
  out.cholesky_retries = retries;
  out.method = Method::nystrom;
  return out;
}

Spectrum approx_eigenvalues(const operators::SpdOperator& op, Index k, Index m,
                            std::uint64_t seed, Index batch_rows) {
  return nystrom_eigenvalues(
      [&](const Matrix& v) { return operators::operator_matmul(op, v, batch_rows); }, op.size(),
      k, m, seed);
}

Spectrum approx_eigenvalues(const Matrix& psd, Index k, Index m, std::uint64_t seed) {
  if (psd.rows() != psd.cols()) throw_config("approx_eigenvalues needs a square matrix");
  return nystrom_eigenvalues([&](const Matrix& v) -> Matrix { return psd * v; }, psd.rows(), k,
                             m, seed);
}

Vector exact_full_spectrum(const Matrix& sym) {
  if (sym.rows() != sym.cols()) throw_config("eigenvalues need a square matrix");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw_numerical("symmetric eigensolver did not converge");
  const Vector& asc = solver.eigenvalues();
  const Index n = asc.size();
  Vector out(n);
  for (Index i = 0; i < n; ++i) out[i] = std::max(0.0, asc[n - 1 - i]);
  return out;
}

Spectrum exact_eigenvalues(const Matrix& sym, Index k) {
  if (k < 1) throw_config("rank k must be positive");
  const Vector full = exact_full_spectrum(sym);
  Spectrum out;
  out.values = Vector::Zero(k);
  const Index take = std::min(k, full.size());
  out.values.head(take) = full.head(take);
  out.rank_k = k;
  out.method = Method::exact;
  return out;
}

Spectrum exact_eigenvalues(const operators::SpdOperator& op, Index k) {
  if (op.storage() == operators::Storage::dense) return exact_eigenvalues(op.dense(), k);
  if (op.size() > operators::kDenseAutoLimit)
    throw_config("operator of size " + std::to_string(op.size()) +
                 " is too large to densify for the exact eigensolver");
  return exact_eigenvalues(op.to_dense(), k);
}

Spectrum estimate_spectrum(const operators::SpdOperator& op, Index k, Index m,
                           std::uint64_t seed, Index exact_threshold) {
  if (op.size() <= exact_threshold || k > op.size()) {
    Spectrum s = exact_eigenvalues(op, k);
    s.seed = seed;
    return s;
  }
  return approx_eigenvalues(op, k, m, seed);
}

// ---------------------------------------------------------------------------

ErrorBound error_bounds(const Vector& full, Index k, Index m, double gamma,
                        const Vector* observed) {
  if (k < 1 || k > full.size()) throw_config("error_bounds: k must lie in [1, N]");
  if (m <= k + 1) throw_config("error_bounds: m must exceed k+1");
  if (gamma < 0.0) throw_config("error_bounds: gamma must be nonnegative");
  ErrorBound eb;
  for (Index i = k; i < full.size(); ++i) eb.tail_sum += full[i];
  const double coef = static_cast<double>(k) / static_cast<double>(m - k - 1);
  eb.eig_bound = coef * eb.tail_sum;
  eb.log_eig_bound = 1.5 * coef * eb.tail_sum / (full[k - 1] + gamma);
  if (observed != nullptr) {
    if (observed->size() < k) throw_config("error_bounds: fewer observed values than k");
    bool ok = true;
    for (Index i = 0; i < k; ++i)
      ok = ok && std::abs(full[i] - (*observed)[i]) / (full[i] + gamma) <= kLogBoundRatioLimit;
    eb.validity = ok;
  }
  return eb;
}

double eigenvalue_error(const Vector& full, const Vector& estimate) {
  if (estimate.size() > full.size()) throw_config("estimate longer than the full spectrum");
  return (full.head(estimate.size()) - estimate).cwiseAbs().sum();
}

double log_eigenvalue_error(const Vector& full, const Vector& estimate, double gamma) {
  if (estimate.size() > full.size()) throw_config("estimate longer than the full spectrum");
  double s = 0.0;
  for (Index i = 0; i < estimate.size(); ++i)
    s += std::abs(std::log(full[i] + gamma) - std::log(estimate[i] + gamma));
  return s;
}

}  // namespace les::spectral
