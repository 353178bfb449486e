#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "les/operator.hpp"
#include "les/types.hpp"

namespace les::spectral {

enum class Method { exact, nystrom };

const char* to_string(Method m);
Method method_from_string(const std::string& s);

/// Leading eigenvalues, descending and nonnegative.
struct Spectrum {
  Vector values;
  Index rank_k = 0;
  Index sketch_m = 0;  // 0 for the exact path
  std::uint64_t seed = 0;
  double shift_nu = 0.0;  // shift actually subtracted (after Cholesky retries)
  int cholesky_retries = 0;
  Method method = Method::exact;
};

/// Machine-precision factor for the stabilizing shift nu = mu * ||Y||_F.
inline constexpr double kShiftMu = 2.2e-16;
inline constexpr int kMaxCholeskyRetries = 3;
/// `estimate_spectrum` uses the exact solver up to this size.
inline constexpr Index kExactAutoLimit = 2048;

/// Y = A * Omega for the PSD matrix being sketched.
using ApplyFn = std::function<Matrix(const Matrix&)>;

/// Fixed-rank Nystrom estimate of the top-k eigenvalues of an n x n PSD
/// matrix available only through products:
///
///   Omega <- orth(randn(n, m))
///   Y     <- A Omega;   nu <- mu ||Y||_F
///   Y     <- Y + nu Omega;   B <- Omega^T Y
///   C     <- chol((B + B^T) / 2)           (upper, B = C^T C)
///   sigma <- singular values of Y C^-1     (triangular solve)
///   lambda_i <- max(0, sigma_i^2 - nu), i < k
///
/// If the Cholesky factorization fails, nu is doubled and B rebuilt, at most
/// kMaxCholeskyRetries times; the final nu is the one subtracted.
/// Requires k + 2 <= m <= n.
Spectrum nystrom_eigenvalues(const ApplyFn& apply, Index n, Index k, Index m, std::uint64_t seed);

Spectrum approx_eigenvalues(const operators::SpdOperator& op, Index k, Index m,
                            std::uint64_t seed, Index batch_rows = 256);
Spectrum approx_eigenvalues(const Matrix& psd, Index k, Index m, std::uint64_t seed);

/// All eigenvalues of a symmetric matrix, descending, negatives clamped to 0.
Vector exact_full_spectrum(const Matrix& sym);

/// Top-k eigenvalues from a full symmetric eigendecomposition, zero-padded
/// when k exceeds the matrix size.
Spectrum exact_eigenvalues(const Matrix& sym, Index k);
/// Implicit operators are densified when N <= kDenseAutoLimit, else config error.
Spectrum exact_eigenvalues(const operators::SpdOperator& op, Index k);

/// Exact when N <= exact_threshold or k > N, Nystrom otherwise.
Spectrum estimate_spectrum(const operators::SpdOperator& op, Index k, Index m,
                           std::uint64_t seed, Index exact_threshold = kExactAutoLimit);

// ---------------------------------------------------------------------------
// Error bounds for the Nystrom estimate
// ---------------------------------------------------------------------------

inline constexpr double kLogBoundRatioLimit = 0.5828;

struct ErrorBound {
  double eig_bound = 0.0;      // k/(m-k-1) * tail
  double log_eig_bound = 0.0;  // 1.5 k / ((m-k-1)(lambda_k + gamma)) * tail
  double tail_sum = 0.0;       // sum_{i>k} lambda_i
  /// Set when observed estimates are supplied: every relative error
  /// |lambda_i - est_i| / (lambda_i + gamma) is at most kLogBoundRatioLimit.
  std::optional<bool> validity;
};

/// `full` is the full descending spectrum (length N).
ErrorBound error_bounds(const Vector& full, Index k, Index m, double gamma,
                        const Vector* observed = nullptr);

/// sum_{i<k} |lambda_i - est_i|
double eigenvalue_error(const Vector& full, const Vector& estimate);
/// sum_{i<k} |log(lambda_i + gamma) - log(est_i + gamma)|
double log_eigenvalue_error(const Vector& full, const Vector& estimate, double gamma);

}  // namespace les::spectral
