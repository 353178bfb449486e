#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "les/operator.hpp"
#include "les/spectral.hpp"
#include "les/types.hpp"

namespace les::distances {

/// How the kernel scale was chosen: sigma^2 = multiplier * median(d^2).
struct SigmaRule {
  double multiplier = 2.0;
  std::string metric = "euclidean";
};

/// K-vector f_i = log(lambda_i + gamma) of a dataset's leading spectrum.
struct LesDescriptor {
  Vector f;
  double gamma = 1e-8;
  Index rank_k = 0;
  SigmaRule sigma_rule;
  std::uint64_t seed = 0;
  std::string dataset_name;
  spectral::Method method = spectral::Method::exact;
};

LesDescriptor les_descriptor(const spectral::Spectrum& spectrum, double gamma,
                             std::string dataset_name = {}, SigmaRule sigma_rule = {});

/// Recovers max(0, exp(f_i) - gamma).
Vector descriptor_spectrum(const LesDescriptor& d);

/// Throws config unless rank and gamma match exactly.
void check_comparable(const LesDescriptor& a, const LesDescriptor& b);

double les_distance_squared(const LesDescriptor& a, const LesDescriptor& b);
/// Euclidean norm of f_a - f_b. Not a metric: isospectral data sets and
/// approximate spectra can both give zero for different inputs.
double les_distance(const LesDescriptor& a, const LesDescriptor& b);

// ---------------------------------------------------------------------------
// Spectral bounds on the log-Euclidean distance
// ---------------------------------------------------------------------------

/// sqrt(sum_i (log a_i - log b_i)^2), both sorted descending.
double le_lower_bound(const Vector& a, const Vector& b);
/// Same with b paired in ascending order.
double le_upper_bound(const Vector& a, const Vector& b);
double le_lower_bound(const spectral::Spectrum& a, const spectral::Spectrum& b);
double le_upper_bound(const spectral::Spectrum& a, const spectral::Spectrum& b);

// ---------------------------------------------------------------------------
// Aligned (known-correspondence) distances between dense SPD matrices
// ---------------------------------------------------------------------------

/// Eigenvalues below this are raised to it before log/power.
inline constexpr double kEigenFloor = 1e-300;
/// Eigenvalues below -kSpdTolerance reject the input as non-SPD.
inline constexpr double kSpdTolerance = 1e-10;

Matrix spd_log(const Matrix& a);
Matrix spd_power(const Matrix& a, double t);

/// ||log A - log B||_F
double le_exact(const Matrix& a, const Matrix& b);
double le_exact(const operators::SpdOperator& a, const operators::SpdOperator& b);

/// sqrt((log gamma - log mu)^2 + ||log(A/gamma + I) - log(B/mu + I)||_F^2)
double loghs_distance(const Matrix& a, const Matrix& b, double gamma, double mu);

/// ||log(A^-1/2 B A^-1/2)||_F
double ai_exact(const Matrix& a, const Matrix& b);

/// ||A - B||_F
double euclid_exact(const Matrix& a, const Matrix& b);

/// max_t exp(-(t + 1/t)) ||A^t - B^t||_F over the grid.
double specgw_exact(const Matrix& a, const Matrix& b, std::span<const double> t_grid);

/// 256 geometrically spaced points in [1e-2, 1e2] by default.
std::vector<double> default_t_grid(std::size_t count = 256, double lo = 1e-2, double hi = 1e2);

/// max_t exp(-2(t + 1/t)) |sum_i a_i^t - sum_i b_i^t| over the grid, on raw
/// eigenvalues clamped at zero. `gamma` is accepted for symmetry with the LES
/// path and does not enter the formula.
double imd_approx(const Vector& a, const Vector& b, double gamma, std::span<const double> t_grid);
double imd_approx(const spectral::Spectrum& a, const spectral::Spectrum& b, double gamma,
                  std::span<const double> t_grid);

// ---------------------------------------------------------------------------

/// Symmetric, nonnegative, zero diagonal.
struct DistanceMatrix {
  Matrix values;
  std::string method;
  std::vector<std::string> labels;

  Index size() const { return values.rows(); }
};

}  // namespace les::distances
