#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "les/types.hpp"

namespace les::data {

enum class Source { file, generator };

/// N samples (rows) with d real features.
struct PointCloud {
  RowMatrix points;
  std::string name;
  Source source = Source::generator;
  std::optional<std::uint64_t> seed;

  Index size() const { return points.rows(); }
  Index dim() const { return points.cols(); }
};

/// Throws les::Error (config) unless N >= 2, d >= 1 and every entry is finite.
void validate(const PointCloud& cloud);

PointCloud make_point_cloud(RowMatrix points, std::string name, Source source = Source::generator,
                            std::optional<std::uint64_t> seed = std::nullopt);

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

enum class FileFormat { csv, binary_f64 };

/// Magic prefix of the binary format: "LESPC1" followed by one NUL byte.
inline constexpr char kBinaryMagic[7] = {'L', 'E', 'S', 'P', 'C', '1', '\0'};

/// Binary if the file starts with the magic bytes, CSV otherwise.
FileFormat detect_format(const std::filesystem::path& path);

/// CSV: comma and/or whitespace separated numeric columns, one sample per
/// line; blank lines and lines starting with '#' are skipped.
/// Binary: magic, u64 LE N, u64 LE d, then N*d LE f64 in row-major order.
/// Errors name the offending row (1-based data row).
PointCloud load_point_cloud(const std::filesystem::path& path, FileFormat format);
PointCloud load_point_cloud(const std::filesystem::path& path);

void save_point_cloud(const PointCloud& cloud, const std::filesystem::path& path, FileFormat format);

// ---------------------------------------------------------------------------
// Synthetic tori
// ---------------------------------------------------------------------------

struct ToriConfig {
  double R1 = 10.0;  // major radius
  double R2 = 3.0;   // first minor radius
  double R3 = 1.0;   // second minor radius (T3 only)
  double c = 1.0;    // scale in (0, 1]: R2 -> c*R2 for T2, R3 -> c*R3 for T3
  Index n_points = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

Eigen::Vector3d torus2_point(double R1, double R2, double theta1, double theta2);
Eigen::Vector4d torus3_point(double R1, double R2, double R3, double theta1, double theta2,
                             double theta3);

/// Angles are drawn column by column (all theta1, then all theta2, then all
/// theta3), so T2 and T3 generated from the same seed share theta1 and theta2.
PointCloud generate_torus2(const ToriConfig& cfg);
PointCloud generate_torus3(const ToriConfig& cfg);

// ---------------------------------------------------------------------------
// Distances and kernel scale
// ---------------------------------------------------------------------------

using SqDistanceFn = std::function<double(std::span<const double>, std::span<const double>)>;

/// Squared distance between two samples. Euclidean by default; any callback
/// returning a finite nonnegative squared distance can be plugged in.
class Metric {
 public:
  static Metric euclidean();
  static Metric custom(std::string name, SqDistanceFn fn);

  double sq_distance(const double* a, const double* b, Index dim) const;
  const std::string& name() const { return name_; }
  bool is_euclidean() const { return !fn_; }

 private:
  Metric(std::string name, SqDistanceFn fn) : name_(std::move(name)), fn_(std::move(fn)) {}

  std::string name_;
  SqDistanceFn fn_;
};

/// Symmetric N x N matrix of squared distances with an exact zero diagonal.
Matrix pairwise_sq_dists(const PointCloud& cloud, const Metric& metric = Metric::euclidean());

inline constexpr std::size_t kDefaultSubsampleCap = 2'000'000;

/// True when N(N-1)/2 exceeds the cap, i.e. the median will be estimated.
bool kernel_scale_subsamples(Index n, std::size_t subsample_cap);

/// sigma^2 = multiplier * median of the off-diagonal squared distances. When
/// there are more than `subsample_cap` pairs the median is taken over
/// `subsample_cap` pairs drawn uniformly (with replacement) using `seed`.
/// Throws numerical "degenerate distances" when that median is zero.
double kernel_scale(const Matrix& sq_dists, double multiplier,
                    std::size_t subsample_cap = kDefaultSubsampleCap, std::uint64_t seed = 0);

/// Same rule evaluated straight from the samples, without forming N x N.
double kernel_scale(const PointCloud& cloud, double multiplier,
                    std::size_t subsample_cap = kDefaultSubsampleCap, std::uint64_t seed = 0,
                    const Metric& metric = Metric::euclidean());

/// Median with the mean-of-middle-pair convention for even counts.
/// Reorders `values`.
double median_inplace(std::span<double> values);

}  // namespace les::data
