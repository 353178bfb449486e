#pragma once

#include <cstdint>

#include "les/data.hpp"
#include "les/distances.hpp"
#include "les/operator.hpp"
#include "les/spectral.hpp"

namespace les::pipeline {

/// Descriptor settings shared by every command.
struct RunConfig {
  Index k = 200;
  Index m = 0;  // 0 means 2k
  double gamma = 1e-8;
  double sigma_multiplier = 2.0;
  std::uint64_t seed = 0;
  operators::StorageRequest mode = operators::StorageRequest::automatic;
  Index exact_threshold = spectral::kExactAutoLimit;
  std::size_t subsample_cap = data::kDefaultSubsampleCap;

  Index sketch_size() const { return m > 0 ? m : 2 * k; }
  /// Throws config on k < 1, m < k+2, gamma outside (0, 1), nonpositive multiplier.
  void validate() const;
};

operators::StorageRequest storage_from_string(const std::string& s);

struct DescriptorRun {
  distances::LesDescriptor descriptor;
  spectral::Spectrum spectrum;
  double sigma2 = 0.0;
  bool zero_padded = false;  // k > N: exact spectrum padded with zeros
  bool subsampled = false;   // kernel-scale median estimated from a pair sample
  double seconds = 0.0;
};

/// sigma^2 from the median rule, operator, spectrum (exact when N is at most
/// the exact threshold or below k, Nystrom otherwise), then the descriptor.
DescriptorRun compute_descriptor(const data::PointCloud& cloud, const RunConfig& cfg,
                                 const data::Metric& metric = data::Metric::euclidean());

}  // namespace les::pipeline
