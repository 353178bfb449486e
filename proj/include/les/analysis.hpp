#pragma once

#include <span>
#include <vector>

#include "les/distances.hpp"
#include "les/types.hpp"

namespace les::analysis {

enum class PairMethod { les, imd_approx };

PairMethod pair_method_from_string(const std::string& s);
const char* to_string(PairMethod m);

/// All pairwise distances between mutually comparable descriptors. The IMD
/// variant works on the spectra recovered from the descriptors.
distances::DistanceMatrix pairwise_distance_matrix(
    const std::vector<distances::LesDescriptor>& descriptors, PairMethod method = PairMethod::les,
    std::span<const double> t_grid = {});

struct EmbeddingResult {
  Matrix coords;  // r x m, column c = eigenvalue_c * eigenvector_c
  Vector eigvals;
  double kernel_scale = 0.0;  // sigma^2 used on the distance matrix
};

/// Diffusion-map embedding of a distance matrix. Gaussian kernel with
/// sigma^2 = scale_multiplier * median of squared off-diagonal distances,
/// the same two-stage normalization as the data operator, then the leading
/// nontrivial eigenvectors of the symmetric conjugate scaled by their
/// eigenvalues. Each column's largest-magnitude entry is made positive.
/// Requires r >= m + 2.
EmbeddingResult diffusion_embed(const distances::DistanceMatrix& d, Index m,
                                double scale_multiplier = 1.0);

enum class CorrelationKind { pearson };

/// Needs at least 3 entries and nonzero variance on both sides.
double rank_correlation(std::span<const double> values, std::span<const double> reference,
                        CorrelationKind kind = CorrelationKind::pearson);

enum class Aggregate { mean, min, max };

double dissimilarity_aggregate(std::span<const double> d_list, Aggregate agg = Aggregate::mean);

}  // namespace les::analysis
