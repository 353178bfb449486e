#include "les/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "les/data.hpp"
#include "les/error.hpp"

namespace les::analysis {

PairMethod pair_method_from_string(const std::string& s) {
  if (s == "les") return PairMethod::les;
  if (s == "imd" || s == "imd_approx") return PairMethod::imd_approx;
  throw_config("unknown distance method '" + s + "' (expected les or imd)");
}

const char* to_string(PairMethod m) { return m == PairMethod::les ? "les" : "imd_approx"; }

distances::DistanceMatrix pairwise_distance_matrix(
    const std::vector<distances::LesDescriptor>& descriptors, PairMethod method,
    std::span<const double> t_grid) {
  const auto r = static_cast<Index>(descriptors.size());
  if (r < 2) throw_config("pairwise distances need at least 2 descriptors");
  for (Index i = 1; i < r; ++i)
    distances::check_comparable(descriptors[0], descriptors[static_cast<std::size_t>(i)]);

  std::vector<double> default_grid;
  if (method == PairMethod::imd_approx && t_grid.empty()) {
    default_grid = distances::default_t_grid();
    t_grid = default_grid;
  }
  std::vector<Vector> spectra;
  if (method == PairMethod::imd_approx)
    for (const auto& d : descriptors) spectra.push_back(distances::descriptor_spectrum(d));

  distances::DistanceMatrix out;
  out.method = to_string(method);
  out.values = Matrix::Zero(r, r);
  for (const auto& d : descriptors) out.labels.push_back(d.dataset_name);
  for (Index i = 0; i < r; ++i) {
    for (Index j = i + 1; j < r; ++j) {
      const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
      const double v =
          method == PairMethod::les
              ? distances::les_distance(descriptors[ui], descriptors[uj])
              : distances::imd_approx(spectra[ui], spectra[uj], descriptors[ui].gamma, t_grid);
      out.values(i, j) = v;
      out.values(j, i) = v;
    }
  }
  return out;
}

EmbeddingResult diffusion_embed(const distances::DistanceMatrix& d, Index m,
                                double scale_multiplier) {
  const Index r = d.size();
  if (d.values.cols() != r) throw_config("diffusion_embed: distance matrix must be square");
  if (m < 1) throw_config("diffusion_embed: m must be positive");
  if (r < m + 2)
    throw_config("diffusion_embed: need at least m+2=" + std::to_string(m + 2) +
                 " datasets, got " + std::to_string(r));
  if (!(scale_multiplier > 0.0)) throw_config("diffusion_embed: scale multiplier must be positive");

  const Matrix sq = d.values.cwiseProduct(d.values);
  std::vector<double> off;
  for (Index j = 1; j < r; ++j)
    for (Index i = 0; i < j; ++i) off.push_back(sq(i, j));
  const double median = data::median_inplace(off);
  if (!(median > 0.0)) throw_numerical("diffusion_embed: degenerate distance matrix");
  const double sigma2 = scale_multiplier * median;

  Matrix k = (-sq / sigma2).array().exp().matrix();
  const Vector dt = k.rowwise().sum();
  Matrix wt(r, r);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < r; ++j) wt(i, j) = k(i, j) / (dt[i] * dt[j]);
  const Vector dv = wt.rowwise().sum();
  Matrix w(r, r);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < r; ++j) w(i, j) = wt(i, j) / std::sqrt(dv[i] * dv[j]);
  w = 0.5 * (w + w.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> solver(w);
  if (solver.info() != Eigen::Success) throw_numerical("diffusion_embed: eigensolver failed");
  // Ascending order from Eigen; index r-1 is the trivial top eigenpair.
  EmbeddingResult out;
  out.kernel_scale = sigma2;
  out.coords.resize(r, m);
  out.eigvals.resize(m);
  for (Index c = 0; c < m; ++c) {
    const Index src = r - 2 - c;
    const double lambda = solver.eigenvalues()[src];
    Vector v = solver.eigenvectors().col(src);
    Index arg = 0;
    for (Index i = 1; i < r; ++i)
      if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
    if (v[arg] < 0.0) v = -v;
    out.eigvals[c] = lambda;
    out.coords.col(c) = lambda * v;
  }
  return out;
}

double rank_correlation(std::span<const double> values, std::span<const double> reference,
                        CorrelationKind /*kind*/) {
  if (values.size() != reference.size()) throw_config("correlation: lengths differ");
  if (values.size() < 3) throw_config("correlation: need at least 3 entries");
  const auto n = static_cast<double>(values.size());
  const double mx = std::accumulate(values.begin(), values.end(), 0.0) / n;
  const double my = std::accumulate(reference.begin(), reference.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double dx = values[i] - mx;
    const double dy = reference[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw_numerical("correlation: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double dissimilarity_aggregate(std::span<const double> d_list, Aggregate agg) {
  if (d_list.empty()) throw_config("aggregate of an empty list");
  switch (agg) {
    case Aggregate::min:
      return *std::min_element(d_list.begin(), d_list.end());
    case Aggregate::max:
      return *std::max_element(d_list.begin(), d_list.end());
    case Aggregate::mean:
      break;
  }
  return std::accumulate(d_list.begin(), d_list.end(), 0.0) / static_cast<double>(d_list.size());
}

}  // namespace les::analysis
