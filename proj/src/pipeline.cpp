#include "les/pipeline.hpp"

#include <chrono>

#include "les/error.hpp"

namespace les::pipeline {

void RunConfig::validate() const {
  if (k < 1) throw_config("k must be positive");
  if (sketch_size() < k + 2)
    throw_config("m=" + std::to_string(sketch_size()) + " must be at least k+2=" +
                 std::to_string(k + 2));
  if (!(gamma > 0.0) || !(gamma < 1.0)) throw_config("gamma must lie in (0, 1)");
  if (!(sigma_multiplier > 0.0)) throw_config("sigma multiplier must be positive");
  if (exact_threshold < 0) throw_config("exact threshold must be nonnegative");
  if (subsample_cap == 0) throw_config("subsample cap must be positive");
}

operators::StorageRequest storage_from_string(const std::string& s) {
  if (s == "auto") return operators::StorageRequest::automatic;
  if (s == "dense") return operators::StorageRequest::dense;
  if (s == "implicit") return operators::StorageRequest::implicit;
  throw_config("unknown mode '" + s + "' (expected auto, dense or implicit)");
}

DescriptorRun compute_descriptor(const data::PointCloud& cloud, const RunConfig& cfg,
                                 const data::Metric& metric) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  DescriptorRun run;
  run.subsampled = data::kernel_scale_subsamples(cloud.size(), cfg.subsample_cap);
  run.sigma2 =
      data::kernel_scale(cloud, cfg.sigma_multiplier, cfg.subsample_cap, cfg.seed, metric);
  const auto op = operators::build_operator(cloud, run.sigma2, cfg.mode, metric);
  run.zero_padded = cfg.k > cloud.size();
  run.spectrum =
      spectral::estimate_spectrum(op, cfg.k, cfg.sketch_size(), cfg.seed, cfg.exact_threshold);
  run.descriptor = distances::les_descriptor(run.spectrum, cfg.gamma, cloud.name,
                                             {cfg.sigma_multiplier, metric.name()});
  run.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

}  // namespace les::pipeline
