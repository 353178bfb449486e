#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "les/analysis.hpp"
#include "les/bench.hpp"
#include "les/pipeline.hpp"
#include "les/serialization.hpp"

namespace les::cli {

/// Entry point behind the `les` binary. Returns the process exit code:
/// 0 success, 1 I/O error, 2 configuration or comparability error,
/// 3 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Worker count: LES_THREADS if set to a positive integer, otherwise the
/// hardware concurrency.
std::size_t worker_count();

/// Calls fn(i) for i in [0, count) on up to worker_count() threads. Every
/// index runs; the exception of the lowest failing index is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

/// One descriptor JSON per input under `out_dir` (named after the input
/// stem). Returns the written paths in input order.
std::vector<std::filesystem::path> cmd_descriptor(const std::vector<std::filesystem::path>& inputs,
                                                  const pipeline::RunConfig& cfg,
                                                  const std::filesystem::path& out_dir,
                                                  std::ostream& warn);

struct DistanceOptions {
  analysis::PairMethod method = analysis::PairMethod::les;
  io::TableFormat format = io::TableFormat::csv;
  Index embed = 0;  // 0: no embedding
  double embed_scale = 1.0;
  /// Where descriptors of raw inputs are materialized; empty means a
  /// "descriptors" directory next to the output file.
  std::filesystem::path descriptor_dir;
};

/// Inputs may be descriptor files or raw point clouds. Writes the distance
/// matrix to `out`, plus `<stem>.embedding.<ext>` when embedding is on.
distances::DistanceMatrix cmd_distance(const std::vector<std::filesystem::path>& inputs,
                                       const pipeline::RunConfig& cfg,
                                       const DistanceOptions& options,
                                       const std::filesystem::path& out, std::ostream& warn);

/// Writes the report to `out` and the wall-clock timings to
/// `<stem>.timings.json` next to it.
bench::ToriBenchResult cmd_bench_tori(const bench::ToriBenchConfig& cfg,
                                      const std::filesystem::path& out);

}  // namespace les::cli
