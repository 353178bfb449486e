#pragma once

#include <array>
#include <string>
#include <vector>

#include "les/data.hpp"
#include "les/pipeline.hpp"

namespace les::bench {

inline constexpr const char* kReportSchema = "les-tori-bench-v1";

/// The four tori are T2, T2 with minor radius c*R2, T3, T3 with c*R3.
enum Shape : int { kT2 = 0, kT2Scaled = 1, kT3 = 2, kT3Scaled = 3 };

/// The six unordered pairs of the four tori, in report order.
inline constexpr std::array<std::array<int, 2>, 6> kPairs = {
    {{kT2, kT2Scaled}, {kT2, kT3}, {kT2, kT3Scaled}, {kT2Scaled, kT3}, {kT2Scaled, kT3Scaled},
     {kT3, kT3Scaled}}};
inline constexpr std::array<const char*, 6> kPairNames = {
    "T2-T2sc", "T2-T3", "T2-T3sc", "T2sc-T3", "T2sc-T3sc", "T3-T3sc"};

int pair_index(Shape a, Shape b);

struct ToriBenchConfig {
  pipeline::RunConfig run;
  data::ToriConfig shape;  // radii; c and seed are set per sample
  std::vector<double> c_grid = {1.0, 0.8, 0.6, 0.4, 0.2};
  Index n_points = 1000;
  int trials = 10;
  /// Sample sizes for the d(T2, T3) stability sweep; empty skips it.
  std::vector<Index> n_sweep;
  /// Grid for the IMD comparison; empty means the default grid.
  std::vector<double> t_grid;

  void validate() const;
};

struct Stats {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single trial
};

Stats summarize(const std::vector<double>& xs);

struct ScaleResult {
  double c = 1.0;
  std::array<std::vector<double>, 6> les;  // per trial
  std::array<std::vector<double>, 6> imd;
  double descriptor_seconds = 0.0;  // mean wall time per descriptor
};

struct SweepPoint {
  Index n = 0;
  std::vector<double> d_t2_t3;  // per trial
  double ratio = 0.0;            // mean at n / mean at the largest n
  double descriptor_seconds = 0.0;
};

struct ToriBenchResult {
  std::vector<ScaleResult> scales;
  std::vector<SweepPoint> sweep;
  double total_seconds = 0.0;
};

/// Every (c, trial) draws the four tori independently, so no sample shares
/// angles with another; seeds derive from run.seed.
ToriBenchResult run_tori_bench(const ToriBenchConfig& cfg);

/// Deterministic report (no wall-clock values).
std::string report_json(const ToriBenchConfig& cfg, const ToriBenchResult& result);
/// Wall-clock timings, written next to the report.
std::string timings_json(const ToriBenchConfig& cfg, const ToriBenchResult& result);

/// Structural check of a report against the documented schema; returns the
/// list of problems (empty when valid).
std::vector<std::string> validate_report(const std::string& text);

}  // namespace les::bench
