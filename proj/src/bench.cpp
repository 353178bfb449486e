#include "les/bench.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "les/analysis.hpp"
#include "les/error.hpp"
#include "les/random.hpp"

namespace les::bench {

using ojson = nlohmann::ordered_json;

int pair_index(Shape a, Shape b) {
  for (std::size_t p = 0; p < kPairs.size(); ++p)
    if ((kPairs[p][0] == a && kPairs[p][1] == b) || (kPairs[p][0] == b && kPairs[p][1] == a))
      return static_cast<int>(p);
  throw_config("no such tori pair");
}

void ToriBenchConfig::validate() const {
  run.validate();
  if (c_grid.empty()) throw_config("c grid is empty");
  for (double c : c_grid)
    if (!(c > 0.0) || c > 1.0) throw_config("every c must lie in (0, 1]");
  if (n_points < 2) throw_config("n_points must be at least 2");
  if (trials < 1) throw_config("trials must be positive");
  for (Index n : n_sweep)
    if (n < 2) throw_config("sweep sizes must be at least 2");
  data::ToriConfig probe = shape;
  probe.n_points = n_points;
  probe.c = 1.0;
  probe.validate();
}

Stats summarize(const std::vector<double>& xs) {
  Stats s;
  if (xs.empty()) return s;
  const auto n = static_cast<double>(xs.size());
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

namespace {

data::PointCloud sample_shape(const data::ToriConfig& base, Shape shape, double c, Index n,
                              std::uint64_t seed) {
  data::ToriConfig cfg = base;
  cfg.n_points = n;
  cfg.seed = seed;
  cfg.c = (shape == kT2Scaled || shape == kT3Scaled) ? c : 1.0;
  return (shape == kT2 || shape == kT2Scaled) ? data::generate_torus2(cfg)
                                               : data::generate_torus3(cfg);
}

}  // namespace

ToriBenchResult run_tori_bench(const ToriBenchConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::vector<double> grid = cfg.t_grid.empty() ? distances::default_t_grid() : cfg.t_grid;
  ToriBenchResult result;
  std::uint64_t stream = 0;

  for (double c : cfg.c_grid) {
    ScaleResult sr;
    sr.c = c;
    double seconds = 0.0;
    int count = 0;
    for (int trial = 0; trial < cfg.trials; ++trial) {
      std::array<distances::LesDescriptor, 4> desc;
      std::array<Vector, 4> spectra;
      for (int s = 0; s < 4; ++s) {
        const auto cloud = sample_shape(cfg.shape, static_cast<Shape>(s), c, cfg.n_points,
                                        derive_seed(cfg.run.seed, stream++));
        auto run = pipeline::compute_descriptor(cloud, cfg.run);
        seconds += run.seconds;
        ++count;
        desc[static_cast<std::size_t>(s)] = std::move(run.descriptor);
        spectra[static_cast<std::size_t>(s)] = std::move(run.spectrum.values);
      }
      for (std::size_t p = 0; p < kPairs.size(); ++p) {
        const auto a = static_cast<std::size_t>(kPairs[p][0]);
        const auto b = static_cast<std::size_t>(kPairs[p][1]);
        sr.les[p].push_back(distances::les_distance(desc[a], desc[b]));
        sr.imd[p].push_back(distances::imd_approx(spectra[a], spectra[b], cfg.run.gamma, grid));
      }
    }
    sr.descriptor_seconds = seconds / count;
    result.scales.push_back(std::move(sr));
  }

  for (Index n : cfg.n_sweep) {
    SweepPoint sp;
    sp.n = n;
    double seconds = 0.0;
    for (int trial = 0; trial < cfg.trials; ++trial) {
      auto a = pipeline::compute_descriptor(
          sample_shape(cfg.shape, kT2, 1.0, n, derive_seed(cfg.run.seed, stream++)), cfg.run);
      auto b = pipeline::compute_descriptor(
          sample_shape(cfg.shape, kT3, 1.0, n, derive_seed(cfg.run.seed, stream++)), cfg.run);
      seconds += a.seconds + b.seconds;
      sp.d_t2_t3.push_back(distances::les_distance(a.descriptor, b.descriptor));
    }
    sp.descriptor_seconds = seconds / (2.0 * cfg.trials);
    result.sweep.push_back(std::move(sp));
  }
  if (!result.sweep.empty()) {
    std::size_t ref = 0;
    for (std::size_t i = 1; i < result.sweep.size(); ++i)
      if (result.sweep[i].n > result.sweep[ref].n) ref = i;
    const double denom = summarize(result.sweep[ref].d_t2_t3).mean;
    for (auto& sp : result.sweep)
      sp.ratio = denom > 0.0 ? summarize(sp.d_t2_t3).mean / denom : 0.0;
  }

  result.total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

// ---------------------------------------------------------------------------

namespace {

ojson stats_json(const std::vector<double>& xs) {
  const Stats s = summarize(xs);
  ojson j;
  j["mean"] = s.mean;
  j["std"] = s.std;
  j["trials"] = xs;
  return j;
}

}  // namespace

std::string report_json(const ToriBenchConfig& cfg, const ToriBenchResult& result) {
  ojson j;
  j["schema"] = kReportSchema;
  ojson c;
  c["k"] = cfg.run.k;
  c["m"] = cfg.run.sketch_size();
  c["gamma"] = cfg.run.gamma;
  c["sigma_multiplier"] = cfg.run.sigma_multiplier;
  c["seed"] = cfg.run.seed;
  c["exact_threshold"] = cfg.run.exact_threshold;
  c["n_points"] = cfg.n_points;
  c["trials"] = cfg.trials;
  c["R1"] = cfg.shape.R1;
  c["R2"] = cfg.shape.R2;
  c["R3"] = cfg.shape.R3;
  c["c_grid"] = cfg.c_grid;
  c["n_sweep"] = cfg.n_sweep;
  c["t_grid_size"] = cfg.t_grid.empty() ? 256 : cfg.t_grid.size();
  j["config"] = std::move(c);
  j["pairs"] = kPairNames;
  ojson scales = ojson::array();
  for (const auto& sr : result.scales) {
    ojson s;
    s["c"] = sr.c;
    ojson les, imd;
    for (std::size_t p = 0; p < kPairs.size(); ++p) {
      les[kPairNames[p]] = stats_json(sr.les[p]);
      imd[kPairNames[p]] = stats_json(sr.imd[p]);
    }
    s["les"] = std::move(les);
    s["imd"] = std::move(imd);
    scales.push_back(std::move(s));
  }
  j["scales"] = std::move(scales);
  ojson stability = ojson::array();
  for (const auto& sp : result.sweep) {
    ojson s;
    s["n"] = sp.n;
    s["d_T2_T3"] = stats_json(sp.d_t2_t3);
    s["ratio"] = sp.ratio;
    stability.push_back(std::move(s));
  }
  j["stability"] = std::move(stability);
  return j.dump(2) + "\n";
}

std::string timings_json(const ToriBenchConfig& cfg, const ToriBenchResult& result) {
  ojson j;
  j["schema"] = "les-tori-bench-timings-v1";
  j["total_seconds"] = result.total_seconds;
  ojson scales = ojson::array();
  for (std::size_t i = 0; i < result.scales.size(); ++i) {
    ojson s;
    s["c"] = cfg.c_grid[i];
    s["n"] = cfg.n_points;
    s["descriptor_seconds"] = result.scales[i].descriptor_seconds;
    scales.push_back(std::move(s));
  }
  j["scales"] = std::move(scales);
  ojson sweep = ojson::array();
  for (const auto& sp : result.sweep) {
    ojson s;
    s["n"] = sp.n;
    s["descriptor_seconds"] = sp.descriptor_seconds;
    sweep.push_back(std::move(s));
  }
  j["stability"] = std::move(sweep);
  return j.dump(2) + "\n";
}

std::vector<std::string> validate_report(const std::string& text) {
  std::vector<std::string> problems;
  const ojson j = ojson::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return {"report is not a JSON object"};
  auto need = [&](const ojson& obj, const char* key, bool (ojson::*is)() const noexcept,
                  const std::string& where) -> bool {
    if (!obj.is_object() || !obj.contains(key) || !(obj.at(key).*is)()) {
      problems.push_back(where + ": missing or mistyped '" + key + "'");
      return false;
    }
    return true;
  };
  if (j.value("schema", std::string()) != kReportSchema)
    problems.push_back("schema tag is not " + std::string(kReportSchema));
  if (need(j, "config", &ojson::is_object, "report")) {
    const auto& c = j.at("config");
    for (const char* key : {"k", "m", "n_points", "trials", "seed"})
      need(c, key, &ojson::is_number_integer, "config");
    for (const char* key : {"gamma", "sigma_multiplier", "R1", "R2", "R3"})
      need(c, key, &ojson::is_number, "config");
    need(c, "c_grid", &ojson::is_array, "config");
    need(c, "n_sweep", &ojson::is_array, "config");
  }
  if (need(j, "pairs", &ojson::is_array, "report") && j.at("pairs").size() != kPairs.size())
    problems.push_back("report: expected 6 pairs");
  auto check_stats = [&](const ojson& s, const std::string& where) {
    if (need(s, "mean", &ojson::is_number, where) && s.at("mean").get<double>() < 0.0)
      problems.push_back(where + ": negative mean");
    need(s, "std", &ojson::is_number, where);
    need(s, "trials", &ojson::is_array, where);
  };
  if (need(j, "scales", &ojson::is_array, "report")) {
    if (j.contains("config") && j.at("config").contains("c_grid") &&
        j.at("scales").size() != j.at("config").at("c_grid").size())
      problems.push_back("report: one scale entry per c expected");
    std::size_t i = 0;
    for (const auto& s : j.at("scales")) {
      const std::string where = "scales[" + std::to_string(i++) + "]";
      need(s, "c", &ojson::is_number, where);
      for (const char* method : {"les", "imd"}) {
        if (!need(s, method, &ojson::is_object, where)) continue;
        for (const char* pair : kPairNames) {
          const std::string w = where + "." + method + "." + pair;
          if (need(s.at(method), pair, &ojson::is_object, where + "." + method))
            check_stats(s.at(method).at(pair), w);
        }
      }
    }
  }
  if (need(j, "stability", &ojson::is_array, "report")) {
    std::size_t i = 0;
    for (const auto& s : j.at("stability")) {
      const std::string where = "stability[" + std::to_string(i++) + "]";
      need(s, "n", &ojson::is_number_integer, where);
      need(s, "ratio", &ojson::is_number, where);
      if (need(s, "d_T2_T3", &ojson::is_object, where)) check_stats(s.at("d_T2_T3"), where);
    }
  }
  return problems;
}

}  // namespace les::bench
