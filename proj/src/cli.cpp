#include "les/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "les/error.hpp"

namespace les::cli {

namespace fs = std::filesystem;

std::size_t worker_count() {
  if (const char* env = std::getenv("LES_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(worker_count(), count);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace {

/// Input stems, with "-2", "-3", ... appended to repeats.
std::vector<std::string> unique_names(const std::vector<fs::path>& inputs) {
  std::map<std::string, int> seen;
  std::vector<std::string> names;
  for (const auto& p : inputs) {
    const std::string stem = p.stem().string();
    const int n = ++seen[stem];
    names.push_back(n == 1 ? stem : stem + "-" + std::to_string(n));
  }
  return names;
}

void warn_run(std::ostream& warn, const std::string& name, const pipeline::DescriptorRun& run,
              const pipeline::RunConfig& cfg, Index n) {
  if (run.zero_padded)
    warn << "warning: " << name << ": k=" << cfg.k << " exceeds N=" << n
         << "; using the exact spectrum padded with zeros\n";
  if (run.subsampled)
    warn << "warning: " << name << ": kernel scale median estimated from " << cfg.subsample_cap
         << " sampled pairs\n";
}

pipeline::DescriptorRun descriptor_for_file(const fs::path& input, const std::string& name,
                                            const pipeline::RunConfig& cfg, Index& n_out) {
  try {
    data::PointCloud cloud = data::load_point_cloud(input);
    cloud.name = name;
    n_out = cloud.size();
    return pipeline::compute_descriptor(cloud, cfg);
  } catch (const Error& e) {
    throw with_context(e, input.string());
  }
}

std::vector<fs::path> materialize_descriptors(const std::vector<fs::path>& inputs,
                                              const std::vector<std::string>& names,
                                              const pipeline::RunConfig& cfg,
                                              const fs::path& out_dir, std::ostream& warn) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw_io("cannot create directory " + out_dir.string());
  std::vector<fs::path> written(inputs.size());
  std::vector<std::string> warnings(inputs.size());
  parallel_for(inputs.size(), [&](std::size_t i) {
    Index n = 0;
    const auto run = descriptor_for_file(inputs[i], names[i], cfg, n);
    std::ostringstream w;
    warn_run(w, names[i], run, cfg, n);
    warnings[i] = w.str();
    written[i] = out_dir / (names[i] + ".json");
    io::write_descriptor(run.descriptor, written[i]);
  });
  for (const auto& w : warnings) warn << w;
  return written;
}

}  // namespace

std::vector<fs::path> cmd_descriptor(const std::vector<fs::path>& inputs,
                                     const pipeline::RunConfig& cfg, const fs::path& out_dir,
                                     std::ostream& warn) {
  cfg.validate();
  if (inputs.empty()) throw_config("no inputs");
  return materialize_descriptors(inputs, unique_names(inputs), cfg, out_dir, warn);
}

distances::DistanceMatrix cmd_distance(const std::vector<fs::path>& inputs,
                                       const pipeline::RunConfig& cfg,
                                       const DistanceOptions& options, const fs::path& out,
                                       std::ostream& warn) {
  cfg.validate();
  if (inputs.size() < 2) throw_config("distance needs at least 2 inputs");

  const auto names = unique_names(inputs);
  std::vector<distances::LesDescriptor> descriptors(inputs.size());
  std::vector<fs::path> raw;
  std::vector<std::string> raw_names;
  std::vector<std::size_t> raw_slots;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (io::looks_like_descriptor(inputs[i])) {
      descriptors[i] = io::read_descriptor(inputs[i]);
    } else {
      raw.push_back(inputs[i]);
      raw_names.push_back(names[i]);
      raw_slots.push_back(i);
    }
  }
  if (!raw.empty()) {
    const fs::path dir = options.descriptor_dir.empty()
                             ? (out.has_parent_path() ? out.parent_path() : fs::path(".")) /
                                   "descriptors"
                             : options.descriptor_dir;
    const auto written = materialize_descriptors(raw, raw_names, cfg, dir, warn);
    for (std::size_t r = 0; r < raw.size(); ++r)
      descriptors[raw_slots[r]] = io::read_descriptor(written[r]);
  }

  std::ostringstream bad;
  for (std::size_t i = 0; i < descriptors.size(); ++i)
    for (std::size_t j = i + 1; j < descriptors.size(); ++j) {
      const auto& a = descriptors[i];
      const auto& b = descriptors[j];
      if (a.rank_k != b.rank_k || a.gamma != b.gamma)
        bad << "\n  " << inputs[i].string() << " (k=" << a.rank_k << ", gamma=" << a.gamma
            << ") vs " << inputs[j].string() << " (k=" << b.rank_k << ", gamma=" << b.gamma
            << ")";
    }
  if (!bad.str().empty()) throw_config("incompatible descriptors:" + bad.str());

  auto matrix = analysis::pairwise_distance_matrix(descriptors, options.method);
  io::write_text_atomic(out, io::distance_matrix_to_string(matrix, options.format));

  if (options.embed > 0) {
    const auto emb = analysis::diffusion_embed(matrix, options.embed, options.embed_scale);
    fs::path emb_path = out;
    emb_path.replace_extension();
    emb_path += options.format == io::TableFormat::csv ? ".embedding.csv" : ".embedding.json";
    io::write_text_atomic(emb_path, io::embedding_to_string(emb, matrix.labels, options.format));
  }
  return matrix;
}

bench::ToriBenchResult cmd_bench_tori(const bench::ToriBenchConfig& cfg, const fs::path& out) {
  auto result = bench::run_tori_bench(cfg);
  io::write_text_atomic(out, bench::report_json(cfg, result));
  fs::path timings = out;
  timings.replace_extension();
  timings += ".timings.json";
  io::write_text_atomic(timings, bench::timings_json(cfg, result));
  return result;
}

// ---------------------------------------------------------------------------

namespace {

struct RunFlags {
  pipeline::RunConfig cfg;
  std::string mode = "auto";
};

void add_run_flags(CLI::App* app, RunFlags& f) {
  app->add_option("--k", f.cfg.k, "Number of leading eigenvalues")->capture_default_str();
  app->add_option("--m", f.cfg.m, "Sketch size (default 2k)");
  app->add_option("--gamma", f.cfg.gamma, "Log regularization")->capture_default_str();
  app->add_option("--sigma-mult", f.cfg.sigma_multiplier,
                  "sigma^2 = mult * median squared distance")
      ->capture_default_str();
  app->add_option("--seed", f.cfg.seed, "Random seed")->capture_default_str();
  app->add_option("--mode", f.mode, "Operator storage: auto, dense, implicit")
      ->check(CLI::IsMember({"auto", "dense", "implicit"}))
      ->capture_default_str();
  app->add_option("--exact-threshold", f.cfg.exact_threshold,
                  "Use the exact eigensolver up to this many samples")
      ->capture_default_str();
  app->add_option("--subsample-cap", f.cfg.subsample_cap,
                  "Pair budget for the kernel-scale median")
      ->capture_default_str();
}

pipeline::RunConfig finish(RunFlags& f) {
  f.cfg.mode = pipeline::storage_from_string(f.mode);
  f.cfg.validate();
  return f.cfg;
}

std::vector<fs::path> to_paths(const std::vector<std::string>& xs) {
  return {xs.begin(), xs.end()};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Log-Euclidean signature descriptors and distances between datasets", "les"};
  app.require_subcommand(1);

  // descriptor
  RunFlags desc_flags;
  std::vector<std::string> desc_inputs;
  std::string desc_out;
  auto* desc = app.add_subcommand("descriptor", "Compute one descriptor JSON per input");
  desc->add_option("inputs", desc_inputs, "Point cloud files (CSV or binary)")->required();
  desc->add_option("--out", desc_out, "Output directory")->required();
  add_run_flags(desc, desc_flags);

  // distance
  RunFlags dist_flags;
  std::vector<std::string> dist_inputs;
  std::string dist_out, dist_method = "les", dist_format = "csv", dist_desc_dir;
  Index dist_embed = 0;
  double dist_embed_scale = 1.0;
  auto* dist = app.add_subcommand("distance", "Pairwise distances between datasets");
  dist->add_option("inputs", dist_inputs, "Descriptor files or point clouds")->required();
  dist->add_option("--out", dist_out, "Distance matrix file")->required();
  dist->add_option("--method", dist_method, "les or imd")
      ->check(CLI::IsMember({"les", "imd"}))
      ->capture_default_str();
  dist->add_option("--format", dist_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  dist->add_option("--embed", dist_embed, "Also write an m-dimensional diffusion embedding");
  dist->add_option("--embed-scale", dist_embed_scale, "Embedding kernel scale multiplier")
      ->capture_default_str();
  dist->add_option("--desc-dir", dist_desc_dir, "Where descriptors of raw inputs are written");
  add_run_flags(dist, dist_flags);

  // bench-tori
  RunFlags bench_flags;
  bench::ToriBenchConfig bench_cfg;
  std::string bench_out;
  auto* bench_cmd = app.add_subcommand("bench-tori", "Four-tori distance benchmark");
  bench_cmd->add_option("--out", bench_out, "Report JSON")->required();
  bench_cmd->add_option("--c-grid", bench_cfg.c_grid, "Scales c in (0,1]")
      ->delimiter(',')
      ->capture_default_str();
  bench_cmd->add_option("--n-points", bench_cfg.n_points, "Samples per torus")
      ->capture_default_str();
  bench_cmd->add_option("--trials", bench_cfg.trials, "Trials per c")->capture_default_str();
  bench_cmd->add_option("--n-sweep", bench_cfg.n_sweep, "Sample sizes for the stability sweep")
      ->delimiter(',');
  add_run_flags(bench_cmd, bench_flags);

  // generate
  std::string gen_shape = "torus2", gen_out, gen_format = "csv";
  data::ToriConfig gen_cfg;
  auto* gen = app.add_subcommand("generate", "Sample a synthetic torus");
  gen->add_option("--shape", gen_shape, "torus2 or torus3")
      ->check(CLI::IsMember({"torus2", "torus3"}))
      ->capture_default_str();
  gen->add_option("--n", gen_cfg.n_points, "Number of points")->capture_default_str();
  gen->add_option("--c", gen_cfg.c, "Minor radius scale in (0,1]")->capture_default_str();
  gen->add_option("--seed", gen_cfg.seed, "Random seed")->capture_default_str();
  gen->add_option("--format", gen_format, "csv or binary")
      ->check(CLI::IsMember({"csv", "binary"}))
      ->capture_default_str();
  gen->add_option("--out", gen_out, "Output file")->required();

  std::vector<const char*> argv;
  argv.push_back("les");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*desc) {
      const auto written =
          cmd_descriptor(to_paths(desc_inputs), finish(desc_flags), desc_out, err);
      for (const auto& p : written) out << p.string() << "\n";
    } else if (*dist) {
      DistanceOptions opt;
      opt.method = analysis::pair_method_from_string(dist_method);
      opt.format = io::table_format_from_string(dist_format);
      opt.embed = dist_embed;
      opt.embed_scale = dist_embed_scale;
      opt.descriptor_dir = dist_desc_dir;
      cmd_distance(to_paths(dist_inputs), finish(dist_flags), opt, dist_out, err);
      out << dist_out << "\n";
    } else if (*bench_cmd) {
      bench_cfg.run = finish(bench_flags);
      const auto result = cmd_bench_tori(bench_cfg, bench_out);
      for (const auto& sr : result.scales) {
        out << "c=" << sr.c;
        for (std::size_t p = 0; p < bench::kPairs.size(); ++p)
          out << "  " << bench::kPairNames[p] << "=" << bench::summarize(sr.les[p]).mean;
        out << "\n";
      }
      out << bench_out << "\n";
    } else if (*gen) {
      const auto cloud =
          gen_shape == "torus2" ? data::generate_torus2(gen_cfg) : data::generate_torus3(gen_cfg);
      data::save_point_cloud(
          cloud, gen_out, gen_format == "csv" ? data::FileFormat::csv : data::FileFormat::binary_f64);
      out << gen_out << "\n";
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace les::cli
