#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "les/cli.hpp"
#include "les/error.hpp"
#include "support.hpp"

using namespace les;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

void generate(const fs::path& p, const std::string& shape, int n, int seed, double c = 1.0) {
  const auto r = run({"generate", "--shape", shape, "--n", std::to_string(n), "--seed",
                      std::to_string(seed), "--c", std::to_string(c), "--out", p.string()});
  REQUIRE(r.code == 0);
}

nlohmann::json without_name(const fs::path& p) {
  auto j = nlohmann::json::parse(support::slurp(p));
  j.erase("name");
  return j;
}

}  // namespace

TEST_CASE("descriptor: identical inputs give identical payloads") {
  support::TempDir tmp;
  generate(tmp / "a.csv", "torus2", 120, 1);
  fs::copy_file(tmp / "a.csv", tmp / "b.csv");
  const auto r = run({"descriptor", (tmp / "a.csv").string(), (tmp / "b.csv").string(), "--k",
                      "20", "--out", (tmp / "desc").string()});
  REQUIRE(r.code == 0);
  CHECK(without_name(tmp / "desc" / "a.json") == without_name(tmp / "desc" / "b.json"));
  CHECK(r.err.empty());
}

TEST_CASE("descriptor: k above N pads with zeros and warns") {
  support::TempDir tmp;
  generate(tmp / "s.csv", "torus2", 30, 2);
  const auto r = run({"descriptor", (tmp / "s.csv").string(), "--k", "50", "--out",
                      (tmp / "d").string()});
  REQUIRE(r.code == 0);
  CHECK(r.err.find("warning") != std::string::npos);
  CHECK(r.err.find("k=50") != std::string::npos);
  const auto j = nlohmann::json::parse(support::slurp(tmp / "d" / "s.json"));
  CHECK(j["f"].size() == 50);
  CHECK(j["f"][49].get<double>() == std::log(1e-8));
  CHECK(j["method"] == "exact");
}

TEST_CASE("descriptor: subsampled median warns") {
  support::TempDir tmp;
  generate(tmp / "s.csv", "torus2", 60, 2);
  const auto r = run({"descriptor", (tmp / "s.csv").string(), "--k", "5", "--subsample-cap",
                      "100", "--out", (tmp / "d").string()});
  REQUIRE(r.code == 0);
  CHECK(r.err.find("sampled pairs") != std::string::npos);
}

TEST_CASE("descriptor: T2 with defaults starts at log(1 + gamma)") {
  support::TempDir tmp;
  generate(tmp / "t2.csv", "torus2", 1000, 3);
  const auto r = run({"descriptor", (tmp / "t2.csv").string(), "--out", (tmp / "d").string()});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(support::slurp(tmp / "d" / "t2.json"));
  CHECK(j["k"] == 200);
  CHECK(std::abs(j["f"][0].get<double>() - std::log(1 + 1e-8)) < 1e-6);
}

TEST_CASE("distance: same file twice on both solver paths") {
  support::TempDir tmp;
  generate(tmp / "x.csv", "torus3", 200, 4);
  fs::copy_file(tmp / "x.csv", tmp / "y.csv");
  auto r = run({"distance", (tmp / "x.csv").string(), (tmp / "y.csv").string(), "--k", "30",
                "--out", (tmp / "exact.json").string(), "--format", "json"});
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(support::slurp(tmp / "exact.json"));
  CHECK(j["values"][0][1].get<double>() == 0.0);
  CHECK(fs::exists(tmp / "descriptors" / "x.json"));

  r = run({"distance", (tmp / "x.csv").string(), (tmp / "y.csv").string(), "--k", "30",
           "--exact-threshold", "0", "--desc-dir", (tmp / "nys").string(), "--out",
           (tmp / "nys.json").string(), "--format", "json"});
  REQUIRE(r.code == 0);
  j = nlohmann::json::parse(support::slurp(tmp / "nys.json"));
  CHECK(j["values"][0][1].get<double>() < 1e-6);
  CHECK(nlohmann::json::parse(support::slurp(tmp / "nys" / "x.json"))["method"] == "nystrom");
}

TEST_CASE("distance: mixed gamma is a comparability error naming both files") {
  support::TempDir tmp;
  generate(tmp / "p.csv", "torus2", 80, 5);
  generate(tmp / "q.csv", "torus2", 80, 6);
  REQUIRE(run({"descriptor", (tmp / "p.csv").string(), "--k", "10", "--gamma", "1e-8", "--out",
               (tmp / "g8").string()})
              .code == 0);
  REQUIRE(run({"descriptor", (tmp / "q.csv").string(), "--k", "10", "--gamma", "1e-5", "--out",
               (tmp / "g5").string()})
              .code == 0);
  const auto a = (tmp / "g8" / "p.json").string();
  const auto b = (tmp / "g5" / "q.json").string();
  const auto r = run({"distance", a, b, "--out", (tmp / "d.csv").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find(a) != std::string::npos);
  CHECK(r.err.find(b) != std::string::npos);
  CHECK_FALSE(fs::exists(tmp / "d.csv"));
}

TEST_CASE("distance: four descriptors match library calls, embedding written") {
  support::TempDir tmp;
  std::vector<std::string> files;
  const char* shapes[] = {"torus2", "torus2", "torus3", "torus3"};
  for (int i = 0; i < 4; ++i) {
    const auto p = tmp / ("s" + std::to_string(i) + ".csv");
    generate(p, shapes[i], 90, 10 + i, i % 2 ? 0.5 : 1.0);
    files.push_back(p.string());
  }
  auto args = std::vector<std::string>{"descriptor"};
  args.insert(args.end(), files.begin(), files.end());
  args.insert(args.end(), {std::string("--k"), "12", "--out", (tmp / "d").string()});
  REQUIRE(run(args).code == 0);

  std::vector<std::string> descs;
  std::vector<distances::LesDescriptor> loaded;
  for (int i = 0; i < 4; ++i) {
    descs.push_back((tmp / "d" / ("s" + std::to_string(i) + ".json")).string());
    loaded.push_back(io::read_descriptor(descs.back()));
  }
  args = {"distance"};
  args.insert(args.end(), descs.begin(), descs.end());
  args.insert(args.end(), {std::string("--out"), (tmp / "m.csv").string(), "--embed", "2"});
  REQUIRE(run(args).code == 0);

  const auto m =
      io::distance_matrix_from_string(support::slurp(tmp / "m.csv"), io::TableFormat::csv);
  REQUIRE(m.size() == 4);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j) {
      CHECK(m.values(i, j) == m.values(j, i));
      if (i != j)
        CHECK(m.values(i, j) == distances::les_distance(loaded[static_cast<std::size_t>(i)],
                                                        loaded[static_cast<std::size_t>(j)]));
    }
  const auto emb = support::slurp(tmp / "m.embedding.csv");
  CHECK(emb.rfind("label,f1,f2\ns0,", 0) == 0);

  args = {"distance"};
  args.insert(args.end(), descs.begin(), descs.end());
  args.insert(args.end(), {std::string("--out"), (tmp / "imd.csv").string(), "--method", "imd"});
  REQUIRE(run(args).code == 0);
  CHECK(fs::exists(tmp / "imd.csv"));
}

TEST_CASE("bench-tori: schema-valid, byte-deterministic report with a timings sidecar") {
  support::TempDir tmp;
  const std::vector<std::string> base = {"bench-tori", "--k", "8",  "--n-points", "60",
                                         "--trials",   "2",   "--c-grid", "1,0.5",
                                         "--n-sweep",  "30,60"};
  auto a = base, b = base;
  a.insert(a.end(), {std::string("--out"), (tmp / "a.json").string()});
  b.insert(b.end(), {std::string("--out"), (tmp / "b.json").string()});
  REQUIRE(run(a).code == 0);
  REQUIRE(run(b).code == 0);
  const auto text = support::slurp(tmp / "a.json");
  CHECK(text == support::slurp(tmp / "b.json"));
  CHECK(bench::validate_report(text).empty());
  CHECK(fs::exists(tmp / "a.timings.json"));
  const auto j = nlohmann::json::parse(text);
  CHECK(j["scales"].size() == 2);
  CHECK(j["stability"].size() == 2);
}

TEST_CASE("exit codes") {
  support::TempDir tmp;
  CHECK(run({}).code == 2);
  CHECK(run({"descriptor", "--out", (tmp / "x").string()}).code == 2);
  CHECK(run({"descriptor", (tmp / "missing.csv").string(), "--out", (tmp / "x").string()}).code ==
        1);
  generate(tmp / "ok.csv", "torus2", 40, 1);
  CHECK(run({"descriptor", (tmp / "ok.csv").string(), "--k", "10", "--m", "5", "--out",
             (tmp / "x").string()})
            .code == 2);
  CHECK(run({"descriptor", (tmp / "ok.csv").string(), "--gamma", "2", "--out",
             (tmp / "x").string()})
            .code == 2);
  support::write_file(tmp / "dup.csv", "1,1\n1,1\n1,1\n");
  const auto r = run({"descriptor", (tmp / "dup.csv").string(), "--out", (tmp / "x").string()});
  CHECK(r.code == 3);
  CHECK(r.err.find("dup.csv") != std::string::npos);
  CHECK(run({"distance", (tmp / "ok.csv").string(), "--out", (tmp / "y.csv").string()}).code ==
        2);
  CHECK(run({"--help"}).code == 0);
  CHECK(exit_code(ErrorKind::io) == 1);
  CHECK(exit_code(ErrorKind::config) == 2);
  CHECK(exit_code(ErrorKind::numerical) == 3);
}

TEST_CASE("worker pool: every index runs and the lowest failure wins") {
  ::setenv("LES_THREADS", "3", 1);
  CHECK(cli::worker_count() == 3);
  std::vector<int> hits(50, 0);
  cli::parallel_for(50, [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::count(hits.begin(), hits.end(), 1) == 50);
  try {
    cli::parallel_for(20, [](std::size_t i) {
      if (i == 7 || i == 13) throw_config("fail " + std::to_string(i));
    });
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()) == "fail 7");
  }
  ::setenv("LES_THREADS", "bogus", 1);
  CHECK(cli::worker_count() >= 1);
  ::unsetenv("LES_THREADS");
}
