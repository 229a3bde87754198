#include "aqmlab/cli.hpp"
#include "aqmlab/som.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace aqmlab;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "aqmlab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::size_t line_count(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

} // namespace

TEST_CASE("cli: usage errors") {
  CHECK(cli({}).code != 0);
  CHECK(cli({"frobnicate"}).code != 0);
  CHECK(cli({"run", "--aqm", "red", "--out", "x", "--bogus"}).code != 0);
  CHECK(cli({"run", "--aqm", "codel", "--out", "x"}).code != 0);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("cli: run kred without a map fails") {
  const auto dir = testing::scratch_dir("cli_nomap");
  const auto r = cli({"run", "--aqm", "kred", "--duration", "1", "--out", dir.string()});
  CHECK(r.code != 0);
  CHECK(r.err.find("map") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(dir / "summary.csv"));
}

TEST_CASE("cli: run writes a series and a summary row") {
  const auto dir = testing::scratch_dir("cli_run");
  const auto r = cli({"run", "--aqm", "red", "--scenario", "scenario2", "--duration", "5", "--out",
                      (dir / "res").string()});
  REQUIRE(r.code == 0);
  const auto series = slurp(dir / "res" / "scenario2_red.csv");
  CHECK(line_count(series) == 1 + 51);
  const auto summary = slurp(dir / "res" / "summary.csv");
  CHECK(line_count(summary) == 2);
  CHECK(summary.find("\nred,") != std::string::npos);
}

TEST_CASE("cli: train, then compare with the map") {
  const auto dir = testing::scratch_dir("cli_train");
  const auto cfg = dir / "cfg.json";
  std::ofstream(cfg) << R"({ "training": { "sweep_duration": 10, "window": 2 } })";
  const auto map = dir / "map.ksom";
  const auto t = cli({"train", "--seed", "1", "--duration", "30", "--config", cfg.string(), "--out",
                      map.string()});
  CHECK((t.code == kExitOk || t.code == kExitNotConverged));
  REQUIRE(std::filesystem::exists(map));
  CHECK_NOTHROW(load_map(map));
  const auto log = slurp(dir / "map.training.csv");
  CHECK(log.rfind("time_s,avg_queue_pkts,applied_max_p,teacher_max_p\n", 0) == 0);
  CHECK(line_count(log) == 1 + 301);

  const auto out = dir / "results";
  const auto c = cli({"compare", "--scenario", "scenario1", "--duration", "4", "--map-file", map.string(),
                      "--out", out.string(), "--jobs", "2"});
  REQUIRE(c.code == 0);
  for (const char* aqm : {"red", "fred", "ared", "pi", "kred"})
    CHECK(std::filesystem::exists(out / (std::string("scenario1_") + aqm + ".csv")));
  const auto summary = slurp(out / "summary.csv");
  CHECK(line_count(summary) == 6);
  CHECK(summary.find("\nred,") < summary.find("\nkred,"));
}

TEST_CASE("cli: compare requires a map file") {
  const auto dir = testing::scratch_dir("cli_cmp_nomap");
  CHECK(cli({"compare", "--out", dir.string()}).code != 0);
  CHECK(cli({"compare", "--out", dir.string(), "--map-file", (dir / "missing.ksom").string()}).code != 0);
}

TEST_CASE("cli: bad config and unwritable output") {
  const auto dir = testing::scratch_dir("cli_bad");
  const auto cfg = dir / "bad.json";
  std::ofstream(cfg) << R"({ "aqm": { "nonsense": 1 } })";
  auto r = cli({"run", "--aqm", "red", "--config", cfg.string(), "--out", dir.string()});
  CHECK(r.code != 0);
  CHECK(r.err.find("nonsense") != std::string::npos);
  std::ofstream(dir / "file") << "x";
  r = cli({"run", "--aqm", "red", "--duration", "1", "--out", (dir / "file" / "sub").string()});
  CHECK(r.code != 0);
}

TEST_CASE("cli: config path falls back to AQMLAB_CONFIG") {
  const auto dir = testing::scratch_dir("cli_env");
  const auto cfg = dir / "env.json";
  std::ofstream(cfg) << R"({ "duration": 2 })";
  ::setenv("AQMLAB_CONFIG", cfg.c_str(), 1);
  const auto r = cli({"run", "--aqm", "droptail", "--out", dir.string()});
  ::unsetenv("AQMLAB_CONFIG");
  REQUIRE(r.code == 0);
  CHECK(line_count(slurp(dir / "scenario1_droptail.csv")) == 1 + 21);
}

TEST_CASE("cli: validate-som") {
  const auto r = cli({"validate-som", "--seed", "2", "--episodes", "50"});
  CHECK(r.code == 0);
  CHECK(r.out.find("PASS") != std::string::npos);
}
