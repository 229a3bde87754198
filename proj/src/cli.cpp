#include "aqmlab/cli.hpp"

#include "aqmlab/cartpole.hpp"
#include "aqmlab/network.hpp"
#include "aqmlab/scenario.hpp"
#include "aqmlab/training.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

namespace aqmlab {
namespace {

namespace fs = std::filesystem;

struct CommonFlags {
  std::string scenario;
  std::string aqm;
  std::string config;
  std::string map_file;
  std::uint64_t seed = 42;
  std::optional<double> duration;
  std::optional<std::uint32_t> packet_size;
  std::string out;
};

struct LoadedConfig {
  nlohmann::json scenario = nlohmann::json::object();
  nlohmann::json training; // null when absent
};

LoadedConfig read_config(const CommonFlags& f) {
  std::string path = f.config;
  if (path.empty()) {
    if (const char* env = std::getenv("AQMLAB_CONFIG"); env != nullptr) path = env;
  }
  LoadedConfig cfg;
  if (path.empty()) return cfg;
  nlohmann::json j = load_config(path);
  if (!j.is_object()) throw ConfigError(path + ": top level must be an object");
  if (auto it = j.find("training"); it != j.end()) {
    cfg.training = *it;
    j.erase(it);
  }
  cfg.scenario = std::move(j);
  return cfg;
}

/// Preset + config file + command-line flags, in increasing precedence.
ScenarioSpec make_spec(const CommonFlags& f, const LoadedConfig& cfg, const std::string& aqm) {
  nlohmann::json ov = cfg.scenario;
  ov["seed"] = f.seed;
  if (f.duration) ov["duration"] = *f.duration;
  if (f.packet_size) ov["packet_size"] = *f.packet_size;
  if (!aqm.empty()) {
    nlohmann::json& a = ov["aqm"];
    if (a.is_null()) a = nlohmann::json::object();
    a["name"] = aqm;
  }
  if (!f.map_file.empty()) ov["aqm"]["map_file"] = f.map_file;
  ScenarioSpec spec = build_scenario(f.scenario, ov);
  spec.validate();
  return spec;
}

std::shared_ptr<const SomMap> require_map(const ScenarioSpec& spec) {
  if (spec.aqm.map_file.empty()) throw ConfigError("aqm 'kred' requires --map-file");
  return std::make_shared<const SomMap>(load_map(spec.aqm.map_file));
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error(dir.string() + ": " + ec.message());
}

fs::path series_path(const fs::path& dir, const ScenarioSpec& spec) {
  return dir / (spec.name + "_" + spec.aqm.name + ".csv");
}

int cmd_train(const CommonFlags& f, const std::string& log_path, std::ostream& out, std::ostream& err) {
  const LoadedConfig cfg = read_config(f);
  TrainingOptions opts;
  if (!cfg.training.is_null()) apply_training_overrides(opts, cfg.training);
  const ScenarioSpec spec = make_spec(f, cfg, "");
  const TrainingResult res = kred_train(spec, opts, f.seed);

  const fs::path map_path = f.out;
  if (map_path.has_parent_path()) ensure_dir(map_path.parent_path());
  fs::path log = log_path;
  if (log.empty()) log = fs::path(map_path).replace_extension(".training.csv");
  save_map(res.map, map_path);
  emit_training_log(res, log);

  out << "train: " << res.report() << "\n";
  out << "map: " << map_path.string() << "\nlog: " << log.string() << "\n";
  if (!res.converged) {
    err << "error: training did not converge; the map was written unfrozen for inspection\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

void print_row(std::ostream& out, const RunMetrics& m) {
  out << m.scenario << " " << m.aqm << ": delay " << m.mean_delay_ms << " ms (std " << m.std_delay_ms
      << "), throughput " << m.mean_tput_bps << " bit/s, drop rate " << m.drop_rate << "\n";
}

int cmd_run(const CommonFlags& f, std::ostream& out) {
  const LoadedConfig cfg = read_config(f);
  const ScenarioSpec spec = make_spec(f, cfg, f.aqm);
  std::shared_ptr<const SomMap> map;
  if (spec.aqm.name == "kred") map = require_map(spec);

  const RunMetrics m = run_scenario(spec, map);
  const fs::path dir = f.out;
  ensure_dir(dir);
  emit_timeseries(m, series_path(dir, spec));
  emit_summary({m}, dir / "summary.csv");
  print_row(out, m);
  return kExitOk;
}

int cmd_compare(const CommonFlags& f, unsigned jobs, std::ostream& out) {
  const LoadedConfig cfg = read_config(f);
  std::vector<ScenarioSpec> specs;
  for (const char* name : kComparedDisciplines) specs.push_back(make_spec(f, cfg, name));
  const auto map = require_map(specs.back());
  const fs::path dir = f.out;
  ensure_dir(dir);

  std::vector<RunMetrics> results(specs.size());
  std::vector<std::exception_ptr> errors(specs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      try {
        results[i] = run_scenario(specs[i], specs[i].aqm.name == "kred" ? map : nullptr);
        emit_timeseries(results[i], series_path(dir, specs[i]));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(specs.size()));
  {
    std::vector<std::jthread> pool;
    for (unsigned i = 1; i < jobs; ++i) pool.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  emit_summary(results, dir / "summary.csv");
  for (const auto& m : results) print_row(out, m);
  return kExitOk;
}

int cmd_validate_som(const CommonFlags& f, std::size_t episodes, std::ostream& out) {
  const ValidationReport r = pole_balance_validate(pole_learn_params(), f.seed, episodes);
  out << "untrained: mean " << r.untrained_mean << " steps\n"
      << "trained:   mean " << r.trained_mean << " steps, min " << r.trained_min << " over "
      << r.trained_steps.size() << " starts (" << r.training_steps << " training steps)\n"
      << (r.passed ? "PASS" : "FAIL") << "\n";
  return r.passed ? kExitOk : kExitFailure;
}

} // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discrete-event AQM simulator with a Kohonen-map RED controller", "aqmlab"};
  app.require_subcommand(1);

  auto add_common = [](CLI::App* sub, CommonFlags& f, const std::string& scenario) {
    f.scenario = scenario;
    sub->add_option("--scenario", f.scenario, "Scenario preset")
        ->check(CLI::IsMember({"train", "scenario1", "scenario2", "custom"}))
        ->capture_default_str();
    sub->add_option("--config", f.config, "JSON config file (falls back to $AQMLAB_CONFIG)");
    sub->add_option("--seed", f.seed, "Seed for every random stream")->capture_default_str();
    sub->add_option("--duration", f.duration, "Override the scenario duration, s")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--packet-size", f.packet_size, "Data packet size, bytes")
        ->check(CLI::PositiveNumber);
  };

  CommonFlags train_f;
  auto* train = app.add_subcommand("train", "Train a KRED map and write it with its training log");
  add_common(train, train_f, "train");
  std::string log_path;
  train->add_option("--out", train_f.out, "Map file to write")->required();
  train->add_option("--log", log_path, "Training log CSV (default: <out>.training.csv)");

  CommonFlags run_f;
  auto* run = app.add_subcommand("run", "Run one AQM on one scenario");
  add_common(run, run_f, "scenario1");
  run->add_option("--aqm", run_f.aqm, "Queue discipline")
      ->check(CLI::IsMember({"droptail", "red", "fred", "ared", "pi", "kred"}))
      ->required();
  run->add_option("--map-file", run_f.map_file, "Trained KSOM map (required for kred)");
  run->add_option("--out", run_f.out, "Output directory")->required();

  CommonFlags cmp_f;
  auto* compare = app.add_subcommand("compare", "Run RED, FRED, ARED, PI and KRED on one scenario");
  add_common(compare, cmp_f, "scenario1");
  unsigned jobs = 0;
  compare->add_option("--map-file", cmp_f.map_file, "Trained KSOM map")->required();
  compare->add_option("--out", cmp_f.out, "Output directory")->required();
  compare->add_option("--jobs", jobs, "Worker threads (0: one per core)")->capture_default_str();

  CommonFlags val_f;
  auto* validate = app.add_subcommand("validate-som", "Cart-pole check of the SOM implementation");
  std::size_t episodes = 200;
  validate->add_option("--seed", val_f.seed, "Seed")->capture_default_str();
  validate->add_option("--episodes", episodes, "Training episodes")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitFailure;
  }

  try {
    if (*train) return cmd_train(train_f, log_path, out, err);
    if (*run) return cmd_run(run_f, out);
    if (*compare) return cmd_compare(cmp_f, jobs, out);
    if (*validate) return cmd_validate_som(val_f, episodes, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

} // namespace aqmlab
