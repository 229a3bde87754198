#include "aqmlab/training.hpp"

#include "aqmlab/network.hpp"
#include "aqmlab/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <deque>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace aqmlab {

double ExplorationSweep::factor(Time t) const {
  if (t >= duration || depth <= 0.0 || period <= 0.0) return 1.0;
  const double phase = (1.0 - std::cos(2.0 * std::numbers::pi * t / period)) / 2.0;
  return std::exp(-depth * phase);
}

namespace {

/// RED queue whose max_p is the live map's response, perturbed, while each
/// arrival trains the map toward the teacher.
class KredTrainingQueue : public RedQueue {
public:
  KredTrainingQueue(RedParams params, SomMap& map, const TrainingOptions& opts,
                    const AqmConfig& aqm, Rng explore_rng)
      : RedQueue(params, aqm.count_correction),
        map_(map),
        opts_(opts),
        aqm_(aqm),
        schedule_(opts.learn),
        explore_rng_(explore_rng) {}

  std::string_view name() const override { return "kred"; }

  std::uint64_t steps() const { return steps_; }
  double last_teacher() const { return last_teacher_; }

protected:
  void adapt(std::size_t queue_len, Time now) override {
    const double level = aqm_.kred.use_instantaneous ? static_cast<double>(queue_len) : state_.avg;
    const SomInput x = kred_input(prev_, level, params_);
    const double response = map_.respond(x);
    last_teacher_ = teacher(level, params_, opts_.teacher, aqm_.clamp);
    double applied = response;
    if (!map_.frozen()) {
      map_.train_step(x, last_teacher_, schedule_);
      schedule_ = schedule_.decayed();
      ++steps_;
      if (now < opts_.sweep.duration) {
        if (opts_.learn.explore_sigma > 0.0) applied += explore_rng_.normal(0.0, opts_.learn.explore_sigma);
        applied *= opts_.sweep.factor(now);
      }
    }
    params_.max_p = aqm_.clamp.apply(applied);
    prev_ = level;
  }

private:
  SomMap& map_;
  const TrainingOptions& opts_;
  const AqmConfig& aqm_;
  LearnParams schedule_;
  Rng explore_rng_;
  double prev_ = 0.0;
  double last_teacher_ = 0.0;
  std::uint64_t steps_ = 0;
};

template <class T>
void take(const nlohmann::json& obj, const char* key, T& out, std::set<std::string>& seen) {
  if (auto it = obj.find(key); it != obj.end()) {
    out = it->get<T>();
    seen.insert(key);
  }
}

} // namespace

std::string TrainingResult::report() const {
  std::ostringstream os;
  if (converged)
    os << "converged at t=" << converged_at << " s after " << train_steps << " training steps; map frozen";
  else
    os << "did not converge within the run (" << train_steps << " training steps); map left unfrozen";
  return os.str();
}

TrainingResult kred_train(const ScenarioSpec& spec, const TrainingOptions& opts, std::uint64_t seed) {
  opts.learn.validate();
  spec.validate();
  Rng init_rng = Rng::stream(seed, 0x50);
  TrainingResult result{SomMap::random(opts.side, opts.side, init_rng, opts.init_out_lo, opts.init_out_hi,
                                       OutputRange{spec.aqm.clamp.floor, spec.aqm.clamp.ceil}),
                        false, -1.0, 0, {}, {}};
  ScenarioSpec run_spec = spec;
  run_spec.seed = seed;

  KredTrainingQueue queue(run_spec.aqm.red, result.map, opts, run_spec.aqm, Rng::stream(seed, 0x51));
  const auto window_len = static_cast<std::size_t>(std::llround(opts.window / run_spec.sample_interval));
  std::deque<double> window;

  SampleObserver observer = [&](const SampleRow& row) {
    result.log.push_back({row.time, row.avg_queue, row.max_p, queue.last_teacher()});
    if (result.map.frozen()) return;
    if (row.time < opts.sweep.duration) return; // still exploring
    window.push_back(row.avg_queue);
    if (window.size() > window_len) window.pop_front();
    if (window.size() < window_len) return;
    std::vector<double> samples(window.begin(), window.end());
    if (convergence_check(samples, run_spec.aqm.red)) {
      result.map.freeze();
      result.converged = true;
      result.converged_at = row.time;
    }
  };
  result.metrics = simulate(run_spec, queue, observer);
  result.train_steps = queue.steps();
  return result;
}

void apply_training_overrides(TrainingOptions& opts, const nlohmann::json& obj) {
  if (obj.is_null()) return;
  if (!obj.is_object()) throw ConfigError("'training' must be an object");
  try {
    std::set<std::string> seen;
    take(obj, "eta_in", opts.learn.eta_in, seen);
    take(obj, "eta_out", opts.learn.eta_out, seen);
    take(obj, "radius", opts.learn.radius, seen);
    take(obj, "decay", opts.learn.decay, seen);
    take(obj, "eta_floor", opts.learn.eta_floor, seen);
    take(obj, "radius_floor", opts.learn.radius_floor, seen);
    take(obj, "explore_sigma", opts.learn.explore_sigma, seen);
    take(obj, "p_base", opts.teacher.p_base, seen);
    take(obj, "gain", opts.teacher.gain, seen);
    take(obj, "sweep_depth", opts.sweep.depth, seen);
    take(obj, "sweep_period", opts.sweep.period, seen);
    take(obj, "sweep_duration", opts.sweep.duration, seen);
    take(obj, "init_out_lo", opts.init_out_lo, seen);
    take(obj, "init_out_hi", opts.init_out_hi, seen);
    take(obj, "window", opts.window, seen);
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!seen.count(it.key())) throw ConfigError("unknown config key 'training." + it.key() + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad training config: ") + e.what());
  }
  opts.learn.validate();
}

void emit_training_log(const TrainingResult& result, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << kTrainingLogHeader << '\n';
  for (const auto& r : result.log) {
    os << format_double(r.time) << ',' << format_double(r.avg_queue) << ',' << format_double(r.applied_max_p)
       << ',' << format_double(r.teacher) << '\n';
  }
  os.flush();
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

} // namespace aqmlab
