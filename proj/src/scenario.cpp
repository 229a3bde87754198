#include "aqmlab/scenario.hpp"

#include "aqmlab/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace aqmlab {

using nlohmann::json;

namespace {

ScenarioSpec preset_train() {
  ScenarioSpec s;
  s.name = "train";
  s.duration = 600.0;
  s.flow_schedule = {{0.0, 8}};
  s.rtt_model = RttModel::fixed;
  s.aqm.name = "kred";
  return s;
}

ScenarioSpec preset_scenario1() {
  ScenarioSpec s;
  s.name = "scenario1";
  s.duration = 500.0;
  s.flow_schedule = {{0.0, 50}, {100.0, 100}, {200.0, 150}, {300.0, 200}, {400.0, 250}};
  s.rtt_model = RttModel::fixed;
  return s;
}

ScenarioSpec preset_scenario2() {
  ScenarioSpec s;
  s.name = "scenario2";
  s.duration = 400.0;
  const std::size_t pattern[] = {100, 200, 50, 250, 150, 100, 250, 50};
  for (std::size_t i = 0; i < std::size(pattern); ++i)
    s.flow_schedule.push_back({50.0 * static_cast<double>(i), pattern[i]});
  s.rtt_model = RttModel::uniform_random;
  return s;
}

template <class T>
void take(const json& obj, const char* key, T& out, std::set<std::string>& seen) {
  if (auto it = obj.find(key); it != obj.end()) {
    out = it->get<T>();
    seen.insert(key);
  }
}

void reject_unknown(const json& obj, const std::set<std::string>& seen, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!seen.count(it.key())) throw ConfigError("unknown config key '" + where + it.key() + "'");
  }
}

void apply_fred(FredState& f, const json& obj, const std::string& where) {
  std::set<std::string> seen;
  take(obj, "alpha", f.alpha, seen);
  take(obj, "beta", f.beta, seen);
  reject_unknown(obj, seen, where);
}

void apply_ared(AredState& a, const json& obj, const std::string& where) {
  std::set<std::string> seen;
  take(obj, "alpha", a.alpha, seen);
  take(obj, "beta", a.beta, seen);
  take(obj, "interval", a.interval, seen);
  reject_unknown(obj, seen, where);
}

void apply_pi(PiState& p, const json& obj, const std::string& where) {
  std::set<std::string> seen;
  take(obj, "a", p.a, seen);
  take(obj, "b", p.b, seen);
  take(obj, "q_ref", p.q_ref, seen);
  take(obj, "w", p.w, seen);
  reject_unknown(obj, seen, where);
}

void apply_kred(KredOptions& k, const json& obj, const std::string& where) {
  std::set<std::string> seen;
  take(obj, "use_instantaneous", k.use_instantaneous, seen);
  reject_unknown(obj, seen, where);
}

void apply_aqm(AqmConfig& a, const json& obj) {
  if (!obj.is_object()) throw ConfigError("'aqm' must be an object");
  std::set<std::string> seen;
  take(obj, "name", a.name, seen);
  take(obj, "min_th", a.red.min_th, seen);
  take(obj, "max_th", a.red.max_th, seen);
  take(obj, "q_size", a.red.q_size, seen);
  take(obj, "q_weight", a.red.q_weight, seen);
  take(obj, "max_p", a.red.max_p, seen);
  take(obj, "gentle", a.red.gentle, seen);
  take(obj, "p_floor", a.clamp.floor, seen);
  take(obj, "p_ceil", a.clamp.ceil, seen);
  take(obj, "count_correction", a.count_correction, seen);
  take(obj, "map_file", a.map_file, seen);

  // Flat Table-style keys go to the discipline that owns them.
  json flat_fred = json::object();
  json flat_ared = json::object();
  json flat_pi = json::object();
  for (const char* key : {"alpha", "beta"}) {
    if (obj.contains(key)) {
      seen.insert(key);
      if (a.name == "fred") flat_fred[key] = obj[key];
      else if (a.name == "ared") flat_ared[key] = obj[key];
      else throw ConfigError(std::string("aqm key '") + key + "' needs name fred or ared, or a nested section");
    }
  }
  if (obj.contains("interval")) {
    seen.insert("interval");
    flat_ared["interval"] = obj["interval"];
  }
  for (const char* key : {"a", "b", "q_ref", "w"}) {
    if (obj.contains(key)) {
      seen.insert(key);
      flat_pi[key] = obj[key];
    }
  }
  apply_fred(a.fred, flat_fred, "aqm.");
  apply_ared(a.ared, flat_ared, "aqm.");
  apply_pi(a.pi, flat_pi, "aqm.");

  if (auto it = obj.find("fred"); it != obj.end()) {
    seen.insert("fred");
    apply_fred(a.fred, *it, "aqm.fred.");
  }
  if (auto it = obj.find("ared"); it != obj.end()) {
    seen.insert("ared");
    apply_ared(a.ared, *it, "aqm.ared.");
  }
  if (auto it = obj.find("pi"); it != obj.end()) {
    seen.insert("pi");
    apply_pi(a.pi, *it, "aqm.pi.");
  }
  if (auto it = obj.find("kred"); it != obj.end()) {
    seen.insert("kred");
    apply_kred(a.kred, *it, "aqm.kred.");
  }
  reject_unknown(obj, seen, "aqm.");
}

std::vector<FlowStep> parse_schedule(const json& arr) {
  if (!arr.is_array()) throw ConfigError("'flow_schedule' must be an array");
  std::vector<FlowStep> out;
  for (const auto& item : arr) {
    FlowStep step;
    if (item.is_array() && item.size() == 2) {
      step.time = item[0].get<double>();
      const auto n = item[1].get<long long>();
      if (n < 0) throw ConfigError("flow counts must be >= 0");
      step.count = static_cast<std::size_t>(n);
    } else if (item.is_object()) {
      step.time = item.at("time").get<double>();
      const auto n = item.at("count").get<long long>();
      if (n < 0) throw ConfigError("flow counts must be >= 0");
      step.count = static_cast<std::size_t>(n);
    } else {
      throw ConfigError("flow_schedule entries must be [time, count] or {time, count}");
    }
    out.push_back(step);
  }
  return out;
}

RttModel parse_rtt_model(const std::string& s) {
  if (s == "fixed" || s == "uniform-fixed") return RttModel::fixed;
  if (s == "uniform-random") return RttModel::uniform_random;
  throw ConfigError("unknown rtt_model '" + s + "' (expected fixed or uniform-random)");
}

} // namespace

bool is_known_discipline(const std::string& name) {
  return std::find(std::begin(kDisciplineNames), std::end(kDisciplineNames), name) !=
         std::end(kDisciplineNames);
}

void ScenarioSpec::validate() const {
  try {
    if (!(duration >= 0.0) || !std::isfinite(duration)) throw ConfigError("duration must be >= 0");
    if (!(bottleneck_bw > 0.0) || !(access_bw > 0.0)) throw ConfigError("link bandwidths must be > 0");
    if (!(bottleneck_prop >= 0.0)) throw ConfigError("bottleneck_prop must be >= 0");
    for (std::size_t i = 0; i < flow_schedule.size(); ++i) {
      if (i == 0 && flow_schedule[i].time != 0.0) throw ConfigError("flow_schedule must start at time 0");
      if (i > 0 && !(flow_schedule[i].time > flow_schedule[i - 1].time))
        throw ConfigError("flow_schedule times must be strictly increasing");
    }
    const Time min_rtt = rtt_model == RttModel::fixed ? rtt : rtt_lo;
    if (rtt_model == RttModel::uniform_random && !(rtt_lo > 0.0 && rtt_lo <= rtt_hi))
      throw ConfigError("rtt bounds must satisfy 0 < rtt_lo <= rtt_hi");
    if (!(min_rtt > 0.0)) throw ConfigError("rtt must be > 0");
    if (min_rtt < 2.0 * bottleneck_prop)
      throw ConfigError("rtt must cover the bottleneck propagation delay both ways");
    if (packet_size == 0 || ack_size == 0) throw ConfigError("packet sizes must be > 0");
    if (!(sample_interval > 0.0) || !(throughput_window >= sample_interval))
      throw ConfigError("sample_interval must be > 0 and <= throughput_window");
    if (!is_known_discipline(aqm.name)) throw ConfigError("unknown aqm '" + aqm.name + "'");
    if (!(aqm.clamp.floor > 0.0 && aqm.clamp.floor <= aqm.clamp.ceil && aqm.clamp.ceil <= 1.0))
      throw ConfigError("p_floor/p_ceil must satisfy 0 < p_floor <= p_ceil <= 1");
    if (!(tcp.max_window >= 1.0)) throw ConfigError("tcp.max_window must be >= 1");
    aqm.red.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::size_t ScenarioSpec::max_flows() const {
  std::size_t n = 0;
  for (const auto& s : flow_schedule) n = std::max(n, s.count);
  return n;
}

void apply_overrides(ScenarioSpec& spec, const json& overrides) {
  if (overrides.is_null()) return;
  if (!overrides.is_object()) throw ConfigError("scenario config must be an object");
  try {
    std::set<std::string> seen;
    take(overrides, "name", spec.name, seen);
    take(overrides, "duration", spec.duration, seen);
    take(overrides, "bottleneck_bw", spec.bottleneck_bw, seen);
    take(overrides, "bottleneck_prop", spec.bottleneck_prop, seen);
    take(overrides, "access_bw", spec.access_bw, seen);
    take(overrides, "rtt", spec.rtt, seen);
    take(overrides, "rtt_lo", spec.rtt_lo, seen);
    take(overrides, "rtt_hi", spec.rtt_hi, seen);
    take(overrides, "seed", spec.seed, seen);
    take(overrides, "packet_size", spec.packet_size, seen);
    take(overrides, "ack_size", spec.ack_size, seen);
    take(overrides, "sample_interval", spec.sample_interval, seen);
    take(overrides, "throughput_window", spec.throughput_window, seen);
    take(overrides, "warmup", spec.warmup, seen);
    take(overrides, "delay_from_queue_length", spec.delay_from_queue_length, seen);
    if (auto it = overrides.find("rtt_model"); it != overrides.end()) {
      seen.insert("rtt_model");
      spec.rtt_model = parse_rtt_model(it->get<std::string>());
    }
    if (auto it = overrides.find("flow_schedule"); it != overrides.end()) {
      seen.insert("flow_schedule");
      spec.flow_schedule = parse_schedule(*it);
    }
    if (auto it = overrides.find("aqm"); it != overrides.end()) {
      seen.insert("aqm");
      apply_aqm(spec.aqm, *it);
    }
    if (auto it = overrides.find("tcp"); it != overrides.end()) {
      seen.insert("tcp");
      std::set<std::string> tseen;
      take(*it, "max_window", spec.tcp.max_window, tseen);
      take(*it, "initial_cwnd", spec.tcp.initial_cwnd, tseen);
      take(*it, "initial_rto", spec.tcp.initial_rto, tseen);
      take(*it, "min_rto", spec.tcp.min_rto, tseen);
      take(*it, "max_rto", spec.tcp.max_rto, tseen);
      reject_unknown(*it, tseen, "tcp.");
    }
    reject_unknown(overrides, seen, "");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad scenario config: ") + e.what());
  }
}

ScenarioSpec build_scenario(const std::string& name, const json& overrides) {
  ScenarioSpec spec;
  if (name == "train") spec = preset_train();
  else if (name == "scenario1") spec = preset_scenario1();
  else if (name == "scenario2") spec = preset_scenario2();
  else if (name == "custom") spec.name = "custom";
  else throw ConfigError("unknown scenario '" + name + "' (expected train, scenario1, scenario2 or custom)");
  apply_overrides(spec, overrides);
  spec.validate();
  return spec;
}

ScenarioSpec build_scenario(const std::string& name) { return build_scenario(name, json()); }

json load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  try {
    return json::parse(is, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::vector<Time> flow_rtts(const ScenarioSpec& spec) {
  const std::size_t n = spec.max_flows();
  std::vector<Time> out(n, spec.rtt);
  if (spec.rtt_model == RttModel::uniform_random) {
    Rng rng = Rng::stream(spec.seed, 0x77);
    for (auto& r : out) r = rng.uniform(spec.rtt_lo, spec.rtt_hi);
  }
  return out;
}

std::unique_ptr<QueueDiscipline> make_discipline(const AqmConfig& cfg, std::shared_ptr<const SomMap> map) {
  if (cfg.name == "droptail") return std::make_unique<DropTailQueue>(cfg.red.q_size);
  if (cfg.name == "red") return std::make_unique<RedQueue>(cfg.red, cfg.count_correction);
  if (cfg.name == "fred") return std::make_unique<FredQueue>(cfg.red, cfg.fred, cfg.clamp, cfg.count_correction);
  if (cfg.name == "ared") return std::make_unique<AredQueue>(cfg.red, cfg.ared, cfg.clamp, cfg.count_correction);
  if (cfg.name == "pi") return std::make_unique<PiQueue>(cfg.red.q_size, cfg.pi);
  if (cfg.name == "kred") {
    if (!map) throw ConfigError("aqm 'kred' requires a trained map");
    KredOptions opts = cfg.kred;
    opts.clamp = cfg.clamp;
    return std::make_unique<KredQueue>(cfg.red, std::move(map), opts, cfg.count_correction);
  }
  throw ConfigError("unknown aqm '" + cfg.name + "'");
}

} // namespace aqmlab
