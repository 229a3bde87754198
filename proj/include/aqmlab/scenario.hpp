#pragma once

#include "aqmlab/aqm.hpp"
#include "aqmlab/engine.hpp"
#include "aqmlab/kred.hpp"
#include "aqmlab/tcp.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace aqmlab {

/// Invalid or incomplete user configuration.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct FlowStep {
  Time time = 0.0;
  std::size_t count = 0;
};

enum class RttModel : std::uint8_t { fixed, uniform_random };

/// Discipline name plus every tunable constant. alpha/beta keys in a config
/// apply to whichever of FRED or ARED is named.
struct AqmConfig {
  std::string name = "red";
  RedParams red{};
  FredState fred{};
  AredState ared{};
  PiState pi{};
  ProbabilityClamp clamp{};
  bool count_correction = true;
  KredOptions kred{};
  std::string map_file;
};

struct ScenarioSpec {
  std::string name = "custom";
  Time duration = 0.0;
  double bottleneck_bw = 5e6;  // bits/s
  Time bottleneck_prop = 0.01; // s, one way
  double access_bw = 100e6;    // bits/s
  std::vector<FlowStep> flow_schedule;
  RttModel rtt_model = RttModel::fixed;
  Time rtt = 0.083;     // fixed model: base round-trip propagation
  Time rtt_lo = 0.064;  // uniform-random model bounds
  Time rtt_hi = 0.102;
  AqmConfig aqm{};
  std::uint64_t seed = 42;
  std::uint32_t packet_size = 1000;
  std::uint32_t ack_size = 40;
  TcpConfig tcp{};
  Time sample_interval = 0.1;
  Time throughput_window = 1.0;
  /// Samples before this time are excluded from queue-length statistics.
  Time warmup = 20.0;
  /// Derive queue delay from sampled queue length instead of per packet.
  bool delay_from_queue_length = false;

  /// Throws std::invalid_argument on an inconsistent spec.
  void validate() const;
  std::size_t max_flows() const;
};

/// Named presets: train, scenario1, scenario2, custom. `overrides` is a JSON
/// object in the scenario config layout and may be null.
ScenarioSpec build_scenario(const std::string& name, const nlohmann::json& overrides);
ScenarioSpec build_scenario(const std::string& name);

/// Applies a config object on top of `spec`. Unknown keys are errors.
void apply_overrides(ScenarioSpec& spec, const nlohmann::json& overrides);
nlohmann::json load_config(const std::filesystem::path& path);

/// Per-flow base RTTs for flows 0..max_flows()-1, drawn from the spec seed.
std::vector<Time> flow_rtts(const ScenarioSpec& spec);

/// Instantiates the configured discipline. KRED needs a frozen `map`.
std::unique_ptr<QueueDiscipline> make_discipline(const AqmConfig& cfg,
                                                 std::shared_ptr<const SomMap> map = nullptr);

inline constexpr const char* kDisciplineNames[] = {"droptail", "red", "fred", "ared", "pi", "kred"};
/// The five AQMs of a comparison run, in report order.
inline constexpr const char* kComparedDisciplines[] = {"red", "fred", "ared", "pi", "kred"};

bool is_known_discipline(const std::string& name);

} // namespace aqmlab
