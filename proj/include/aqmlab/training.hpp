#pragma once

#include "aqmlab/kred.hpp"
#include "aqmlab/metrics.hpp"
#include "aqmlab/scenario.hpp"
#include "aqmlab/som.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace aqmlab {

/// Slow multiplicative perturbation of the applied max_p during training:
///   factor(t) = exp(-depth * (1 - cos(2 pi t / period)) / 2),  t < duration
/// It walks the queue through the whole band so the map sees every level
/// it will meet later. The taught value is always teacher(avg).
struct ExplorationSweep {
  double depth = 5.0;
  Time period = 100.0;
  Time duration = 300.0;
  double factor(Time t) const;
};

struct TrainingOptions {
  LearnParams learn{};
  TeacherParams teacher{};
  ExplorationSweep sweep{};
  std::size_t side = SomMap::kDefaultSide;
  double init_out_lo = 0.01;
  double init_out_hi = 0.2;
  Time window = 30.0; // convergence window length
};

struct TrainingLogRow {
  Time time = 0.0;
  double avg_queue = 0.0;
  double applied_max_p = 0.0;
  double teacher = 0.0;
};

struct TrainingResult {
  SomMap map;
  bool converged = false;
  Time converged_at = -1.0;
  std::uint64_t train_steps = 0;
  std::vector<TrainingLogRow> log;
  RunMetrics metrics;

  /// One-line human readable outcome.
  std::string report() const;
};

/// Trains a fresh map on `spec` (normally the "train" preset). The map is
/// frozen at the first window passing convergence_check once exploration has
/// ended; without convergence it is returned unfrozen and converged=false.
TrainingResult kred_train(const ScenarioSpec& spec, const TrainingOptions& opts, std::uint64_t seed);

/// Reads a "training" config section (learn/teacher/sweep keys).
void apply_training_overrides(TrainingOptions& opts, const nlohmann::json& obj);

inline constexpr const char* kTrainingLogHeader = "time_s,avg_queue_pkts,applied_max_p,teacher_max_p";
void emit_training_log(const TrainingResult& result, const std::filesystem::path& path);

} // namespace aqmlab
