#pragma once

#include "aqmlab/aqm.hpp"
#include "aqmlab/metrics.hpp"
#include "aqmlab/scenario.hpp"

#include <functional>
#include <memory>
#include <stdexcept>

namespace aqmlab {

using SampleObserver = std::function<void(const SampleRow&)>;

/// Runs the dumbbell topology described by `spec` with `aqm` at the
/// bottleneck. `observer` sees every time-series row as it is recorded.
RunMetrics simulate(const ScenarioSpec& spec, QueueDiscipline& aqm,
                    const SampleObserver& observer = {});

/// Builds the configured discipline and runs it. For KRED the map comes from
/// `map` or, failing that, from spec.aqm.map_file; neither is a ConfigError.
RunMetrics run_scenario(const ScenarioSpec& spec, std::shared_ptr<const SomMap> map = nullptr);

} // namespace aqmlab
