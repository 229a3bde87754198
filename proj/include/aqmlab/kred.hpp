#pragma once

#include "aqmlab/aqm.hpp"
#include "aqmlab/som.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <span>

namespace aqmlab {

/// Target max_p used to train the map:
///   clamp(p_base * exp(gain * (avg - mid) / (max_th - min_th)))
/// with mid the centre of [min_th, max_th].
struct TeacherParams {
  double p_base = 0.1;
  double gain = std::numbers::ln2 * 4.0; // ln 16: x4 per half band
};

double teacher(double avg, const RedParams& red, const TeacherParams& tp,
               const ProbabilityClamp& clamp = {});

struct KredOptions {
  ProbabilityClamp clamp{};
  /// Feed the SOM instantaneous queue lengths rather than the EWMA.
  bool use_instantaneous = false;
};

struct KredState {
  std::shared_ptr<const SomMap> map;
  double prev_avg = 0.0;
  RedParams red{};
  bool training = false;
};

/// SOM input for a (previous, current) queue-level pair.
inline SomInput kred_input(double prev, double current, const RedParams& red) {
  const double scale = static_cast<double>(red.q_size);
  return {prev / scale, current / scale};
}

/// Per-enqueue max_p: the SOM's response to (prev_avg, avg), clamped.
/// Updates prev_avg.
double kred_max_p(KredState& state, double avg, const ProbabilityClamp& clamp = {});

/// True when every sample is inside [min_th, max_th] and the population
/// standard deviation is at most 10% of (max_th - min_th).
bool convergence_check(std::span<const double> window, const RedParams& red);

/// RED whose max_p comes from a frozen Kohonen map on every arrival.
class KredQueue : public RedQueue {
public:
  KredQueue(RedParams params, std::shared_ptr<const SomMap> map, KredOptions opts = {},
            bool count_correction = true);
  std::string_view name() const override { return "kred"; }
  const KredState& kred() const { return kred_; }

protected:
  void adapt(std::size_t queue_len, Time now) override;

private:
  KredState kred_;
  KredOptions opts_;
};

} // namespace aqmlab
