#include "aqmlab/kred.hpp"

#include <stdexcept>

namespace aqmlab {

double teacher(double avg, const RedParams& red, const TeacherParams& tp,
               const ProbabilityClamp& clamp) {
  const double mid = 0.5 * (red.min_th + red.max_th);
  return clamp.apply(tp.p_base * std::exp(tp.gain * (avg - mid) / (red.max_th - red.min_th)));
}

double kred_max_p(KredState& state, double avg, const ProbabilityClamp& clamp) {
  const double out = state.map->respond(kred_input(state.prev_avg, avg, state.red));
  state.prev_avg = avg;
  return clamp.apply(out);
}

bool convergence_check(std::span<const double> window, const RedParams& red) {
  if (window.empty()) return false;
  double mean = 0.0;
  for (double v : window) {
    if (v < red.min_th || v > red.max_th) return false;
    mean += v;
  }
  mean /= static_cast<double>(window.size());
  double var = 0.0;
  for (double v : window) var += (v - mean) * (v - mean);
  var /= static_cast<double>(window.size());
  return std::sqrt(var) <= 0.1 * (red.max_th - red.min_th);
}

KredQueue::KredQueue(RedParams params, std::shared_ptr<const SomMap> map, KredOptions opts,
                     bool count_correction)
    : RedQueue(params, count_correction), opts_(opts) {
  if (!map) throw std::invalid_argument("KRED requires a trained map");
  if (!map->frozen()) throw std::invalid_argument("KRED evaluation requires a frozen map");
  kred_.map = std::move(map);
  kred_.red = params_;
  kred_.training = false;
}

void KredQueue::adapt(std::size_t queue_len, Time) {
  const double level = opts_.use_instantaneous ? static_cast<double>(queue_len) : state_.avg;
  params_.max_p = kred_max_p(kred_, level, opts_.clamp);
}

} // namespace aqmlab
