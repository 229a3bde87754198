#include "aqmlab/aqm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aqmlab {

double ProbabilityClamp::apply(double p) const {
  if (std::isnan(p)) return floor;
  return std::clamp(p, floor, ceil);
}

void RedParams::validate() const {
  if (!(min_th > 0.0 && min_th < max_th && max_th <= static_cast<double>(q_size)))
    throw std::invalid_argument("RED thresholds must satisfy 0 < min_th < max_th <= q_size");
  if (!(q_weight > 0.0 && q_weight <= 1.0))
    throw std::invalid_argument("RED q_weight must lie in (0, 1]");
  if (!(max_p > 0.0 && max_p <= 1.0))
    throw std::invalid_argument("RED max_p must lie in (0, 1]");
}

double ewma_update(double avg, double q, double w_q) {
  return (1.0 - w_q) * avg + w_q * q;
}

double red_mark_prob(double avg, const RedParams& p) {
  if (avg < p.min_th) return 0.0;
  if (avg < p.max_th) return p.max_p * (avg - p.min_th) / (p.max_th - p.min_th);
  if (!p.gentle) return 1.0;
  if (avg < 2.0 * p.max_th)
    return p.max_p + (1.0 - p.max_p) * (avg - p.max_th) / p.max_th;
  return 1.0;
}

double red_count_corrected(double p_b, long count) {
  if (p_b <= 0.0) return 0.0;
  if (p_b >= 1.0) return 1.0;
  const double denom = 1.0 - static_cast<double>(count) * p_b;
  if (denom <= 0.0) return 1.0;
  return std::min(1.0, p_b / denom);
}

Verdict red_drop_decision(AvgQueue& state, const RedParams& p, std::size_t queue_len,
                          double u, bool count_correction) {
  if (queue_len >= p.q_size) {
    state.count_since_drop = 0;
    return Verdict::forced_drop;
  }
  const double p_b = red_mark_prob(state.avg, p);
  if (p_b <= 0.0) {
    state.count_since_drop = 0;
    return Verdict::accept;
  }
  const double p_a = count_correction ? red_count_corrected(p_b, state.count_since_drop) : p_b;
  if (u < p_a) {
    state.count_since_drop = 0;
    return Verdict::early_drop;
  }
  ++state.count_since_drop;
  return Verdict::accept;
}

Verdict red_enqueue_decision(AvgQueue& state, const RedParams& p, std::size_t queue_len,
                             Rng& rng, bool count_correction) {
  state.avg = ewma_update(state.avg, static_cast<double>(queue_len), p.q_weight);
  return red_drop_decision(state, p, queue_len, rng.uniform(), count_correction);
}

FredState fred_adapt(FredState state, double avg, const RedParams& p,
                     const ProbabilityClamp& clamp) {
  if (avg > p.max_th && state.last_action != LastAction::increased) {
    state.max_p = clamp.apply(state.max_p * state.alpha);
    state.last_action = LastAction::increased;
  } else if (avg < p.min_th && state.last_action != LastAction::decreased) {
    state.max_p = clamp.apply(state.max_p / state.beta);
    state.last_action = LastAction::decreased;
  }
  return state;
}

AredState ared_adapt(AredState state, double avg, const RedParams& p, Time now,
                     const ProbabilityClamp& clamp) {
  if (now < state.next_update) return state;
  const double span = p.max_th - p.min_th;
  const double band_lo = p.min_th + 0.4 * span;
  const double band_hi = p.min_th + 0.6 * span;
  if (avg > band_hi) {
    state.max_p = clamp.apply(state.max_p + state.alpha);
  } else if (avg < band_lo) {
    state.max_p = clamp.apply(state.max_p * (1.0 - state.beta));
  }
  // A late call must not open a second change inside the same interval.
  state.next_update = std::max(state.next_update + state.interval, now + state.interval);
  return state;
}

PiState pi_probability(PiState state, double q, Time /*now*/) {
  const double p = state.p + state.a * (q - state.q_ref) - state.b * (state.q_prev - state.q_ref);
  state.p = std::clamp(p, 0.0, 1.0);
  state.q_prev = q;
  return state;
}

Verdict DropTailQueue::on_arrival(std::size_t queue_len, Time, Rng&) {
  last_len_ = static_cast<double>(queue_len);
  return queue_len >= capacity_ ? Verdict::forced_drop : Verdict::accept;
}

RedQueue::RedQueue(RedParams params, bool count_correction)
    : params_(params), count_correction_(count_correction) {
  params_.validate();
}

Verdict RedQueue::on_arrival(std::size_t queue_len, Time now, Rng& rng) {
  state_.avg = ewma_update(state_.avg, static_cast<double>(queue_len), params_.q_weight);
  adapt(queue_len, now);
  // Draw only when the outcome is actually random; keeps traces cheap.
  double u = 0.0;
  if (queue_len < params_.q_size) {
    const double p_b = red_mark_prob(state_.avg, params_);
    if (p_b > 0.0 && p_b < 1.0) u = rng.uniform();
  }
  return red_drop_decision(state_, params_, queue_len, u, count_correction_);
}

FredQueue::FredQueue(RedParams params, FredState fred, ProbabilityClamp clamp,
                     bool count_correction)
    : RedQueue(params, count_correction), fred_(fred), clamp_(clamp) {
  fred_.max_p = clamp_.apply(params.max_p);
  params_.max_p = fred_.max_p;
}

void FredQueue::adapt(std::size_t, Time) {
  fred_ = fred_adapt(fred_, state_.avg, params_, clamp_);
  params_.max_p = fred_.max_p;
}

AredQueue::AredQueue(RedParams params, AredState ared, ProbabilityClamp clamp,
                     bool count_correction)
    : RedQueue(params, count_correction), ared_(ared), clamp_(clamp) {
  ared_.max_p = clamp_.apply(params.max_p);
  ared_.next_update = ared_.interval;
  params_.max_p = ared_.max_p;
}

void AredQueue::on_tick(std::size_t, Time now) {
  ared_ = ared_adapt(ared_, state_.avg, params_, now, clamp_);
  params_.max_p = ared_.max_p;
}

PiQueue::PiQueue(std::size_t capacity, PiState pi) : capacity_(capacity), pi_(pi) {
  if (capacity_ == 0) throw std::invalid_argument("PI queue capacity must be > 0");
  if (!(pi_.w > 0.0)) throw std::invalid_argument("PI sampling frequency must be > 0");
}

Verdict PiQueue::on_arrival(std::size_t queue_len, Time, Rng& rng) {
  if (queue_len >= capacity_) return Verdict::forced_drop;
  if (pi_.p <= 0.0) return Verdict::accept;
  return rng.uniform() < pi_.p ? Verdict::early_drop : Verdict::accept;
}

void PiQueue::on_tick(std::size_t queue_len, Time now) {
  pi_ = pi_probability(pi_, static_cast<double>(queue_len), now);
}

} // namespace aqmlab
