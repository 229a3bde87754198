#pragma once

#include "aqmlab/engine.hpp"
#include "aqmlab/rng.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace aqmlab {

/// Bounds applied to every adapted max_p.
struct ProbabilityClamp {
  double floor = 0.001;
  double ceil = 0.5;
  double apply(double p) const;
};

struct RedParams {
  double min_th = 100.0;
  double max_th = 150.0;
  std::size_t q_size = 200;
  double q_weight = 1e-4;
  double max_p = 0.1;
  bool gentle = true;

  /// Throws std::invalid_argument on a violated parameter invariant.
  void validate() const;
};

struct AvgQueue {
  double avg = 0.0;
  long count_since_drop = 0;
};

enum class Verdict : std::uint8_t { accept, early_drop, forced_drop };

inline bool is_drop(Verdict v) { return v != Verdict::accept; }

/// avg' = (1 - w_q) avg + w_q q
double ewma_update(double avg, double q, double w_q);

/// RED's base drop probability p_b for an average queue of `avg`.
double red_mark_prob(double avg, const RedParams& p);

/// Count-corrected probability p_a = p_b / (1 - count p_b), clamped to 1.
double red_count_corrected(double p_b, long count);

/// Drop test on an already-updated average. `u` is a uniform [0,1) draw.
Verdict red_drop_decision(AvgQueue& state, const RedParams& p, std::size_t queue_len,
                          double u, bool count_correction = true);

/// Full per-arrival RED step: EWMA update followed by the drop test.
Verdict red_enqueue_decision(AvgQueue& state, const RedParams& p, std::size_t queue_len,
                             Rng& rng, bool count_correction = true);

enum class LastAction : std::uint8_t { none, increased, decreased };

struct FredState {
  double max_p = 0.1;
  LastAction last_action = LastAction::none;
  double alpha = 3.0;
  double beta = 2.0;
};

/// Per-enqueue max_p adaptation with no two consecutive moves in the same
/// direction.
FredState fred_adapt(FredState state, double avg, const RedParams& p,
                     const ProbabilityClamp& clamp = {});

struct AredState {
  double max_p = 0.1;
  double alpha = 0.01;
  double beta = 0.09;
  Time interval = 0.3;
  Time next_update = 0.3;
};

/// Interval-gated AIMD on max_p toward the middle 20% of [min_th, max_th].
AredState ared_adapt(AredState state, double avg, const RedParams& p, Time now,
                     const ProbabilityClamp& clamp = {});

struct PiState {
  double a = 1.822e-5;
  double b = 1.816e-5;
  double q_ref = 100.0;
  double w = 170.0; // sampling frequency, Hz
  double p = 0.0;
  double q_prev = 0.0;
};

/// One PI sample: p = clamp01(p + a (q - q_ref) - b (q_prev - q_ref)).
PiState pi_probability(PiState state, double q, Time now);

/// A bottleneck queue discipline: admission control plus optional periodic
/// work. Implementations are single-threaded and owned by one simulation.
class QueueDiscipline {
public:
  virtual ~QueueDiscipline() = default;

  virtual std::string_view name() const = 0;
  virtual std::size_t capacity() const = 0;
  /// Decides admission of one arriving packet, `queue_len` packets waiting.
  virtual Verdict on_arrival(std::size_t queue_len, Time now, Rng& rng) = 0;

  virtual std::optional<Time> tick_interval() const { return std::nullopt; }
  virtual void on_tick(std::size_t /*queue_len*/, Time /*now*/) {}

  /// Averaged queue estimate (EWMA for RED-family, instantaneous otherwise).
  virtual double average_queue() const { return 0.0; }
  /// Current drop parameter: max_p for RED-family, p for PI, 0 for drop-tail.
  virtual double current_max_p() const { return 0.0; }
};

class DropTailQueue : public QueueDiscipline {
public:
  explicit DropTailQueue(std::size_t capacity) : capacity_(capacity) {}
  std::string_view name() const override { return "droptail"; }
  std::size_t capacity() const override { return capacity_; }
  Verdict on_arrival(std::size_t queue_len, Time now, Rng& rng) override;
  double average_queue() const override { return last_len_; }

private:
  std::size_t capacity_;
  double last_len_ = 0.0;
};

/// RED in drop mode. Subclasses adjust max_p in adapt(), which runs after the
/// EWMA update and before the drop test.
class RedQueue : public QueueDiscipline {
public:
  explicit RedQueue(RedParams params, bool count_correction = true);

  std::string_view name() const override { return "red"; }
  std::size_t capacity() const override { return params_.q_size; }
  Verdict on_arrival(std::size_t queue_len, Time now, Rng& rng) override;
  double average_queue() const override { return state_.avg; }
  double current_max_p() const override { return params_.max_p; }

  const RedParams& params() const { return params_; }
  const AvgQueue& state() const { return state_; }

protected:
  virtual void adapt(std::size_t /*queue_len*/, Time /*now*/) {}

  RedParams params_;
  AvgQueue state_;
  bool count_correction_;
};

class FredQueue : public RedQueue {
public:
  FredQueue(RedParams params, FredState fred, ProbabilityClamp clamp = {},
            bool count_correction = true);
  std::string_view name() const override { return "fred"; }
  const FredState& fred() const { return fred_; }

protected:
  void adapt(std::size_t queue_len, Time now) override;

private:
  FredState fred_;
  ProbabilityClamp clamp_;
};

class AredQueue : public RedQueue {
public:
  AredQueue(RedParams params, AredState ared, ProbabilityClamp clamp = {},
            bool count_correction = true);
  std::string_view name() const override { return "ared"; }
  std::optional<Time> tick_interval() const override { return ared_.interval; }
  void on_tick(std::size_t queue_len, Time now) override;
  const AredState& ared() const { return ared_; }

private:
  AredState ared_;
  ProbabilityClamp clamp_;
};

class PiQueue : public QueueDiscipline {
public:
  PiQueue(std::size_t capacity, PiState pi);
  std::string_view name() const override { return "pi"; }
  std::size_t capacity() const override { return capacity_; }
  Verdict on_arrival(std::size_t queue_len, Time now, Rng& rng) override;
  std::optional<Time> tick_interval() const override { return 1.0 / pi_.w; }
  void on_tick(std::size_t queue_len, Time now) override;
  double average_queue() const override { return pi_.q_prev; }
  double current_max_p() const override { return pi_.p; }
  const PiState& pi() const { return pi_; }

private:
  std::size_t capacity_;
  PiState pi_;
};

} // namespace aqmlab
