#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <vector>

namespace aqmlab {

/// Simulated time in seconds.
using Time = double;
using SeqNo = std::int64_t;

struct Packet {
  std::uint64_t id = 0;
  std::uint32_t flow_id = 0;
  std::uint32_t size = 0; // bytes
  SeqNo seq_no = 0;       // data: sequence number; ack: cumulative ack
  Time enqueue_time = 0.0;
  Time sent_time = 0.0;   // data: departure from sender; ack: echoed value
  std::uint32_t connection = 0;
  bool is_ack = false;
};

enum class EventKind : std::uint8_t {
  packet_arrival,
  packet_departure,
  timer_expiry,
  scenario_change,
  aqm_tick,
  sample,
};

struct Event {
  Time time = 0.0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::timer_expiry;
  std::uint32_t target = 0;
  Packet packet{};
};

/// Pending events ordered by (time, insertion sequence).
class EventQueue {
public:
  Time now() const { return now_; }
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  std::uint64_t scheduled_count() const { return next_seq_; }

  /// Inserts `ev`, overwriting its seq. Throws std::invalid_argument when
  /// ev.time lies before the current clock.
  void schedule(Event ev);
  void schedule(Time time, EventKind kind, std::uint32_t target = 0,
                const Packet& packet = {});

  /// Removes and returns the earliest event if its time is <= t_end,
  /// advancing the clock to it.
  std::optional<Event> pop_until(Time t_end);

  /// Moves the clock forward without dispatching. Throws if t < now().
  void advance_to(Time t);

private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  Time now_ = 0.0;
  std::uint64_t next_seq_ = 0;
};

struct SimulationReport {
  Time clock = 0.0;
  std::uint64_t events_dispatched = 0;
};

/// Dispatches every event with time <= t_end to `handler`, then sets the
/// clock to t_end.
template <class Handler>
SimulationReport run_until(EventQueue& queue, Time t_end, Handler&& handler) {
  SimulationReport report;
  while (auto ev = queue.pop_until(t_end)) {
    handler(*ev);
    ++report.events_dispatched;
  }
  if (t_end > queue.now()) queue.advance_to(t_end);
  report.clock = queue.now();
  return report;
}

/// Point-to-point link. Serialization is FIFO, one packet at a time.
class Link {
public:
  Link(double bandwidth_bps, Time prop_delay);

  double bandwidth() const { return bandwidth_; }
  Time prop_delay() const { return prop_delay_; }
  Time serialization_time(std::uint32_t bytes) const {
    return static_cast<double>(bytes) * 8.0 / bandwidth_;
  }

private:
  double bandwidth_;
  Time prop_delay_;
};

/// Serialization plus propagation time of `pkt` over `link`.
Time transmit_time(const Packet& pkt, const Link& link);

} // namespace aqmlab
