#include "aqmlab/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace aqmlab {

namespace {

constexpr std::uint32_t kBottleneck = std::numeric_limits<std::uint32_t>::max();

struct Flow {
  FlowState cc;
  TcpReceiver rx;
  Time access_prop = 0.0;
  Time access_free_at = 0.0;
  bool active = false;
  std::uint32_t connection = 0;
  std::uint32_t rx_connection = 0;
  bool timer_running = false;
  bool timer_pending = false;
  Time rto_deadline = 0.0;
};

class Dumbbell {
public:
  Dumbbell(const ScenarioSpec& spec, QueueDiscipline& aqm, const SampleObserver& observer)
      : spec_(spec),
        aqm_(aqm),
        observer_(observer),
        bottleneck_(spec.bottleneck_bw, spec.bottleneck_prop),
        access_(spec.access_bw, 0.0),
        drop_rng_(Rng::stream(spec.seed, 0xd5)) {
    const auto rtts = flow_rtts(spec);
    flows_.resize(rtts.size());
    for (std::size_t i = 0; i < rtts.size(); ++i) {
      flows_[i].access_prop = rtts[i] / 2.0 - spec.bottleneck_prop;
    }
    sample_count_ = static_cast<std::size_t>(std::floor(spec.duration / spec.sample_interval + 1e-9)) + 1;
    window_bins_ = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(spec.throughput_window / spec.sample_interval)));
    bin_bits_.assign(sample_count_ + 1, 0.0);
  }

  RunMetrics run() {
    for (std::size_t i = 0; i < spec_.flow_schedule.size(); ++i) {
      const auto& step = spec_.flow_schedule[i];
      if (step.time <= spec_.duration)
        events_.schedule(step.time, EventKind::scenario_change, static_cast<std::uint32_t>(i));
    }
    events_.schedule(0.0, EventKind::sample, 0);
    if (auto iv = aqm_.tick_interval()) {
      next_tick_ = *iv;
      if (next_tick_ <= spec_.duration) events_.schedule(next_tick_, EventKind::aqm_tick);
    }
    run_until(events_, spec_.duration, [this](const Event& ev) { dispatch(ev); });
    return finish();
  }

private:
  void dispatch(const Event& ev) {
    switch (ev.kind) {
    case EventKind::packet_arrival:
      if (ev.packet.is_ack)
        on_ack_arrival(ev.target, ev.packet);
      else
        on_bottleneck_arrival(ev.packet);
      break;
    case EventKind::packet_departure:
      on_departure();
      break;
    case EventKind::timer_expiry:
      on_rto_timer(ev.target);
      break;
    case EventKind::scenario_change:
      apply_flow_count(spec_.flow_schedule[ev.target].count);
      break;
    case EventKind::aqm_tick:
      aqm_.on_tick(queue_.size(), now());
      next_tick_ += *aqm_.tick_interval();
      if (next_tick_ <= spec_.duration) events_.schedule(next_tick_, EventKind::aqm_tick);
      break;
    case EventKind::sample:
      on_sample(ev.target);
      break;
    }
  }

  Time now() const { return events_.now(); }

  void apply_flow_count(std::size_t count) {
    for (std::size_t i = 0; i < flows_.size(); ++i) {
      Flow& f = flows_[i];
      if (i < count && !f.active) {
        f.cc = FlowState::fresh(spec_.tcp);
        ++f.connection;
        f.active = true;
        f.timer_running = false;
        try_send(static_cast<std::uint32_t>(i));
      } else if (i >= count && f.active) {
        f.active = false;
        f.timer_running = false;
      }
    }
  }

  void transmit(std::uint32_t id, SeqNo seq) {
    Flow& f = flows_[id];
    Packet p;
    p.id = next_packet_id_++;
    p.flow_id = id;
    p.size = spec_.packet_size;
    p.seq_no = seq;
    p.sent_time = now();
    p.connection = f.connection;
    const Time start = std::max(now(), f.access_free_at);
    f.access_free_at = start + access_.serialization_time(p.size);
    events_.schedule(f.access_free_at + f.access_prop, EventKind::packet_arrival, kBottleneck, p);
  }

  void try_send(std::uint32_t id) {
    Flow& f = flows_[id];
    if (!f.active) return;
    for (SeqNo n = f.cc.send_allowance(); n > 0; --n) transmit(id, ++f.cc.highest_sent);
    if (f.cc.in_flight() > 0 && !f.timer_running) arm_timer(id);
  }

  void arm_timer(std::uint32_t id) {
    Flow& f = flows_[id];
    f.timer_running = true;
    f.rto_deadline = now() + f.cc.rto;
    if (!f.timer_pending) {
      f.timer_pending = true;
      events_.schedule(f.rto_deadline, EventKind::timer_expiry, id);
    }
  }

  void on_rto_timer(std::uint32_t id) {
    Flow& f = flows_[id];
    f.timer_pending = false;
    if (!f.active || !f.timer_running) return;
    if (now() < f.rto_deadline) {
      f.timer_pending = true;
      events_.schedule(f.rto_deadline, EventKind::timer_expiry, id);
      return;
    }
    on_timeout(f.cc);
    f.timer_running = false;
    try_send(id);
    arm_timer(id);
  }

  void on_ack_arrival(std::uint32_t id, const Packet& ack) {
    Flow& f = flows_[id];
    if (!f.active || ack.connection != f.connection) return;
    if (ack.seq_no > f.cc.highest_acked) {
      on_rtt_sample(f.cc, now() - ack.sent_time);
      if (auto rtx = on_ack(f.cc, ack.seq_no)) transmit(id, *rtx);
      if (f.cc.in_flight() > 0)
        arm_timer(id);
      else
        f.timer_running = false;
      try_send(id);
    } else if (ack.seq_no == f.cc.highest_acked && f.cc.in_flight() > 0) {
      if (auto rtx = on_dup_ack(f.cc)) transmit(id, *rtx);
      try_send(id);
    }
  }

  void on_bottleneck_arrival(Packet p) {
    ++arrivals_;
    const Verdict v = aqm_.on_arrival(queue_.size(), now(), drop_rng_);
    if (v == Verdict::early_drop) {
      ++early_drops_;
      return;
    }
    if (v == Verdict::forced_drop) {
      ++forced_drops_;
      return;
    }
    p.enqueue_time = now();
    if (!link_busy_)
      start_service(p);
    else
      queue_.push_back(p);
  }

  void start_service(const Packet& p) {
    link_busy_ = true;
    in_service_ = p;
    if (!spec_.delay_from_queue_length) delay_.add((now() - p.enqueue_time) * 1e3);
    events_.schedule(now() + bottleneck_.serialization_time(p.size), EventKind::packet_departure);
  }

  void on_departure() {
    const Packet p = in_service_;
    ++departures_;
    const auto bin = static_cast<std::size_t>(std::floor(now() / spec_.sample_interval));
    if (bin < bin_bits_.size()) bin_bits_[bin] += 8.0 * static_cast<double>(p.size);
    deliver(p);
    link_busy_ = false;
    if (!queue_.empty()) {
      const Packet next = queue_.front();
      queue_.pop_front();
      start_service(next);
    }
  }

  void deliver(const Packet& p) {
    Flow& f = flows_[p.flow_id];
    if (p.connection > f.rx_connection) {
      f.rx.reset();
      f.rx_connection = p.connection;
    } else if (p.connection < f.rx_connection) {
      return;
    }
    Packet ack;
    ack.id = next_packet_id_++;
    ack.flow_id = p.flow_id;
    ack.size = spec_.ack_size;
    ack.seq_no = f.rx.receive(p.seq_no);
    ack.sent_time = p.sent_time;
    ack.connection = p.connection;
    ack.is_ack = true;
    // Reverse path: no queueing, propagation only.
    const Time arrival = now() + bottleneck_.prop_delay() + f.access_prop + bottleneck_.prop_delay();
    events_.schedule(arrival, EventKind::packet_arrival, p.flow_id, ack);
  }

  void on_sample(std::uint32_t k) {
    SampleRow row;
    row.time = now();
    row.queue = queue_.size();
    row.avg_queue = aqm_.average_queue();
    row.max_p = aqm_.current_max_p();
    row.drops_cum = early_drops_ + forced_drops_;
    if (k > 0) {
      const std::size_t n = std::min<std::size_t>(k, window_bins_);
      double bits = 0.0;
      for (std::size_t b = k - n; b < k; ++b) bits += bin_bits_[b];
      row.throughput_bps = bits / (static_cast<double>(n) * spec_.sample_interval);
    }
    if (spec_.delay_from_queue_length) {
      delay_.add(static_cast<double>(row.queue) * bottleneck_.serialization_time(spec_.packet_size) * 1e3);
    }
    if (row.time >= spec_.warmup) queue_stats_.add(static_cast<double>(row.queue));
    series_.push_back(row);
    if (observer_) observer_(row);
    if (k + 1 < sample_count_) {
      const Time next = std::min(static_cast<double>(k + 1) * spec_.sample_interval, spec_.duration);
      events_.schedule(next, EventKind::sample, k + 1);
    }
  }

  RunMetrics finish() {
    RunMetrics m;
    m.scenario = spec_.name;
    m.aqm = std::string(aqm_.name());
    m.capacity_bps = spec_.bottleneck_bw;
    m.mean_delay_ms = delay_.mean();
    m.std_delay_ms = delay_.stddev();
    m.delay_samples = delay_.count();
    m.arrivals = arrivals_;
    m.early_drops = early_drops_;
    m.forced_drops = forced_drops_;
    m.departures = departures_;
    m.drop_rate = arrivals_ ? static_cast<double>(early_drops_ + forced_drops_) / static_cast<double>(arrivals_) : 0.0;

    const auto windows = static_cast<std::size_t>(std::floor(spec_.duration / spec_.throughput_window + 1e-9));
    RunningStats tput;
    for (std::size_t w = 0; w < windows; ++w) {
      double bits = 0.0;
      for (std::size_t b = w * window_bins_; b < (w + 1) * window_bins_ && b < bin_bits_.size(); ++b)
        bits += bin_bits_[b];
      const double bps = bits / spec_.throughput_window;
      m.window_tput_bps.push_back(bps);
      tput.add(bps);
    }
    m.mean_tput_bps = tput.mean();
    m.std_tput_bps = tput.stddev();
    m.mean_queue = queue_stats_.mean();
    m.std_queue = queue_stats_.stddev();
    m.series = std::move(series_);
    return m;
  }

  const ScenarioSpec& spec_;
  QueueDiscipline& aqm_;
  const SampleObserver& observer_;
  EventQueue events_;
  Link bottleneck_;
  Link access_;
  Rng drop_rng_;
  std::vector<Flow> flows_;
  std::deque<Packet> queue_;
  bool link_busy_ = false;
  Packet in_service_{};
  Time next_tick_ = 0.0;
  std::uint64_t next_packet_id_ = 0;

  std::uint64_t arrivals_ = 0;
  std::uint64_t early_drops_ = 0;
  std::uint64_t forced_drops_ = 0;
  std::uint64_t departures_ = 0;
  RunningStats delay_;
  RunningStats queue_stats_;
  std::size_t sample_count_ = 0;
  std::size_t window_bins_ = 10;
  std::vector<double> bin_bits_;
  std::vector<SampleRow> series_;
};

} // namespace

RunMetrics simulate(const ScenarioSpec& spec, QueueDiscipline& aqm, const SampleObserver& observer) {
  spec.validate();
  Dumbbell net(spec, aqm, observer);
  return net.run();
}

RunMetrics run_scenario(const ScenarioSpec& spec, std::shared_ptr<const SomMap> map) {
  spec.validate();
  if (spec.aqm.name == "kred" && !map) {
    if (spec.aqm.map_file.empty()) throw ConfigError("aqm 'kred' requires a trained map file");
    map = std::make_shared<const SomMap>(load_map(spec.aqm.map_file));
  }
  auto aqm = make_discipline(spec.aqm, std::move(map));
  return simulate(spec, *aqm);
}

} // namespace aqmlab
