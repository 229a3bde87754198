#include "aqmlab/engine.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace aqmlab {

void EventQueue::schedule(Event ev) {
  if (!(ev.time >= now_) || !std::isfinite(ev.time)) {
    std::ostringstream msg;
    msg << "cannot schedule event at t=" << ev.time << " (clock is " << now_
        << ")";
    throw std::invalid_argument(msg.str());
  }
  ev.seq = next_seq_++;
  heap_.push(ev);
}

void EventQueue::schedule(Time time, EventKind kind, std::uint32_t target,
                          const Packet& packet) {
  Event ev;
  ev.time = time;
  ev.kind = kind;
  ev.target = target;
  ev.packet = packet;
  schedule(ev);
}

std::optional<Event> EventQueue::pop_until(Time t_end) {
  if (heap_.empty() || heap_.top().time > t_end) return std::nullopt;
  Event ev = heap_.top();
  heap_.pop();
  now_ = ev.time;
  return ev;
}

void EventQueue::advance_to(Time t) {
  if (t < now_) throw std::invalid_argument("clock cannot move backwards");
  now_ = t;
}

Link::Link(double bandwidth_bps, Time prop_delay)
    : bandwidth_(bandwidth_bps), prop_delay_(prop_delay) {
  if (!(bandwidth_bps > 0.0)) throw std::invalid_argument("link bandwidth must be > 0");
  if (!(prop_delay >= 0.0)) throw std::invalid_argument("link propagation delay must be >= 0");
}

Time transmit_time(const Packet& pkt, const Link& link) {
  return link.serialization_time(pkt.size) + link.prop_delay();
}

} // namespace aqmlab
