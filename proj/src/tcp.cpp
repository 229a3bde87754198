#include "aqmlab/tcp.hpp"

#include <algorithm>
#include <cmath>

namespace aqmlab {

namespace {

void clamp_cwnd(FlowState& flow) {
  flow.cwnd = std::clamp(flow.cwnd, 1.0, flow.max_window);
}

double halved_window(const FlowState& flow) { return std::max(flow.cwnd / 2.0, 2.0); }

} // namespace

FlowState FlowState::fresh(const TcpConfig& cfg) {
  FlowState f;
  f.max_window = cfg.max_window;
  f.cwnd = std::clamp(cfg.initial_cwnd, 1.0, cfg.max_window);
  f.ssthresh = cfg.max_window;
  f.rto = cfg.initial_rto;
  f.min_rto = cfg.min_rto;
  f.max_rto = cfg.max_rto;
  return f;
}

SeqNo FlowState::send_allowance() const {
  const auto window = static_cast<SeqNo>(std::floor(cwnd));
  return std::max<SeqNo>(0, window - in_flight());
}

std::optional<SeqNo> on_ack(FlowState& flow, SeqNo acked_seq) {
  if (acked_seq <= flow.highest_acked) return std::nullopt;
  const SeqNo newly_acked = acked_seq - flow.highest_acked;
  flow.highest_acked = acked_seq;
  flow.highest_sent = std::max(flow.highest_sent, acked_seq);
  std::optional<SeqNo> retransmit;

  if (flow.mode == CcMode::fast_recovery) {
    if (acked_seq >= flow.recover) {
      flow.cwnd = flow.ssthresh;
      flow.mode = CcMode::congestion_avoidance;
    } else {
      // Partial ack: the next hole is lost too.
      retransmit = acked_seq + 1;
      flow.cwnd = flow.cwnd - static_cast<double>(newly_acked) + 1.0;
    }
  } else if (flow.cwnd < flow.ssthresh) {
    flow.cwnd += 1.0;
    if (flow.cwnd >= flow.ssthresh) flow.mode = CcMode::congestion_avoidance;
  } else {
    flow.mode = CcMode::congestion_avoidance;
    flow.cwnd += 1.0 / flow.cwnd;
  }
  flow.dup_ack_count = 0;
  clamp_cwnd(flow);
  return retransmit;
}

std::optional<SeqNo> on_dup_ack(FlowState& flow) {
  ++flow.dup_ack_count;
  if (flow.mode == CcMode::fast_recovery) {
    flow.cwnd += 1.0;
    clamp_cwnd(flow);
    return std::nullopt;
  }
  // Only one window reduction per loss episode (recover guard).
  if (flow.dup_ack_count == 3 && flow.highest_acked >= flow.recover) {
    flow.ssthresh = halved_window(flow);
    flow.cwnd = flow.ssthresh;
    flow.mode = CcMode::fast_recovery;
    flow.recover = flow.highest_sent;
    clamp_cwnd(flow);
    return flow.highest_acked + 1;
  }
  return std::nullopt;
}

void on_timeout(FlowState& flow) {
  flow.ssthresh = halved_window(flow);
  flow.cwnd = 1.0;
  flow.mode = CcMode::slow_start;
  flow.rto = std::min(flow.rto * 2.0, flow.max_rto);
  flow.recover = flow.highest_sent;
  flow.highest_sent = flow.highest_acked;
  flow.dup_ack_count = 0;
}

void on_rtt_sample(FlowState& flow, Time sample) {
  if (!flow.has_rtt) {
    flow.srtt = sample;
    flow.rttvar = sample / 2.0;
    flow.has_rtt = true;
  } else {
    flow.rttvar = 0.75 * flow.rttvar + 0.25 * std::abs(flow.srtt - sample);
    flow.srtt = 0.875 * flow.srtt + 0.125 * sample;
  }
  flow.rto = std::clamp(flow.srtt + 4.0 * flow.rttvar, flow.min_rto, flow.max_rto);
}

SeqNo TcpReceiver::receive(SeqNo seq) {
  if (seq == next_expected_) {
    ++next_expected_;
    while (!out_of_order_.empty() && *out_of_order_.begin() == next_expected_) {
      out_of_order_.erase(out_of_order_.begin());
      ++next_expected_;
    }
  } else if (seq > next_expected_) {
    out_of_order_.insert(seq);
  }
  return cumulative_ack();
}

void TcpReceiver::reset() {
  next_expected_ = 0;
  out_of_order_.clear();
}

} // namespace aqmlab
