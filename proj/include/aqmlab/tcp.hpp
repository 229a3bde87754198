#pragma once

#include "aqmlab/engine.hpp"

#include <optional>
#include <set>

namespace aqmlab {

enum class CcMode : std::uint8_t { slow_start, congestion_avoidance, fast_recovery };

struct TcpConfig {
  double max_window = 10000.0; // packets
  double initial_cwnd = 1.0;
  Time initial_rto = 1.0;
  Time min_rto = 0.2;
  Time max_rto = 60.0;
};

/// NewReno sender state at packet granularity. Sequence numbers start at 0;
/// highest_acked is the cumulative ack (-1 before anything is acked).
struct FlowState {
  double cwnd = 1.0;
  double ssthresh = 10000.0;
  CcMode mode = CcMode::slow_start;
  double max_window = 10000.0;
  Time srtt = 0.0;
  Time rttvar = 0.0;
  bool has_rtt = false;
  Time rto = 1.0;
  Time min_rto = 0.2;
  Time max_rto = 60.0;
  SeqNo highest_acked = -1;
  SeqNo highest_sent = -1;
  int dup_ack_count = 0;
  SeqNo recover = -1;

  static FlowState fresh(const TcpConfig& cfg);

  SeqNo in_flight() const { return highest_sent - highest_acked; }
  /// Packets that may be sent now without exceeding floor(cwnd) in flight.
  SeqNo send_allowance() const;
};

/// Processes a cumulative ack at or beyond highest_acked. Returns a sequence
/// number to retransmit (NewReno partial ack), if any.
std::optional<SeqNo> on_ack(FlowState& flow, SeqNo acked_seq);

/// Processes a duplicate ack. Returns the sequence to fast-retransmit on the
/// third duplicate.
std::optional<SeqNo> on_dup_ack(FlowState& flow);

/// RTO expiry: collapse to one packet, back off the timer and rewind
/// highest_sent so transmission resumes at highest_acked + 1.
void on_timeout(FlowState& flow);

/// Smoothed RTT estimator (gains 1/8, 1/4); rto = srtt + 4 rttvar, floored.
void on_rtt_sample(FlowState& flow, Time sample);

/// Cumulative-ack receiver with an out-of-order buffer.
class TcpReceiver {
public:
  /// Accepts data packet `seq`; returns the cumulative ack to send.
  SeqNo receive(SeqNo seq);
  SeqNo cumulative_ack() const { return next_expected_ - 1; }
  void reset();

private:
  SeqNo next_expected_ = 0;
  std::set<SeqNo> out_of_order_;
};

} // namespace aqmlab
