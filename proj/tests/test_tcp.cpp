#include "aqmlab/tcp.hpp"

#include <doctest.h>

using namespace aqmlab;

namespace {

FlowState with_window(double cwnd, CcMode mode) {
  FlowState f = FlowState::fresh({});
  f.cwnd = cwnd;
  f.mode = mode;
  f.ssthresh = mode == CcMode::slow_start ? 1e9 : 1.0;
  f.highest_acked = 99;
  f.highest_sent = 99 + static_cast<SeqNo>(cwnd);
  return f;
}

} // namespace

TEST_CASE("slow start grows by one per new ack") {
  FlowState f = with_window(10, CcMode::slow_start);
  CHECK_FALSE(on_ack(f, 100).has_value());
  CHECK(f.cwnd == 11.0);
}

TEST_CASE("congestion avoidance grows by 1/cwnd per new ack") {
  FlowState f = with_window(10, CcMode::congestion_avoidance);
  on_ack(f, 100);
  CHECK(f.cwnd == doctest::Approx(10.1));
}

TEST_CASE("cwnd is capped at max_window") {
  FlowState f = with_window(10000, CcMode::slow_start);
  on_ack(f, 100);
  CHECK(f.cwnd == 10000.0);
  FlowState g = with_window(10000, CcMode::congestion_avoidance);
  on_ack(g, 100);
  CHECK(g.cwnd == 10000.0);
}

TEST_CASE("third duplicate ack halves the window") {
  FlowState f = with_window(10, CcMode::congestion_avoidance);
  CHECK_FALSE(on_dup_ack(f).has_value());
  CHECK(f.cwnd == 10.0);
  CHECK_FALSE(on_dup_ack(f).has_value());
  CHECK(f.cwnd == 10.0);
  const auto rtx = on_dup_ack(f);
  REQUIRE(rtx.has_value());
  CHECK(*rtx == 100);
  CHECK(f.ssthresh == 5.0);
  CHECK(f.cwnd == 5.0);
  CHECK(f.mode == CcMode::fast_recovery);
}

TEST_CASE("ssthresh floor is two packets") {
  FlowState f = with_window(3, CcMode::congestion_avoidance);
  on_dup_ack(f);
  on_dup_ack(f);
  on_dup_ack(f);
  CHECK(f.ssthresh == 2.0);
}

TEST_CASE("fast recovery: inflation, partial and full acks") {
  FlowState f = with_window(10, CcMode::congestion_avoidance); // 100..109 in flight
  for (int i = 0; i < 3; ++i) on_dup_ack(f);
  CHECK(f.recover == 109);
  on_dup_ack(f);
  CHECK(f.cwnd == 6.0);
  // Partial ack: 100..103 delivered, 104 lost too.
  const auto rtx = on_ack(f, 103);
  REQUIRE(rtx.has_value());
  CHECK(*rtx == 104);
  CHECK(f.mode == CcMode::fast_recovery);
  CHECK(f.cwnd == doctest::Approx(6.0 - 4.0 + 1.0));
  // Full ack ends recovery with cwnd = ssthresh.
  CHECK_FALSE(on_ack(f, 109).has_value());
  CHECK(f.mode == CcMode::congestion_avoidance);
  CHECK(f.cwnd == 5.0);
  CHECK(f.dup_ack_count == 0);
}

TEST_CASE("timeout collapses the window and backs off the timer") {
  FlowState f = with_window(40, CcMode::congestion_avoidance);
  f.rto = 1.0;
  on_timeout(f);
  CHECK(f.ssthresh == 20.0);
  CHECK(f.cwnd == 1.0);
  CHECK(f.mode == CcMode::slow_start);
  CHECK(f.rto == 2.0);
  CHECK(f.highest_sent == f.highest_acked);
  f.rto = 60.0;
  on_timeout(f);
  CHECK(f.rto == 60.0);
}

TEST_CASE("rtt estimator") {
  FlowState f = FlowState::fresh({});
  CHECK(f.rto == 1.0);
  on_rtt_sample(f, 0.1);
  CHECK(f.srtt == doctest::Approx(0.1));
  CHECK(f.rttvar == doctest::Approx(0.05));
  CHECK(f.rto == doctest::Approx(0.3));
  on_rtt_sample(f, 0.1);
  CHECK(f.srtt == doctest::Approx(0.1));
  CHECK(f.rttvar == doctest::Approx(0.0375));
  CHECK(f.rto == doctest::Approx(0.25));
  for (int i = 0; i < 100; ++i) on_rtt_sample(f, 0.01);
  CHECK(f.rto == 0.2);
}

TEST_CASE("send allowance respects floor(cwnd)") {
  FlowState f = FlowState::fresh({});
  f.cwnd = 4.7;
  CHECK(f.send_allowance() == 4);
  f.highest_sent = 2;
  CHECK(f.in_flight() == 3);
  CHECK(f.send_allowance() == 1);
}

TEST_CASE("receiver produces cumulative acks over gaps") {
  TcpReceiver r;
  CHECK(r.receive(0) == 0);
  CHECK(r.receive(2) == 0);
  CHECK(r.receive(3) == 0);
  CHECK(r.receive(1) == 3);
  CHECK(r.receive(1) == 3);
  r.reset();
  CHECK(r.cumulative_ack() == -1);
}

TEST_CASE("AIMD sawtooth under periodic loss") {
  FlowState f = FlowState::fresh({});
  f.ssthresh = 20;
  SeqNo acked = -1;
  int drops = 0;
  double prev = f.cwnd;
  bool saw_increase = false;
  for (int round = 0; round < 2000; ++round) {
    f.highest_sent = acked + static_cast<SeqNo>(f.cwnd);
    if (round % 200 == 199) {
      for (int i = 0; i < 3; ++i) on_dup_ack(f);
      CHECK(f.cwnd < prev);
      ++drops;
      on_ack(f, f.recover);
      acked = f.recover;
    } else {
      on_ack(f, ++acked);
      saw_increase = saw_increase || f.cwnd > prev;
    }
    CHECK(f.cwnd >= 1.0);
    prev = f.cwnd;
  }
  CHECK(drops == 10);
  CHECK(saw_increase);
}
