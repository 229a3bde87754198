#pragma once

#include "aqmlab/engine.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace aqmlab {

/// Welford mean / population variance.
class RunningStats {
public:
  void add(double x);
  std::uint64_t count() const { return n_; }
  double mean() const { return n_ ? mean_ : 0.0; }
  double variance() const { return n_ ? m2_ / static_cast<double>(n_) : 0.0; }
  double stddev() const;

private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct SampleRow {
  Time time = 0.0;
  std::size_t queue = 0;
  double avg_queue = 0.0;
  double max_p = 0.0;
  std::uint64_t drops_cum = 0;
  double throughput_bps = 0.0; // trailing window ending at `time`
};

struct RunMetrics {
  std::string scenario;
  std::string aqm;
  double capacity_bps = 0.0;

  double mean_delay_ms = 0.0;
  double std_delay_ms = 0.0;
  std::uint64_t delay_samples = 0;
  double mean_tput_bps = 0.0;
  double std_tput_bps = 0.0;
  double drop_rate = 0.0;

  std::uint64_t arrivals = 0;
  std::uint64_t early_drops = 0;
  std::uint64_t forced_drops = 0;
  std::uint64_t departures = 0;

  /// Instantaneous queue statistics over post-warmup samples.
  double mean_queue = 0.0;
  double std_queue = 0.0;

  std::vector<double> window_tput_bps; // consecutive throughput windows
  std::vector<SampleRow> series;
};

inline constexpr const char* kTimeseriesHeader =
    "time_s,queue_pkts,avg_queue_pkts,max_p,drops_cum,throughput_bps";
inline constexpr const char* kSummaryHeader =
    "aqm,mean_delay_ms,std_delay_ms,mean_tput_bps,std_tput_bps,drop_rate";

/// Shortest round-trip decimal form.
std::string format_double(double v);

void write_timeseries(std::ostream& os, const RunMetrics& m);
void emit_timeseries(const RunMetrics& m, const std::filesystem::path& path);

void write_summary(std::ostream& os, const std::vector<RunMetrics>& runs);
void emit_summary(const std::vector<RunMetrics>& runs, const std::filesystem::path& path);

/// Number of samples whose avg_queue lies in [lo, hi] at or after `from`,
/// divided by the number of samples at or after `from`.
double fraction_in_band(const RunMetrics& m, double lo, double hi, Time from);

} // namespace aqmlab
