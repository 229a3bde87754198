#include "aqmlab/metrics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace aqmlab {

void RunningStats::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

double RunningStats::stddev() const { return std::sqrt(variance()); }

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

void write_timeseries(std::ostream& os, const RunMetrics& m) {
  os << kTimeseriesHeader << '\n';
  for (const auto& r : m.series) {
    os << format_double(r.time) << ',' << r.queue << ',' << format_double(r.avg_queue) << ','
       << format_double(r.max_p) << ',' << r.drops_cum << ',' << format_double(r.throughput_bps)
       << '\n';
  }
}

namespace {

template <class Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  writer(os);
  os.flush();
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

} // namespace

void emit_timeseries(const RunMetrics& m, const std::filesystem::path& path) {
  write_file(path, [&](std::ostream& os) { write_timeseries(os, m); });
}

void write_summary(std::ostream& os, const std::vector<RunMetrics>& runs) {
  os << kSummaryHeader << '\n';
  for (const auto& m : runs) {
    os << m.aqm << ',' << format_double(m.mean_delay_ms) << ',' << format_double(m.std_delay_ms)
       << ',' << format_double(m.mean_tput_bps) << ',' << format_double(m.std_tput_bps) << ','
       << format_double(m.drop_rate) << '\n';
  }
}

void emit_summary(const std::vector<RunMetrics>& runs, const std::filesystem::path& path) {
  write_file(path, [&](std::ostream& os) { write_summary(os, runs); });
}

double fraction_in_band(const RunMetrics& m, double lo, double hi, Time from) {
  std::size_t total = 0;
  std::size_t inside = 0;
  for (const auto& r : m.series) {
    if (r.time < from) continue;
    ++total;
    if (r.avg_queue >= lo && r.avg_queue <= hi) ++inside;
  }
  return total ? static_cast<double>(inside) / static_cast<double>(total) : 0.0;
}

} // namespace aqmlab
