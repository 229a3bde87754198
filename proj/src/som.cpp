#include "aqmlab/som.hpp"

#include "aqmlab/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string_view>

namespace aqmlab {

void LearnParams::validate() const {
  if (!(eta_in >= 0.0 && eta_out >= 0.0)) throw std::invalid_argument("learning rates must be >= 0");
  if (!(radius >= 0.0)) throw std::invalid_argument("neighbourhood radius must be >= 0");
  if (!(decay > 0.0 && decay <= 1.0)) throw std::invalid_argument("decay must lie in (0, 1]");
  if (!(eta_floor >= 0.0 && radius_floor >= 0.0)) throw std::invalid_argument("floors must be >= 0");
  if (!(explore_sigma >= 0.0)) throw std::invalid_argument("explore_sigma must be >= 0");
}

LearnParams LearnParams::decayed() const {
  LearnParams next = *this;
  // A rate already below its floor (e.g. zero) stays where it is.
  next.eta_in = std::min(eta_in, std::max(eta_in * decay, eta_floor));
  next.eta_out = std::min(eta_out, std::max(eta_out * decay, eta_floor));
  next.radius = std::min(radius, std::max(radius * decay, radius_floor));
  return next;
}

double OutputRange::clamp(double v) const {
  if (std::isnan(v)) return lo;
  return std::clamp(v, lo, hi);
}

SomMap::SomMap(std::size_t rows, std::size_t cols, OutputRange range)
    : rows_(rows), cols_(cols), range_(range), neurons_(rows * cols) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("SOM dimensions must be positive");
  if (!(range.lo <= range.hi)) throw std::invalid_argument("SOM output range is empty");
  for (auto& n : neurons_) n.out = range_.clamp(0.0);
}

SomMap SomMap::random(std::size_t rows, std::size_t cols, Rng& rng, double out_lo,
                      double out_hi, OutputRange range) {
  SomMap map(rows, cols, range);
  for (auto& n : map.neurons_) {
    n.in = {rng.uniform(), rng.uniform()};
    n.out = range.clamp(rng.uniform(out_lo, out_hi));
  }
  return map;
}

Neuron& SomMap::mutable_at(GridCoord c) {
  if (frozen_) throw FrozenMapError();
  return neurons_[index(c)];
}

GridCoord SomMap::winner(const SomInput& x) const {
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < neurons_.size(); ++i) {
    const double d0 = neurons_[i].in[0] - x[0];
    const double d1 = neurons_[i].in[1] - x[1];
    const double d2 = d0 * d0 + d1 * d1;
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return {best / cols_, best % cols_};
}

double SomMap::respond(const SomInput& x) const { return at(winner(x)).out; }

double neighborhood(double d, double radius) {
  if (d > radius) return 0.0;
  if (radius <= 0.0) return d == 0.0 ? 1.0 : 0.0;
  return std::exp(-(d * d) / (2.0 * radius * radius));
}

GridCoord SomMap::train_step(const SomInput& x, double target, const LearnParams& lp) {
  if (frozen_) throw FrozenMapError();
  const GridCoord win = winner(x);
  const auto reach = static_cast<long>(std::floor(lp.radius));
  const long r0 = std::max(0L, static_cast<long>(win.row) - reach);
  const long r1 = std::min(static_cast<long>(rows_) - 1, static_cast<long>(win.row) + reach);
  const long c0 = std::max(0L, static_cast<long>(win.col) - reach);
  const long c1 = std::min(static_cast<long>(cols_) - 1, static_cast<long>(win.col) + reach);
  for (long r = r0; r <= r1; ++r) {
    for (long c = c0; c <= c1; ++c) {
      const double d = static_cast<double>(std::max(std::labs(r - static_cast<long>(win.row)),
                                                    std::labs(c - static_cast<long>(win.col))));
      const double h = neighborhood(d, lp.radius);
      if (h <= 0.0) continue;
      Neuron& n = neurons_[static_cast<std::size_t>(r) * cols_ + static_cast<std::size_t>(c)];
      n.in[0] += lp.eta_in * h * (x[0] - n.in[0]);
      n.in[1] += lp.eta_in * h * (x[1] - n.in[1]);
      n.out = range_.clamp(n.out + lp.eta_out * h * (target - n.out));
    }
  }
  return win;
}

std::uint64_t SomMap::checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](double v) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof(double));
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& n : neurons_) {
    mix(n.in[0]);
    mix(n.in[1]);
    mix(n.out);
  }
  return h;
}

namespace {

void put_double(std::ostream& os, double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  os.write(buf, end - buf);
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw MapFormatError("KSOM line " + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <class T>
T parse_num(std::string_view tok, std::size_t line, const char* what) {
  T v{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    fail(line, std::string("bad ") + what + " '" + std::string(tok) + "'");
  return v;
}

} // namespace

void write_map(std::ostream& os, const SomMap& map) {
  os << "KSOM 1 " << map.rows() << ' ' << map.cols() << " 2 1\n";
  for (std::size_t r = 0; r < map.rows(); ++r) {
    for (std::size_t c = 0; c < map.cols(); ++c) {
      const Neuron& n = map.at(r, c);
      os << r << ' ' << c << ' ';
      put_double(os, n.in[0]);
      os << ' ';
      put_double(os, n.in[1]);
      os << ' ';
      put_double(os, n.out);
      os << '\n';
    }
  }
}

void save_map(const SomMap& map, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_map(os, map);
  os.flush();
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

SomMap read_map(std::istream& is, const MapLoadOptions& opts) {
  std::string text;
  std::size_t line_no = 1;
  if (!std::getline(is, text)) fail(line_no, "missing header");
  auto head = split_ws(text);
  if (head.size() != 6 || head[0] != "KSOM") fail(line_no, "expected 'KSOM 1 <rows> <cols> <in_dim> <out_dim>'");
  if (parse_num<int>(head[1], line_no, "version") != 1) fail(line_no, "unsupported version");
  const auto rows = parse_num<std::size_t>(head[2], line_no, "rows");
  const auto cols = parse_num<std::size_t>(head[3], line_no, "cols");
  const auto in_dim = parse_num<std::size_t>(head[4], line_no, "in_dim");
  const auto out_dim = parse_num<std::size_t>(head[5], line_no, "out_dim");
  if (rows != opts.rows || cols != opts.cols) {
    fail(line_no, "dimension mismatch: file is " + std::to_string(rows) + "x" +
                      std::to_string(cols) + ", expected " + std::to_string(opts.rows) + "x" +
                      std::to_string(opts.cols));
  }
  if (in_dim != 2 || out_dim != 1) fail(line_no, "dimension mismatch: only in_dim=2, out_dim=1 supported");

  SomMap map(rows, cols, opts.range);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      ++line_no;
      if (!std::getline(is, text)) fail(line_no, "unexpected end of file");
      auto tok = split_ws(text);
      if (tok.size() != 5) fail(line_no, "expected 5 fields");
      if (parse_num<std::size_t>(tok[0], line_no, "row") != r ||
          parse_num<std::size_t>(tok[1], line_no, "col") != c)
        fail(line_no, "neuron out of row-major order");
      Neuron& n = map.mutable_at({r, c});
      n.in[0] = parse_num<double>(tok[2], line_no, "weight");
      n.in[1] = parse_num<double>(tok[3], line_no, "weight");
      n.out = parse_num<double>(tok[4], line_no, "weight");
      for (double w : n.in) {
        if (!(w >= 0.0 && w <= 1.0)) fail(line_no, "input weight out of range [0,1]");
      }
      if (!(n.out >= opts.range.lo && n.out <= opts.range.hi)) {
        std::ostringstream msg;
        msg << "output weight " << n.out << " out of range [" << opts.range.lo << ", "
            << opts.range.hi << "]";
        fail(line_no, msg.str());
      }
    }
  }
  while (std::getline(is, text)) {
    ++line_no;
    if (!split_ws(text).empty()) fail(line_no, "trailing data after last neuron");
  }
  if (opts.freeze) map.freeze();
  return map;
}

SomMap load_map(const std::filesystem::path& path, const MapLoadOptions& opts) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open map file " + path.string());
  return read_map(is, opts);
}

} // namespace aqmlab
