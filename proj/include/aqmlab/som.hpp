#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace aqmlab {

class Rng;

using SomInput = std::array<double, 2>;

struct GridCoord {
  std::size_t row = 0;
  std::size_t col = 0;
  friend bool operator==(const GridCoord&, const GridCoord&) = default;
};

struct Neuron {
  SomInput in{};
  double out = 0.0;
  friend bool operator==(const Neuron&, const Neuron&) = default;
};

/// Learning schedule. Rates and radius decay multiplicatively after every
/// step down to their floors.
struct LearnParams {
  double eta_in = 0.3;
  double eta_out = 0.3;
  double radius = 6.0;
  double decay = 0.999;
  double eta_floor = 0.01;
  double radius_floor = 1.0;
  double explore_sigma = 0.02;

  void validate() const;
  /// The schedule one step later.
  LearnParams decayed() const;
};

/// Range enforced on the scalar output weights.
struct OutputRange {
  double lo = 0.001;
  double hi = 0.5;
  double clamp(double v) const;
};

class FrozenMapError : public std::logic_error {
public:
  FrozenMapError() : std::logic_error("attempt to train a frozen SOM") {}
};

/// Kohonen map over a rows x cols grid with a 2-D input layer and a scalar
/// supervised output per neuron.
class SomMap {
public:
  static constexpr std::size_t kDefaultSide = 25;

  SomMap(std::size_t rows, std::size_t cols, OutputRange range = {});

  /// in_weights ~ U[0,1]^2, out_weights ~ U[out_lo, out_hi].
  static SomMap random(std::size_t rows, std::size_t cols, Rng& rng, double out_lo,
                       double out_hi, OutputRange range = {});

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return neurons_.size(); }
  const OutputRange& range() const { return range_; }

  const Neuron& at(GridCoord c) const { return neurons_[index(c)]; }
  const Neuron& at(std::size_t row, std::size_t col) const { return at({row, col}); }
  /// Direct weight access; throws FrozenMapError on a frozen map.
  Neuron& mutable_at(GridCoord c);
  std::span<const Neuron> neurons() const { return neurons_; }

  bool frozen() const { return frozen_; }
  void freeze() { frozen_ = true; }

  /// Nearest neuron by Euclidean distance, ties to the lowest row-major index.
  GridCoord winner(const SomInput& x) const;
  /// Output weight of the winner.
  double respond(const SomInput& x) const;
  /// One supervised SOM update; returns the winner that was trained.
  GridCoord train_step(const SomInput& x, double target, const LearnParams& lp);

  /// FNV-1a over the raw weight bytes.
  std::uint64_t checksum() const;

  friend bool operator==(const SomMap& a, const SomMap& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.neurons_ == b.neurons_;
  }

private:
  std::size_t index(GridCoord c) const { return c.row * cols_ + c.col; }

  std::size_t rows_;
  std::size_t cols_;
  OutputRange range_;
  std::vector<Neuron> neurons_;
  bool frozen_ = false;
};

/// Gaussian neighbourhood weight for grid distance d (0 outside the radius).
double neighborhood(double d, double radius);

class MapFormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// KSOM text format: a `KSOM 1 <rows> <cols> 2 1` header followed by one
/// `<row> <col> <w_in_1> <w_in_2> <w_out_1>` line per neuron, row-major.
void write_map(std::ostream& os, const SomMap& map);
void save_map(const SomMap& map, const std::filesystem::path& path);

struct MapLoadOptions {
  std::size_t rows = SomMap::kDefaultSide;
  std::size_t cols = SomMap::kDefaultSide;
  OutputRange range{0.0, 1.0};
  bool freeze = true;
};

/// Parses a KSOM stream. Throws MapFormatError with a line number.
SomMap read_map(std::istream& is, const MapLoadOptions& opts = {});
SomMap load_map(const std::filesystem::path& path, const MapLoadOptions& opts = {});

} // namespace aqmlab
