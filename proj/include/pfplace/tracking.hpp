#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "pfplace/grid.hpp"
#include "pfplace/pfoperator.hpp"
#include "pfplace/sparse.hpp"

namespace pfplace {

enum class TrackingKind { real, binary, volume_weighted };

std::string_view to_string(TrackingKind kind);

// Accumulated exposure Q = I + P + ... + P^m restricted to the grid cells.
// Row i: where a unit release at cell i has been within the horizon; column j:
// which releases a sensor at cell j sees. Binary and volume-weighted kinds are
// derived by threshold() and volume_weight().
class TrackingMatrix {
 public:
  TrackingMatrix(TrackingKind kind, SparseMatrix matrix, std::size_t steps, double dt_markov,
                 double eps_acc = 0.0, std::vector<double> sink_exposure = {},
                 bool sink_column = false);

  TrackingKind kind() const { return kind_; }
  const SparseMatrix& matrix() const { return matrix_; }
  std::size_t rows() const { return matrix_.rows(); }
  std::size_t cols() const { return matrix_.cols(); }
  std::size_t steps() const { return steps_; }
  double dt_markov() const { return dt_markov_; }
  double tau() const { return static_cast<double>(steps_) * dt_markov_; }
  double eps_acc() const { return eps_acc_; }
  // Accumulated sink mass per release row (diagnostic; empty when unknown).
  const std::vector<double>& sink_exposure() const { return sink_exposure_; }
  // True when the last column is the outlet sink rather than a grid cell.
  bool has_sink_column() const { return sink_column_; }

  bool operator==(const TrackingMatrix&) const = default;

 private:
  TrackingKind kind_;
  SparseMatrix matrix_;
  std::size_t steps_;
  double dt_markov_;
  double eps_acc_;
  std::vector<double> sink_exposure_;
  bool sink_column_;
};

struct HorizonSteps {
  std::size_t steps = 0;
  double tau = 0.0;
  bool snapped = false;
};

// m = round(tau / dt_markov); warns when tau is not already a multiple.
HorizonSteps snap_horizon(double tau, double dt_markov);

struct TrackingOptions {
  unsigned threads = 0;
  // Keep the sink as an extra, placeable column.
  bool include_sink_column = false;
};

TrackingMatrix tracking_matrix(const MarkovMatrix& P, std::size_t steps,
                               const TrackingOptions& options = {});

// Q*[i][j] = 1 iff Q[i][j] > eps_acc.
TrackingMatrix threshold(const TrackingMatrix& q, double eps_acc);

// Row-streaming variant of threshold(tracking_matrix(P, m), eps): the real
// valued rows are never stored.
TrackingMatrix tracking_pattern(const MarkovMatrix& P, std::size_t steps, double eps_acc,
                                const TrackingOptions& options = {});

// Zeroes the columns of cells that cannot host a sensor.
TrackingMatrix apply_location_constraint(const TrackingMatrix& q, const CellSet& forbidden);
// Zeroes the rows of release cells that are not monitored.
TrackingMatrix apply_sensing_constraint(const TrackingMatrix& q, const CellSet& unmonitored);

// Scales column j by V_j / V_total. A sink column, when present, gets the mean
// normalised cell volume.
TrackingMatrix volume_weight(const TrackingMatrix& q, const Grid& grid);

void save(const TrackingMatrix& q, const std::filesystem::path& path);
TrackingMatrix load_tracking(const std::filesystem::path& path);

// Row-major bit dump of a binary pattern: "PFBITS1\n", little-endian uint64
// rows and cols, then ceil(rows*cols/8) bytes, bit b of the stream at byte
// b/8, position b%8 (LSB first).
void write_bitset(const TrackingMatrix& q, const std::filesystem::path& path);
// Unpacked: one 0/1 byte per entry, row-major.
std::vector<std::uint8_t> read_bitset(const std::filesystem::path& path, std::size_t& rows,
                                      std::size_t& cols);

}  // namespace pfplace
