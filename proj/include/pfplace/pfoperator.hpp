#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pfplace/flowfield.hpp"
#include "pfplace/sparse.hpp"
#include "pfplace/transport.hpp"

namespace pfplace {

inline constexpr const char* kTransportScheme = "fv-upwind-euler-v1";
inline constexpr double kSparsityFloor = 1e-12;

struct Provenance {
  std::uint64_t grid_hash = 0;
  std::uint64_t field_hash = 0;
  double diffusivity = 0.0;
  std::string scheme = kTransportScheme;

  bool operator==(const Provenance&) const = default;
};

// Row-stochastic transition matrix over the grid cells plus one absorbing
// sink state (the last index) that collects mass leaving through outlets.
// Entry (k, j) is the fraction of a unit mass at cell k found in state j one
// Markov step later.
class MarkovMatrix {
 public:
  // Validates: square, nonnegative, every row sums to 1 within 1e-10, sink
  // row is a unit self-loop. Violations raise IntegrityError.
  MarkovMatrix(SparseMatrix matrix, double dt_markov, Provenance provenance);

  std::size_t n_states() const { return matrix_.rows(); }
  std::size_t cell_count() const { return matrix_.rows() - 1; }
  std::size_t sink() const { return matrix_.rows() - 1; }
  double dt_markov() const { return dt_markov_; }
  const Provenance& provenance() const { return provenance_; }
  const SparseMatrix& matrix() const { return matrix_; }

  bool operator==(const MarkovMatrix&) const = default;

 private:
  SparseMatrix matrix_;
  double dt_markov_;
  Provenance provenance_;
};

struct BuildOptions {
  TransportOptions transport;
  unsigned threads = 0;  // 0: hardware concurrency
  double sparsity_floor = kSparsityFloor;
};

// Drops entries below `floor` and rescales the rest so the row sums to 1.
void sparsify_row(std::vector<SparseEntry>& row, double floor);

// One transport solve per cell over dt_markov from a unit mass at that cell;
// obstructed cells get a unit self-loop. Rows are independent and computed in
// parallel; the result does not depend on the thread count.
MarkovMatrix build(const VelocityField& field, double diffusivity, double dt_markov,
                   const BuildOptions& options = {});

// mu_{i+1} = mu_i P + S_i for `steps` steps. The source is applied after each
// product: constant rates add rate*dt_markov, single_step adds its masses
// after the first product only. `state` must have n_states entries.
DensityVector propagate(const DensityVector& state, const MarkovMatrix& P, std::size_t steps,
                        const SourceTerm& source = {});

// Propagates several states at once with one pass over P per step.
std::vector<DensityVector> propagate_batch(std::span<const DensityVector> states,
                                           const MarkovMatrix& P, std::size_t steps);

// Appends an empty sink entry to a physical density.
DensityVector with_sink(const DensityVector& density);

// Ordered sensor locations (the indicator columns of the output matrix).
class SensorConfig {
 public:
  SensorConfig(std::vector<std::size_t> cells, std::size_t cell_count);

  const std::vector<std::size_t>& cells() const { return cells_; }
  std::size_t size() const { return cells_.size(); }
  std::size_t cell_count() const { return cell_count_; }

 private:
  std::vector<std::size_t> cells_;
  std::size_t cell_count_;
};

// y_s = mu[cell_s].
std::vector<double> observe(const DensityVector& state, const SensorConfig& config);

void save(const MarkovMatrix& P, const std::filesystem::path& path);
// Verifies checksum and Markov invariants; if `expected` is given the stored
// provenance must match it exactly.
MarkovMatrix load(const std::filesystem::path& path,
                  const std::optional<Provenance>& expected = std::nullopt);

}  // namespace pfplace
