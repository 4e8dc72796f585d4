#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pfplace/grid.hpp"
#include "pfplace/pfoperator.hpp"
#include "pfplace/tracking.hpp"

namespace pfplace {

// Relative degree of observability of release cell k under a sensor set:
// the sum of Q[k][s] over the sensor columns s. Positive iff observable.
double observability(const TrackingMatrix& q, const SensorConfig& config, std::size_t k);

// Release rows taking part in a placement (all cells by default).
struct ReleaseScenario {
  std::vector<std::size_t> rows;

  static ReleaseScenario all(std::size_t n);
  static ReleaseScenario from(const CellSet& cells);
  static ReleaseScenario single(std::size_t a);
};

struct PlacementResult {
  std::vector<std::size_t> sensor_cells;
  // Release rows first covered by each sensor, in placement order.
  std::vector<std::vector<std::size_t>> newly_covered;
  // Column score at the time each sensor was chosen.
  std::vector<double> scores;
  // Volume-weighted fraction of scenario rows covered by the whole set.
  double covered_fraction = 0.0;
  std::vector<std::size_t> uncovered;
  std::size_t requested = 0;
  bool early_stop = false;  // no remaining column had a positive score
};

// Greedy maximum coverage. Each round picks the column with the largest sum
// over the still-uncovered scenario rows (lowest index on ties), then drops
// every row that column covers (entry > 0). `release_volumes` weights rows in
// covered_fraction; empty means uniform.
PlacementResult greedy_place(const TrackingMatrix& q, std::size_t p,
                             const ReleaseScenario& scenario,
                             std::span<const double> release_volumes = {});

inline constexpr double kBruteForceLimit = 1e6;

// Exhaustive maximum coverage over combinations of admissible columns (those
// covering at least one scenario row); the first combination in lexicographic
// order wins ties. Refuses with PlacementError when C(n, p) exceeds 1e6.
PlacementResult brute_force_place(const TrackingMatrix& q, std::size_t p,
                                  const ReleaseScenario& scenario,
                                  std::span<const double> release_volumes = {});

// Volume-weighted fraction of scenario rows covered by `sensors`.
double coverage_fraction(const TrackingMatrix& q, std::span<const std::size_t> sensors,
                         const ReleaseScenario& scenario,
                         std::span<const double> release_volumes = {});

// Plain-text report: sensors with (i, j) and (x, y), new coverage per sensor,
// covered fraction and the uncovered cell list.
std::string placement_report(const PlacementResult& result, const Grid& grid);

}  // namespace pfplace
