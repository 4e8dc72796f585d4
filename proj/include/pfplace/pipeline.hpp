#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "pfplace/flowfield.hpp"
#include "pfplace/grid.hpp"
#include "pfplace/pfoperator.hpp"
#include "pfplace/tracking.hpp"

namespace pfplace {

// Named constraint scenarios over an occupied region:
//   none              sensors anywhere, every release monitored
//   location          no sensor inside the occupied region
//   sensing-location  as location, and only releases inside the region count
enum class ConstraintPreset { none, location, sensing_location };

std::string_view to_string(ConstraintPreset preset);
ConstraintPreset parse_constraint_preset(std::string_view text);

struct PlacementConstraints {
  CellSet forbidden;    // cells that cannot host a sensor
  CellSet unmonitored;  // release cells that are not of interest
};

PlacementConstraints make_constraints(ConstraintPreset preset, const CellSet& occupied);

struct PipelineParams {
  double diffusivity = 0.0;
  double dt_markov = 1.0;
  std::size_t steps = 0;
  double eps_acc = 1e-4;
  BuildOptions build;
  unsigned threads = 0;
};

struct PipelineProducts {
  MarkovMatrix P;
  TrackingMatrix binary;    // thresholded, both constraints applied
  TrackingMatrix weighted;  // binary with volume-weighted columns
};

// Effective sensor exclusions and admissible releases for a field: obstructed
// cells can neither host a sensor nor act as a release.
CellSet forbidden_sensors(const PlacementConstraints& constraints,
                          std::span<const std::uint8_t> obstructed);
CellSet admissible_releases(const PlacementConstraints& constraints,
                            std::span<const std::uint8_t> obstructed);

// build -> tracking pattern -> location and sensing constraints -> volume
// weighting, with the exclusion sets already resolved.
PipelineProducts run_pipeline(const VelocityField& field, const PipelineParams& params,
                              const CellSet& forbidden, const CellSet& admissible);

PipelineProducts run_pipeline(const VelocityField& field, const PipelineParams& params,
                              const PlacementConstraints& constraints);

}  // namespace pfplace
