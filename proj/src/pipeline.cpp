#include "pfplace/pipeline.hpp"

#include "pfplace/error.hpp"

namespace pfplace {

std::string_view to_string(ConstraintPreset preset) {
  switch (preset) {
    case ConstraintPreset::none: return "none";
    case ConstraintPreset::location: return "location";
    case ConstraintPreset::sensing_location: return "sensing-location";
  }
  return "none";
}

ConstraintPreset parse_constraint_preset(std::string_view text) {
  if (text == "none") return ConstraintPreset::none;
  if (text == "location") return ConstraintPreset::location;
  if (text == "sensing-location") return ConstraintPreset::sensing_location;
  throw ParameterError("unknown constraint preset '" + std::string(text) +
                       "' (expected none, location or sensing-location)");
}

PlacementConstraints make_constraints(ConstraintPreset preset, const CellSet& occupied) {
  const std::size_t n = occupied.cell_count();
  PlacementConstraints c{CellSet({}, n), CellSet({}, n)};
  if (preset != ConstraintPreset::none) c.forbidden = occupied;
  if (preset == ConstraintPreset::sensing_location) c.unmonitored = occupied.complement();
  return c;
}

namespace {

CellSet mask_set(std::span<const std::uint8_t> mask) {
  std::vector<std::size_t> cells;
  for (std::size_t k = 0; k < mask.size(); ++k) {
    if (mask[k]) cells.push_back(k);
  }
  return CellSet(std::move(cells), mask.size());
}

void check_size(const PlacementConstraints& c, std::size_t n) {
  if (c.forbidden.cell_count() != n || c.unmonitored.cell_count() != n) {
    throw DimensionError("constraint sets are sized for " +
                         std::to_string(c.forbidden.cell_count()) + " cells, grid has " +
                         std::to_string(n));
  }
}

}  // namespace

CellSet forbidden_sensors(const PlacementConstraints& constraints,
                          std::span<const std::uint8_t> obstructed) {
  check_size(constraints, obstructed.size());
  return constraints.forbidden.united(mask_set(obstructed));
}

CellSet admissible_releases(const PlacementConstraints& constraints,
                            std::span<const std::uint8_t> obstructed) {
  check_size(constraints, obstructed.size());
  return constraints.unmonitored.united(mask_set(obstructed)).complement();
}

PipelineProducts run_pipeline(const VelocityField& field, const PipelineParams& params,
                              const CellSet& forbidden, const CellSet& admissible) {
  const Grid& grid = field.grid();
  if (forbidden.cell_count() != grid.size() || admissible.cell_count() != grid.size()) {
    throw DimensionError("constraint sets do not match the grid size");
  }
  BuildOptions build_options = params.build;
  build_options.threads = params.threads;
  MarkovMatrix P = build(field, params.diffusivity, params.dt_markov, build_options);
  TrackingOptions tracking_options;
  tracking_options.threads = params.threads;
  TrackingMatrix pattern = tracking_pattern(P, params.steps, params.eps_acc, tracking_options);
  pattern = apply_location_constraint(pattern, forbidden);
  pattern = apply_sensing_constraint(pattern, admissible.complement());
  TrackingMatrix weighted = volume_weight(pattern, grid);
  return {std::move(P), std::move(pattern), std::move(weighted)};
}

PipelineProducts run_pipeline(const VelocityField& field, const PipelineParams& params,
                              const PlacementConstraints& constraints) {
  const auto mask = field.obstruction_mask();
  return run_pipeline(field, params, forbidden_sensors(constraints, mask),
                      admissible_releases(constraints, mask));
}

}  // namespace pfplace
