#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pfplace/flowfield.hpp"
#include "pfplace/grid.hpp"
#include "pfplace/pipeline.hpp"
#include "pfplace/placement.hpp"

namespace pfplace {

struct Realization {
  std::string id;
  VelocityField field;
  double weight = 1.0;
};

// Divides by the sum. Throws ParameterError on negative or non-finite weights
// or a zero sum.
std::vector<double> normalize_weights(std::span<const double> weights);

struct EnsembleMember {
  std::string id;
  double weight = 0.0;  // normalized
  VelocityField field;  // mapped onto the reference grid
  PipelineProducts products;
};

struct Ensemble {
  Grid ref_grid;
  std::vector<EnsembleMember> members;
  // Union over members: a cell obstructed in any realization cannot host a
  // sensor and is not an admissible release.
  CellSet forbidden;
  CellSet admissible;

  std::vector<double> weights() const;
  std::vector<TrackingMatrix> binary_set() const;
};

// Maps every realization onto ref_grid and runs the placement pipeline on
// each. Errors are re-raised with the realization id attached.
Ensemble build_ensemble(std::span<const Realization> realizations, const Grid& ref_grid,
                        const PipelineParams& params, const PlacementConstraints& constraints);

struct EnsemblePlacement {
  PlacementResult result;
  // E[V] used for each placed sensor (and for the final, all-zero round on an
  // early stop).
  std::vector<std::vector<double>> expectations;
};

// Expectation placement. Each round scores column j of member i by its sum
// over member i's still-uncovered rows, forms E[V]_j = sum_i theta_i * score,
// and places at the largest entry (lowest index on ties). Rows covered by the
// new sensor are removed member by member. With one member this is exactly
// greedy_place over the admissible releases.
EnsemblePlacement ensemble_place(const Ensemble& ensemble, std::size_t p);

// map[c] = sum_i theta_i * [some sensor column s has B_i[c][s] = 1].
std::vector<double> probable_coverage_map(std::span<const std::size_t> sensors,
                                          std::span<const TrackingMatrix> patterns,
                                          std::span<const double> weights);

// sum_i theta_i * (volume-weighted fraction of admissible cells covered in
// member i).
double expected_coverage_fraction(std::span<const std::size_t> sensors,
                                  std::span<const TrackingMatrix> patterns,
                                  std::span<const double> weights, const Grid& grid,
                                  const CellSet& admissible);

// Volume-weighted mean of a coverage map over the admissible cells.
double volume_weighted_mean(std::span<const double> map, const Grid& grid,
                            const CellSet& admissible);

// Map exports. CSV: header "k,i,j,x,y,probability". PGM: binary P5, one pixel
// per cell, value round(255 * p), top image row is j = ny - 1.
std::string coverage_csv(std::span<const double> map, const Grid& grid);
std::string coverage_pgm(std::span<const double> map, const Grid& grid);
std::vector<double> parse_coverage_csv(std::string_view text, const Grid& grid);

// Ensemble manifest: "key = value" lines.
//   ref_grid = <grid config path>
//   diffusivity, dt_markov, eps_acc = <number>
//   tau = <seconds>  or  steps = <count>
//   preset = none | location | sensing-location
//   occupied = i0 j0 i1 j1           (repeatable)
//   sensors = <count>
//   realization = <id> grid=<path> (field=<path> | generator=double-gyre:<A>
//                 | generator=channel:<u_max>) [weight=<theta>]
// Relative paths are resolved against the manifest's directory. Weights
// default to 1 (uniform after normalization).
struct RealizationSpec {
  std::string id;
  std::filesystem::path grid_path;
  std::filesystem::path field_path;  // empty when a generator is used
  std::string generator;             // "double-gyre" or "channel"
  double generator_value = 0.0;
  double weight = 1.0;
  std::size_t line = 0;
};

struct EnsembleManifest {
  std::filesystem::path ref_grid_path;
  double diffusivity = 0.0;
  double dt_markov = 0.0;
  std::optional<double> tau;
  std::optional<std::size_t> steps;
  double eps_acc = 1e-4;
  ConstraintPreset preset = ConstraintPreset::none;
  std::vector<CellRect> occupied;
  std::size_t sensors = 1;
  std::vector<RealizationSpec> realizations;
};

EnsembleManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir);
EnsembleManifest load_manifest(const std::filesystem::path& path);

// Resolved manifest: grids and fields loaded, horizon snapped.
struct LoadedManifest {
  Grid ref_grid;
  std::vector<Realization> realizations;
  PipelineParams params;
  PlacementConstraints constraints;
  std::size_t sensors = 1;
};

LoadedManifest resolve_manifest(const EnsembleManifest& manifest);

}  // namespace pfplace
