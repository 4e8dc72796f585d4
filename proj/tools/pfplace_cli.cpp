// pfplace: command-line front end over the library pipeline.
//
// Every subcommand validates its whole configuration first and reports all
// problems in one error line. Primary outputs go to files or stdout and are
// byte-identical across runs; progress messages go to stderr.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pfplace/ensemble.hpp"
#include "pfplace/error.hpp"
#include "pfplace/keyvalue.hpp"
#include "pfplace/placement.hpp"
#include "pfplace/version.hpp"

namespace fs = std::filesystem;
using namespace pfplace;

namespace {

bool g_quiet = false;

void log(const std::string& message) {
  if (!g_quiet) std::cerr << "pfplace: " << message << "\n";
}

void log_warning(std::string_view message) {
  if (!g_quiet) std::cerr << "pfplace: warning: " << message << "\n";
}

std::string one_line(std::string text) {
  for (char& c : text) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return text;
}

// Collects every configuration problem before anything runs.
class Violations {
 public:
  void require(bool ok, const std::string& message) {
    if (!ok) items_.push_back(message);
  }
  void existing_file(const std::string& path, const std::string& flag) {
    if (path.empty()) return;
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) items_.push_back(flag + ": no such file '" + path + "'");
  }
  void raise_if_any(const std::string& command) const {
    if (items_.empty()) return;
    std::string msg = "invalid " + command + " configuration: ";
    for (std::size_t i = 0; i < items_.size(); ++i) {
      if (i) msg += "; ";
      msg += items_[i];
    }
    throw ParameterError(msg);
  }

 private:
  std::vector<std::string> items_;
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
  if (!out) throw FormatError("failed writing " + path.string());
}

void emit(const std::string& report, const std::string& path) {
  if (path.empty()) {
    std::cout << report;
    std::cout.flush();
  } else {
    write_text(path, report);
    log("wrote " + path);
  }
}

std::vector<CellRect> parse_rects(const std::vector<std::string>& specs, Violations& v) {
  std::vector<CellRect> rects;
  for (const auto& s : specs) {
    const auto parts = split_ws(s);
    std::size_t c[4];
    bool ok = parts.size() == 4;
    for (std::size_t t = 0; ok && t < 4; ++t) ok = parse_size(parts[t], c[t]);
    v.require(ok && c[0] <= c[2] && c[1] <= c[3],
              "--occupied '" + s + "' is not 'i0 j0 i1 j1' with i0<=i1, j0<=j1");
    if (ok) rects.push_back({c[0], c[1], c[2], c[3]});
  }
  return rects;
}

ConstraintPreset preset_or_violation(const std::string& text, Violations& v) {
  try {
    return parse_constraint_preset(text);
  } catch (const Error& e) {
    v.require(false, std::string("--preset: ") + e.what());
    return ConstraintPreset::none;
  }
}

// ---------------------------------------------------------------- gen-flow

struct GenFlowConfig {
  std::string grid, kind = "double-gyre", input, ref_grid, out;
  double amplitude = 0.05, u_max = 0.2;
  std::uint64_t seed = 1;
};

VelocityField noise_field(const Grid& grid, double amplitude, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  auto uniform = [&] { return static_cast<double>(engine() >> 11) * 0x1.0p-53; };
  std::vector<double> u(grid.size()), v(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    u[k] = amplitude * (2.0 * uniform() - 1.0);
    v[k] = amplitude * (2.0 * uniform() - 1.0);
  }
  return VelocityField(grid, std::move(u), std::move(v));
}

void cmd_gen_flow(const GenFlowConfig& c) {
  Violations v;
  v.require(!c.grid.empty(), "--grid is required");
  v.require(!c.out.empty(), "--out is required");
  v.existing_file(c.grid, "--grid");
  v.existing_file(c.input, "--input");
  v.existing_file(c.ref_grid, "--ref-grid");
  v.require(c.kind == "double-gyre" || c.kind == "channel" || c.kind == "noise" ||
                c.kind == "file",
            "--kind must be double-gyre, channel, noise or file");
  v.require(c.kind != "file" || !c.input.empty(), "--kind file needs --input");
  v.require(c.kind == "file" || c.input.empty(), "--input is only used with --kind file");
  v.require(c.amplitude >= 0.0, "--amplitude must be >= 0");
  v.require(c.u_max >= 0.0, "--u-max must be >= 0");
  v.raise_if_any("gen-flow");

  const Grid grid = load_grid(c.grid);
  VelocityField field = c.kind == "double-gyre" ? gen_double_gyre(grid, c.amplitude)
                        : c.kind == "channel"   ? gen_channel_flow(grid, c.u_max)
                        : c.kind == "noise"     ? noise_field(grid, c.amplitude, c.seed)
                                                : load_field(c.input, grid);
  if (field.zeroed_count() > 0) {
    log(std::to_string(field.zeroed_count()) + " obstructed cells had nonzero velocity, zeroed");
  }
  if (!c.ref_grid.empty()) {
    field = map_to_reference(field, load_grid(c.ref_grid));
    log("mapped onto reference grid " + c.ref_grid);
  }
  write_field(field, c.out);
  log("wrote " + c.out + " (" + std::to_string(field.size()) + " cells, max speed " +
      format_double(field.max_speed()) + ")");
}

// ---------------------------------------------------------------- build-pf

struct BuildConfig {
  std::string grid, field, out;
  double diffusivity = -1.0, dt_markov = -1.0, sparsity_floor = kSparsityFloor, cfl_safety = 0.5;
  unsigned threads = 0;
};

void cmd_build_pf(const BuildConfig& c) {
  Violations v;
  v.require(!c.grid.empty(), "--grid is required");
  v.require(!c.field.empty(), "--field is required");
  v.require(!c.out.empty(), "--out is required");
  v.existing_file(c.grid, "--grid");
  v.existing_file(c.field, "--field");
  v.require(c.diffusivity >= 0.0, "--diffusivity must be given and >= 0");
  v.require(c.dt_markov > 0.0, "--dt-markov must be given and > 0");
  v.require(c.sparsity_floor >= 0.0 && c.sparsity_floor < 1.0, "--sparsity-floor must be in [0, 1)");
  v.require(c.cfl_safety > 0.0 && c.cfl_safety <= 1.0, "--cfl-safety must be in (0, 1]");
  v.raise_if_any("build-pf");

  const Grid grid = load_grid(c.grid);
  const VelocityField field = load_field(c.field, grid);
  BuildOptions opts;
  opts.threads = c.threads;
  opts.sparsity_floor = c.sparsity_floor;
  opts.transport.cfl_safety = c.cfl_safety;
  log("building " + std::to_string(grid.size() + 1) + "-state operator, cfl dt " +
      format_double(cfl_dt(field, c.diffusivity, opts.transport)));
  const MarkovMatrix P = build(field, c.diffusivity, c.dt_markov, opts);
  save(P, c.out);
  log("wrote " + c.out + " (" + std::to_string(P.matrix().nnz()) + " nonzeros)");
}

// --------------------------------------------------------------- propagate

struct PropagateConfig {
  std::string op, initial, out, report, schedule = "constant";
  std::optional<std::size_t> delta, source_cell;
  double mass = 1.0, source_rate = 0.0;
  std::optional<std::size_t> steps;
  std::vector<std::size_t> sensors;
};

void cmd_propagate(const PropagateConfig& c) {
  Violations v;
  v.require(!c.op.empty(), "--operator is required");
  v.existing_file(c.op, "--operator");
  v.existing_file(c.initial, "--initial");
  v.require(c.initial.empty() != !c.delta.has_value(), "give exactly one of --initial, --delta");
  v.require(c.steps.has_value(), "--steps is required");
  v.require(c.schedule == "constant" || c.schedule == "single-step",
            "--source-schedule must be constant or single-step");
  v.require(c.source_rate == 0.0 || c.source_cell.has_value(), "--source-rate needs --source-cell");
  v.raise_if_any("propagate");

  const MarkovMatrix P = load(c.op);
  const std::size_t n = P.cell_count();
  DensityVector state;
  if (c.delta) {
    if (*c.delta >= n) {
      throw IndexError("--delta cell " + std::to_string(*c.delta) + " >= " + std::to_string(n));
    }
    state = with_sink(DensityVector::delta(n, *c.delta, c.mass));
  } else {
    state = load_density(c.initial);
    if (state.size() == n) state = with_sink(state);
  }
  SourceTerm source;
  if (c.source_cell) {
    source.cell_rates.push_back({*c.source_cell, c.source_rate});
    source.schedule =
        c.schedule == "constant" ? SourceSchedule::constant : SourceSchedule::single_step;
  }
  const SensorConfig sensors(c.sensors, n);
  const DensityVector out = propagate(state, P, *c.steps, source);
  if (!c.out.empty()) {
    write_density(out, c.out);
    log("wrote " + c.out);
  }
  double interior = 0.0;
  for (std::size_t k = 0; k < n; ++k) interior += out[k];
  std::ostringstream r;
  r << "pfplace propagate v1\n";
  r << "steps " << *c.steps << "\n";
  r << "time " << format_double(static_cast<double>(*c.steps) * P.dt_markov()) << "\n";
  r << "initial_mass " << format_double(state.total()) << "\n";
  r << "interior_mass " << format_double(interior) << "\n";
  r << "sink_mass " << format_double(out[P.sink()]) << "\n";
  const auto y = observe(out, sensors);
  for (std::size_t s = 0; s < y.size(); ++s) {
    r << "sensor " << (s + 1) << " cell " << sensors.cells()[s] << " value " << format_double(y[s])
      << "\n";
  }
  emit(r.str(), c.report);
}

// ------------------------------------------------------------------- track

struct TrackConfig {
  std::string grid, field, op, out, bitset, kind = "weighted", preset = "none";
  std::optional<double> tau;
  std::optional<std::size_t> steps;
  double eps_acc = 1e-4;
  std::vector<std::string> occupied;
  unsigned threads = 0;
};

void cmd_track(const TrackConfig& c) {
  Violations v;
  v.require(!c.grid.empty(), "--grid is required");
  v.require(!c.field.empty(), "--field is required");
  v.require(!c.op.empty(), "--operator is required");
  v.require(!c.out.empty(), "--out is required");
  v.existing_file(c.grid, "--grid");
  v.existing_file(c.field, "--field");
  v.existing_file(c.op, "--operator");
  v.require(c.tau.has_value() != c.steps.has_value(), "give exactly one of --tau, --steps");
  v.require(!c.tau || *c.tau >= 0.0, "--tau must be >= 0");
  v.require(c.eps_acc >= 0.0, "--eps-acc must be >= 0");
  v.require(c.kind == "real" || c.kind == "binary" || c.kind == "weighted",
            "--kind must be real, binary or weighted");
  v.require(c.bitset.empty() || c.kind != "real", "--bitset needs a binary or weighted kind");
  const auto preset = preset_or_violation(c.preset, v);
  const auto rects = parse_rects(c.occupied, v);
  v.require(preset == ConstraintPreset::none || !rects.empty(),
            "--preset " + c.preset + " needs at least one --occupied rectangle");
  v.raise_if_any("track");

  const Grid grid = load_grid(c.grid);
  const VelocityField field = load_field(c.field, grid);
  const MarkovMatrix P = load(c.op);
  if (P.provenance().grid_hash != grid.hash() || P.provenance().field_hash != field.hash()) {
    throw IntegrityError("operator " + c.op + " was not built from this grid and field");
  }
  const std::size_t m = c.steps ? *c.steps : snap_horizon(*c.tau, P.dt_markov()).steps;
  TrackingOptions opts;
  opts.threads = c.threads;
  TrackingMatrix q = c.kind == "real" ? tracking_matrix(P, m, opts)
                                      : tracking_pattern(P, m, c.eps_acc, opts);
  if (c.kind != "real") {
    const auto constraints = make_constraints(preset, CellSet::from_rects(grid, rects));
    const auto mask = field.obstruction_mask();
    q = apply_location_constraint(q, forbidden_sensors(constraints, mask));
    q = apply_sensing_constraint(q, admissible_releases(constraints, mask).complement());
    if (!c.bitset.empty()) {
      write_bitset(q, c.bitset);
      log("wrote " + c.bitset);
    }
    if (c.kind == "weighted") q = volume_weight(q, grid);
  }
  save(q, c.out);
  log("wrote " + c.out + " (" + std::string(to_string(q.kind())) + ", m " + std::to_string(m) +
      ", tau " + format_double(q.tau()) + ", " + std::to_string(q.matrix().nnz()) + " nonzeros)");
}

// ------------------------------------------------------------------- place

struct PlaceConfig {
  std::string tracking, grid, field, report, method = "greedy", preset = "none";
  std::vector<std::string> occupied;
  std::size_t sensors = 0;
};

void cmd_place(const PlaceConfig& c) {
  Violations v;
  v.require(!c.tracking.empty(), "--tracking is required");
  v.require(!c.grid.empty(), "--grid is required");
  v.existing_file(c.tracking, "--tracking");
  v.existing_file(c.grid, "--grid");
  v.existing_file(c.field, "--field");
  v.require(c.sensors >= 1, "--sensors must be >= 1");
  v.require(c.method == "greedy" || c.method == "brute-force",
            "--method must be greedy or brute-force");
  const auto preset = preset_or_violation(c.preset, v);
  const auto rects = parse_rects(c.occupied, v);
  v.require(preset == ConstraintPreset::none || !rects.empty(),
            "--preset " + c.preset + " needs at least one --occupied rectangle");
  v.raise_if_any("place");

  const Grid grid = load_grid(c.grid);
  const TrackingMatrix q = load_tracking(c.tracking);
  if (q.rows() != grid.size()) {
    throw DimensionError("tracking matrix has " + std::to_string(q.rows()) + " rows, grid has " +
                         std::to_string(grid.size()) + " cells");
  }
  std::vector<std::uint8_t> mask(grid.obstruction_mask().begin(), grid.obstruction_mask().end());
  if (!c.field.empty()) {
    const auto f = load_field(c.field, grid);
    mask.assign(f.obstruction_mask().begin(), f.obstruction_mask().end());
  }
  const auto constraints = make_constraints(preset, CellSet::from_rects(grid, rects));
  const auto scenario = ReleaseScenario::from(admissible_releases(constraints, mask));
  const auto result = c.method == "greedy"
                          ? greedy_place(q, c.sensors, scenario, grid.volumes())
                          : brute_force_place(q, c.sensors, scenario, grid.volumes());
  log(c.method + " placed " + std::to_string(result.sensor_cells.size()) + " of " +
      std::to_string(c.sensors) + " sensors");
  emit(placement_report(result, grid), c.report);
}

// ---------------------------------------------------------- place-ensemble

struct EnsembleConfig {
  std::string manifest, out_dir;
  std::optional<std::size_t> sensors;
  unsigned threads = 0;
};

LoadedManifest load_resolved(const std::string& path, unsigned threads) {
  auto loaded = resolve_manifest(load_manifest(path));
  loaded.params.threads = threads;
  return loaded;
}

void cmd_place_ensemble(const EnsembleConfig& c) {
  Violations v;
  v.require(!c.manifest.empty(), "--manifest is required");
  v.require(!c.out_dir.empty(), "--out-dir is required");
  v.existing_file(c.manifest, "--manifest");
  v.require(!c.sensors || *c.sensors >= 1, "--sensors must be >= 1");
  v.raise_if_any("place-ensemble");

  const auto loaded = load_resolved(c.manifest, c.threads);
  const std::size_t p = c.sensors.value_or(loaded.sensors);
  log("building " + std::to_string(loaded.realizations.size()) + " realizations, tau " +
      format_double(static_cast<double>(loaded.params.steps) * loaded.params.dt_markov));
  const Ensemble e =
      build_ensemble(loaded.realizations, loaded.ref_grid, loaded.params, loaded.constraints);
  const auto placed = ensemble_place(e, p);
  const auto map = probable_coverage_map(placed.result.sensor_cells, e.binary_set(), e.weights());

  std::ostringstream r;
  r << placement_report(placed.result, e.ref_grid);
  for (const auto& m : e.members) {
    r << "realization " << m.id << " weight " << format_double(m.weight) << "\n";
  }
  r << "expected_coverage " << format_double(placed.result.covered_fraction) << "\n";
  const fs::path dir(c.out_dir);
  write_text(dir / "placement.txt", r.str());
  write_text(dir / "coverage.csv", coverage_csv(map, e.ref_grid));
  write_text(dir / "coverage.pgm", coverage_pgm(map, e.ref_grid));
  log("wrote placement.txt, coverage.csv, coverage.pgm to " + c.out_dir);
  std::cout << r.str();
}

// -------------------------------------------------------------- export-map

struct ExportConfig {
  std::string manifest, from_csv, grid, csv, pgm;
  std::vector<std::size_t> sensors;
  unsigned threads = 0;
};

void cmd_export_map(const ExportConfig& c) {
  Violations v;
  v.existing_file(c.manifest, "--manifest");
  v.existing_file(c.from_csv, "--from-csv");
  v.existing_file(c.grid, "--grid");
  v.require(c.manifest.empty() != c.from_csv.empty(), "give exactly one of --manifest, --from-csv");
  v.require(c.manifest.empty() || !c.sensors.empty(), "--manifest needs at least one --sensor");
  v.require(c.from_csv.empty() || !c.grid.empty(), "--from-csv needs --grid");
  v.require(!c.csv.empty() || !c.pgm.empty(), "give --csv and/or --pgm");
  v.raise_if_any("export-map");

  std::vector<double> map;
  std::optional<Grid> grid;
  if (!c.manifest.empty()) {
    const auto loaded = load_resolved(c.manifest, c.threads);
    const Ensemble e =
        build_ensemble(loaded.realizations, loaded.ref_grid, loaded.params, loaded.constraints);
    for (std::size_t s : c.sensors) {
      if (s >= e.ref_grid.size()) {
        throw IndexError("--sensor " + std::to_string(s) + " >= " +
                         std::to_string(e.ref_grid.size()));
      }
    }
    map = probable_coverage_map(c.sensors, e.binary_set(), e.weights());
    std::cout << "expected_coverage "
              << format_double(expected_coverage_fraction(c.sensors, e.binary_set(), e.weights(),
                                                          e.ref_grid, e.admissible))
              << "\n";
    grid = e.ref_grid;
  } else {
    grid = load_grid(c.grid);
    map = parse_coverage_csv(read_text_file(c.from_csv), *grid);
  }
  if (!c.csv.empty()) write_text(c.csv, coverage_csv(map, *grid));
  if (!c.pgm.empty()) write_text(c.pgm, coverage_pgm(map, *grid));
  log("exported " + std::to_string(map.size()) + "-cell map");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pfplace: Markov-operator contaminant tracking and sensor placement"};
  app.set_version_flag("--version", std::string(kVersion));
  app.set_config("--config", "", "TOML/INI file with option values; flags override it");
  app.add_flag("-q,--quiet", g_quiet, "Suppress progress messages on stderr");
  app.require_subcommand(1);

  GenFlowConfig gen;
  auto* s = app.add_subcommand("gen-flow", "Generate or ingest a velocity field");
  s->add_option("--grid", gen.grid, "Grid config");
  s->add_option("--kind", gen.kind, "double-gyre, channel, noise or file")->capture_default_str();
  s->add_option("--amplitude", gen.amplitude, "Gyre amplitude or noise scale [m/s]")
      ->capture_default_str();
  s->add_option("--u-max", gen.u_max, "Channel centreline speed [m/s]")->capture_default_str();
  s->add_option("--seed", gen.seed, "Seed for --kind noise")->capture_default_str();
  s->add_option("--input", gen.input, "Existing field file (--kind file)");
  s->add_option("--ref-grid", gen.ref_grid, "Map the field onto this grid");
  s->add_option("--out", gen.out, "Output field file");
  s->callback([&] { cmd_gen_flow(gen); });

  BuildConfig bld;
  s = app.add_subcommand("build-pf", "Build the Markov transition operator");
  s->add_option("--grid", bld.grid, "Grid config");
  s->add_option("--field", bld.field, "Velocity field file");
  s->add_option("--diffusivity", bld.diffusivity, "Diffusivity D [m^2/s]");
  s->add_option("--dt-markov", bld.dt_markov, "Markov step [s]");
  s->add_option("--sparsity-floor", bld.sparsity_floor, "Entries below this are dropped")
      ->capture_default_str();
  s->add_option("--cfl-safety", bld.cfl_safety, "CFL safety factor")->capture_default_str();
  s->add_option("--threads", bld.threads, "Worker threads (0: all cores)");
  s->add_option("--out", bld.out, "Output operator file");
  s->callback([&] { cmd_build_pf(bld); });

  PropagateConfig prop;
  s = app.add_subcommand("propagate", "Propagate a density through the operator");
  s->add_option("--operator", prop.op, "Operator file");
  s->add_option("--initial", prop.initial, "Initial density file");
  s->add_option("--delta", prop.delta, "Start from a point mass at this cell");
  s->add_option("--mass", prop.mass, "Mass of the --delta release")->capture_default_str();
  s->add_option("--steps", prop.steps, "Markov steps");
  s->add_option("--source-cell", prop.source_cell, "Cell of a release source");
  s->add_option("--source-rate", prop.source_rate, "Source rate [mass/s] or mass (single-step)");
  s->add_option("--source-schedule", prop.schedule, "constant or single-step")
      ->capture_default_str();
  s->add_option("--sensor", prop.sensors, "Sensor cell to report (repeatable)");
  s->add_option("--out", prop.out, "Output density file (with sink entry)");
  s->add_option("--report", prop.report, "Report file (default stdout)");
  s->callback([&] { cmd_propagate(prop); });

  TrackConfig trk;
  s = app.add_subcommand("track", "Compute a contaminant tracking matrix");
  s->add_option("--grid", trk.grid, "Grid config");
  s->add_option("--field", trk.field, "Field the operator was built from");
  s->add_option("--operator", trk.op, "Operator file");
  s->add_option("--tau", trk.tau, "Sensing horizon [s], snapped to Markov steps");
  s->add_option("--steps", trk.steps, "Sensing horizon in Markov steps");
  s->add_option("--eps-acc", trk.eps_acc, "Detection threshold")->capture_default_str();
  s->add_option("--kind", trk.kind, "real, binary or weighted")->capture_default_str();
  s->add_option("--preset", trk.preset, "none, location or sensing-location")
      ->capture_default_str();
  s->add_option("--occupied", trk.occupied, "Occupied rectangle 'i0 j0 i1 j1' (repeatable)");
  s->add_option("--bitset", trk.bitset, "Also dump the constrained binary pattern");
  s->add_option("--threads", trk.threads, "Worker threads (0: all cores)");
  s->add_option("--out", trk.out, "Output tracking file");
  s->callback([&] { cmd_track(trk); });

  PlaceConfig plc;
  s = app.add_subcommand("place", "Place sensors on one tracking matrix");
  s->add_option("--tracking", plc.tracking, "Tracking file");
  s->add_option("--grid", plc.grid, "Grid config");
  s->add_option("--field", plc.field, "Field whose obstructions exclude releases");
  s->add_option("--sensors", plc.sensors, "Number of sensors");
  s->add_option("--method", plc.method, "greedy or brute-force")->capture_default_str();
  s->add_option("--preset", plc.preset, "none, location or sensing-location")
      ->capture_default_str();
  s->add_option("--occupied", plc.occupied, "Occupied rectangle 'i0 j0 i1 j1' (repeatable)");
  s->add_option("--report", plc.report, "Report file (default stdout)");
  s->callback([&] { cmd_place(plc); });

  EnsembleConfig ens;
  s = app.add_subcommand("place-ensemble", "Place sensors over a weighted ensemble");
  s->add_option("--manifest", ens.manifest, "Ensemble manifest");
  s->add_option("--sensors", ens.sensors, "Number of sensors (overrides the manifest)");
  s->add_option("--threads", ens.threads, "Worker threads (0: all cores)");
  s->add_option("--out-dir", ens.out_dir, "Directory for placement.txt and maps");
  s->callback([&] { cmd_place_ensemble(ens); });

  ExportConfig exp;
  s = app.add_subcommand("export-map", "Write a probable coverage map as CSV and/or PGM");
  s->add_option("--manifest", exp.manifest, "Ensemble manifest");
  s->add_option("--sensor", exp.sensors, "Sensor cell (repeatable)");
  s->add_option("--from-csv", exp.from_csv, "Existing coverage CSV to convert");
  s->add_option("--grid", exp.grid, "Grid of --from-csv");
  s->add_option("--threads", exp.threads, "Worker threads (0: all cores)");
  s->add_option("--csv", exp.csv, "Output CSV");
  s->add_option("--pgm", exp.pgm, "Output PGM");
  s->callback([&] { cmd_export_map(exp); });

  set_warning_handler(log_warning);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: kind=usage message=" << one_line(e.what()) << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: kind=" << to_string(e.kind()) << " message=" << one_line(e.what()) << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: kind=io message=" << one_line(e.what()) << "\n";
    return 1;
  }
  return 0;
}
