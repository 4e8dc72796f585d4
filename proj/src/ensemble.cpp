#include "pfplace/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pfplace/error.hpp"
#include "pfplace/keyvalue.hpp"
#include "pfplace/parallel.hpp"

namespace pfplace {

std::vector<double> normalize_weights(std::span<const double> weights) {
  if (weights.empty()) throw ParameterError("ensemble needs at least one realization");
  double sum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!std::isfinite(weights[i]) || weights[i] < 0.0) {
      throw ParameterError("weight " + std::to_string(i) + " must be finite and >= 0, got " +
                           format_double(weights[i]));
    }
    sum += weights[i];
  }
  if (!(sum > 0.0)) throw ParameterError("weights sum to zero");
  std::vector<double> out(weights.begin(), weights.end());
  for (double& w : out) w /= sum;
  return out;
}

std::vector<double> Ensemble::weights() const {
  std::vector<double> w;
  for (const auto& m : members) w.push_back(m.weight);
  return w;
}

std::vector<TrackingMatrix> Ensemble::binary_set() const {
  std::vector<TrackingMatrix> set;
  for (const auto& m : members) set.push_back(m.products.binary);
  return set;
}

Ensemble build_ensemble(std::span<const Realization> realizations, const Grid& ref_grid,
                        const PipelineParams& params, const PlacementConstraints& constraints) {
  std::vector<double> raw;
  for (const auto& r : realizations) raw.push_back(r.weight);
  const auto weights = normalize_weights(raw);

  std::vector<std::optional<VelocityField>> mapped(realizations.size());
  std::vector<std::uint8_t> any_obstructed(ref_grid.size(), 0);
  for (std::size_t i = 0; i < realizations.size(); ++i) {
    try {
      mapped[i] = map_to_reference(realizations[i].field, ref_grid);
    } catch (const Error& e) {
      rethrow_with_context(e, "realization " + realizations[i].id);
    }
    const auto mask = mapped[i]->obstruction_mask();
    for (std::size_t k = 0; k < mask.size(); ++k) any_obstructed[k] |= mask[k];
  }
  const CellSet forbidden = forbidden_sensors(constraints, any_obstructed);
  const CellSet admissible = admissible_releases(constraints, any_obstructed);

  // Realizations run side by side; the remaining threads go to each build.
  const unsigned total = resolve_threads(params.threads);
  const unsigned outer =
      static_cast<unsigned>(std::min<std::size_t>(total, realizations.size()));
  PipelineParams inner = params;
  inner.threads = std::max(1u, total / std::max(1u, outer));

  std::vector<std::optional<PipelineProducts>> products(realizations.size());
  parallel_for(realizations.size(), outer, [&](std::size_t i) {
    try {
      products[i] = run_pipeline(*mapped[i], inner, forbidden, admissible);
    } catch (const Error& e) {
      rethrow_with_context(e, "realization " + realizations[i].id);
    }
  });

  Ensemble ensemble{ref_grid, {}, forbidden, admissible};
  for (std::size_t i = 0; i < realizations.size(); ++i) {
    ensemble.members.push_back(
        {realizations[i].id, weights[i], std::move(*mapped[i]), std::move(*products[i])});
  }
  return ensemble;
}

EnsemblePlacement ensemble_place(const Ensemble& ensemble, std::size_t p) {
  if (p < 1) throw ParameterError("sensor count must be >= 1");
  if (ensemble.members.empty()) throw ParameterError("ensemble has no members");
  const std::size_t rows = ensemble.members.front().products.weighted.rows();
  const std::size_t cols = ensemble.members.front().products.weighted.cols();
  for (const auto& m : ensemble.members) {
    if (m.products.weighted.rows() != rows || m.products.weighted.cols() != cols) {
      throw DimensionError("realization " + m.id + " is not on the reference dimension");
    }
  }
  const std::size_t n_members = ensemble.members.size();

  std::vector<std::vector<std::uint8_t>> active(n_members,
                                                std::vector<std::uint8_t>(rows, 0));
  for (auto& a : active) {
    for (std::size_t r : ensemble.admissible) a[r] = 1;
  }
  std::vector<std::uint8_t> chosen(cols, 0), ever_covered(rows, 0);
  std::vector<std::vector<double>> scores(n_members, std::vector<double>(cols));

  EnsemblePlacement out;
  out.result.requested = p;
  for (std::size_t round = 0; round < p; ++round) {
    parallel_for(n_members, 0, [&](std::size_t i) {
      const auto& q = ensemble.members[i].products.weighted.matrix();
      auto& s = scores[i];
      std::fill(s.begin(), s.end(), 0.0);
      for (std::size_t r = 0; r < rows; ++r) {
        if (!active[i][r]) continue;
        const auto row = q.row(r);
        for (std::size_t e = 0; e < row.size(); ++e) s[row.cols[e]] += row.values[e];
      }
    });
    std::vector<double> expectation(cols, 0.0);
    for (std::size_t i = 0; i < n_members; ++i) {
      const double w = ensemble.members[i].weight;
      for (std::size_t j = 0; j < cols; ++j) expectation[j] += w * scores[i][j];
    }
    std::size_t best = cols;
    double best_value = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      if (!chosen[j] && expectation[j] > best_value) {
        best = j;
        best_value = expectation[j];
      }
    }
    out.expectations.push_back(std::move(expectation));
    if (best == cols) {
      out.result.early_stop = true;
      break;
    }
    chosen[best] = 1;
    std::vector<std::size_t> fresh;
    for (std::size_t r = 0; r < rows; ++r) {
      bool hit = false;
      for (std::size_t i = 0; i < n_members; ++i) {
        if (active[i][r] && ensemble.members[i].products.weighted.matrix().at(r, best) > 0.0) {
          active[i][r] = 0;
          // Zero-weight members carry no probability of coverage.
          if (ensemble.members[i].weight > 0.0) hit = true;
        }
      }
      if (hit && !ever_covered[r]) {
        ever_covered[r] = 1;
        fresh.push_back(r);
      }
    }
    out.result.sensor_cells.push_back(best);
    out.result.scores.push_back(best_value);
    out.result.newly_covered.push_back(std::move(fresh));
  }
  if (!out.result.sensor_cells.empty()) {
    const auto patterns = ensemble.binary_set();
    const auto weights = ensemble.weights();
    out.result.covered_fraction =
        expected_coverage_fraction(out.result.sensor_cells, patterns, weights,
                                   ensemble.ref_grid, ensemble.admissible);
  }
  for (std::size_t r : ensemble.admissible) {
    if (!ever_covered[r]) out.result.uncovered.push_back(r);
  }
  return out;
}

namespace {

void check_set(std::span<const TrackingMatrix> patterns, std::span<const double> weights) {
  if (patterns.empty()) throw ParameterError("empty realization set");
  if (patterns.size() != weights.size()) {
    throw DimensionError("realization and weight counts differ");
  }
  for (const auto& q : patterns) {
    if (q.rows() != patterns.front().rows() || q.cols() != patterns.front().cols()) {
      throw DimensionError("tracking patterns differ in shape");
    }
  }
}

std::vector<std::uint8_t> covered_rows(const TrackingMatrix& q,
                                       std::span<const std::size_t> sensors) {
  std::vector<std::uint8_t> covered(q.rows(), 0);
  for (std::size_t s : sensors) {
    if (s >= q.cols()) throw IndexError("sensor column " + std::to_string(s) + " out of range");
  }
  for (std::size_t r = 0; r < q.rows(); ++r) {
    for (std::size_t s : sensors) {
      if (q.matrix().at(r, s) > 0.0) {
        covered[r] = 1;
        break;
      }
    }
  }
  return covered;
}

}  // namespace

std::vector<double> probable_coverage_map(std::span<const std::size_t> sensors,
                                          std::span<const TrackingMatrix> patterns,
                                          std::span<const double> weights) {
  check_set(patterns, weights);
  std::vector<double> map(patterns.front().rows(), 0.0);
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    const auto covered = covered_rows(patterns[i], sensors);
    for (std::size_t c = 0; c < map.size(); ++c) {
      if (covered[c]) map[c] += weights[i];
    }
  }
  for (double& v : map) v = std::min(v, 1.0);
  return map;
}

double expected_coverage_fraction(std::span<const std::size_t> sensors,
                                  std::span<const TrackingMatrix> patterns,
                                  std::span<const double> weights, const Grid& grid,
                                  const CellSet& admissible) {
  check_set(patterns, weights);
  if (patterns.front().rows() != grid.size()) {
    throw DimensionError("tracking patterns do not match the grid");
  }
  double total = 0.0;
  for (std::size_t c : admissible) total += grid.volume(c);
  if (!(total > 0.0)) return 0.0;
  double expected = 0.0;
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    const auto covered = covered_rows(patterns[i], sensors);
    double hit = 0.0;
    for (std::size_t c : admissible) {
      if (covered[c]) hit += grid.volume(c);
    }
    expected += weights[i] * (hit / total);
  }
  return expected;
}

double volume_weighted_mean(std::span<const double> map, const Grid& grid,
                            const CellSet& admissible) {
  if (map.size() != grid.size()) throw DimensionError("coverage map does not match the grid");
  double total = 0.0, acc = 0.0;
  for (std::size_t c : admissible) {
    total += grid.volume(c);
    acc += grid.volume(c) * map[c];
  }
  return total > 0.0 ? acc / total : 0.0;
}

std::string coverage_csv(std::span<const double> map, const Grid& grid) {
  if (map.size() != grid.size()) throw DimensionError("coverage map does not match the grid");
  std::ostringstream out;
  out << "k,i,j,x,y,probability\n";
  for (std::size_t k = 0; k < map.size(); ++k) {
    const auto c = grid.coords(k);
    const auto p = grid.center(k);
    out << k << "," << c.i << "," << c.j << "," << format_double(p.x) << ","
        << format_double(p.y) << "," << format_double(map[k]) << "\n";
  }
  return out.str();
}

std::string coverage_pgm(std::span<const double> map, const Grid& grid) {
  if (map.size() != grid.size()) throw DimensionError("coverage map does not match the grid");
  std::string out = "P5\n" + std::to_string(grid.nx()) + " " + std::to_string(grid.ny()) +
                    "\n255\n";
  for (std::size_t row = 0; row < grid.ny(); ++row) {
    const std::size_t j = grid.ny() - 1 - row;
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      const double v = std::clamp(map[grid.index(i, j)], 0.0, 1.0);
      out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * v))));
    }
  }
  return out;
}

std::vector<double> parse_coverage_csv(std::string_view text, const Grid& grid) {
  std::vector<double> map(grid.size(), 0.0);
  std::vector<std::uint8_t> seen(grid.size(), 0);
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (trim(line) != "k,i,j,x,y,probability") {
        throw FormatError("coverage csv line 1: unexpected header");
      }
      continue;
    }
    if (trim(line).empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    std::size_t k = 0;
    double p = 0.0;
    if (fields.size() != 6 || !parse_size(trim(fields[0]), k) ||
        !parse_double(trim(fields[5]), p)) {
      throw FormatError("coverage csv line " + std::to_string(line_no) + ": malformed row");
    }
    if (k >= grid.size() || seen[k]) {
      throw FormatError("coverage csv line " + std::to_string(line_no) + ": bad cell index");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
      throw FormatError("coverage csv line " + std::to_string(line_no) +
                        ": probability outside [0,1]");
    }
    seen[k] = 1;
    map[k] = p;
  }
  for (std::size_t k = 0; k < seen.size(); ++k) {
    if (!seen[k]) throw FormatError("coverage csv: missing cell " + std::to_string(k));
  }
  return map;
}

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
  std::string out;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    if (i) out += "; ";
    out += problems[i];
  }
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

EnsembleManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir) {
  EnsembleManifest m;
  std::vector<std::string> problems;
  bool have_grid = false, have_d = false, have_dt = false;
  auto bad = [&](const KeyValue& kv, const std::string& msg) {
    problems.push_back("line " + std::to_string(kv.line) + ": " + kv.key + ": " + msg);
  };
  auto number = [&](const KeyValue& kv, double& out) {
    const auto tokens = split_ws(kv.value);
    if (tokens.size() != 1 || !parse_double(tokens[0], out)) {
      bad(kv, "expected a number");
      return false;
    }
    return true;
  };

  for (const auto& kv : parse_key_values(text)) {
    const auto tokens = split_ws(kv.value);
    if (kv.key == "ref_grid") {
      if (tokens.size() != 1) {
        bad(kv, "expected a path");
        continue;
      }
      m.ref_grid_path = resolve(base_dir, tokens[0]);
      have_grid = true;
    } else if (kv.key == "diffusivity") {
      have_d = number(kv, m.diffusivity);
    } else if (kv.key == "dt_markov") {
      have_dt = number(kv, m.dt_markov);
    } else if (kv.key == "eps_acc") {
      number(kv, m.eps_acc);
    } else if (kv.key == "tau") {
      double t = 0;
      if (number(kv, t)) m.tau = t;
    } else if (kv.key == "steps") {
      std::size_t s = 0;
      if (tokens.size() != 1 || !parse_size(tokens[0], s)) {
        bad(kv, "expected a non-negative integer");
        continue;
      }
      m.steps = s;
    } else if (kv.key == "sensors") {
      if (tokens.size() != 1 || !parse_size(tokens[0], m.sensors)) {
        bad(kv, "expected a non-negative integer");
      }
    } else if (kv.key == "preset") {
      try {
        m.preset = parse_constraint_preset(kv.value);
      } catch (const Error& e) {
        bad(kv, e.what());
      }
    } else if (kv.key == "occupied") {
      CellRect r;
      if (tokens.size() != 4 || !parse_size(tokens[0], r.i0) || !parse_size(tokens[1], r.j0) ||
          !parse_size(tokens[2], r.i1) || !parse_size(tokens[3], r.j1)) {
        bad(kv, "expected 'i0 j0 i1 j1'");
        continue;
      }
      m.occupied.push_back(r);
    } else if (kv.key == "realization") {
      RealizationSpec spec;
      spec.line = static_cast<std::size_t>(kv.line);
      if (tokens.empty()) {
        bad(kv, "expected '<id> grid=<path> field=<path>|generator=<kind>:<value> [weight=<w>]'");
        continue;
      }
      spec.id = tokens[0];
      bool ok = true;
      for (std::size_t t = 1; t < tokens.size(); ++t) {
        const auto eq = tokens[t].find('=');
        if (eq == std::string::npos) {
          bad(kv, "expected key=value, got '" + tokens[t] + "'");
          ok = false;
          continue;
        }
        const std::string key = tokens[t].substr(0, eq);
        const std::string value = tokens[t].substr(eq + 1);
        if (key == "grid") {
          spec.grid_path = resolve(base_dir, value);
        } else if (key == "field") {
          spec.field_path = resolve(base_dir, value);
        } else if (key == "generator") {
          const auto colon = value.find(':');
          spec.generator = value.substr(0, colon);
          if (colon == std::string::npos ||
              (spec.generator != "double-gyre" && spec.generator != "channel") ||
              !parse_double(value.substr(colon + 1), spec.generator_value)) {
            bad(kv, "generator must be double-gyre:<A> or channel:<u_max>");
            ok = false;
          }
        } else if (key == "weight") {
          if (!parse_double(value, spec.weight)) {
            bad(kv, "weight must be a number");
            ok = false;
          }
        } else {
          bad(kv, "unknown attribute '" + key + "'");
          ok = false;
        }
      }
      if (spec.grid_path.empty()) {
        bad(kv, "realization " + spec.id + " has no grid");
        ok = false;
      }
      if (spec.field_path.empty() == spec.generator.empty()) {
        bad(kv, "realization " + spec.id + " needs exactly one of field= or generator=");
        ok = false;
      }
      for (const auto& other : m.realizations) {
        if (other.id == spec.id) {
          bad(kv, "duplicate realization id '" + spec.id + "'");
          ok = false;
        }
      }
      if (ok) m.realizations.push_back(std::move(spec));
    } else {
      bad(kv, "unknown key");
    }
  }
  if (!have_grid) problems.push_back("missing key: ref_grid");
  if (!have_d) problems.push_back("missing key: diffusivity");
  if (!have_dt) problems.push_back("missing key: dt_markov");
  if (m.tau && m.steps) problems.push_back("give either tau or steps, not both");
  if (!m.tau && !m.steps) problems.push_back("missing key: tau or steps");
  if (m.realizations.empty()) problems.push_back("no realization lines");
  if (have_dt && !(m.dt_markov > 0.0)) problems.push_back("dt_markov must be > 0");
  if (have_d && !(m.diffusivity >= 0.0)) problems.push_back("diffusivity must be >= 0");
  if (!(m.eps_acc >= 0.0)) problems.push_back("eps_acc must be >= 0");
  if (m.sensors < 1) problems.push_back("sensors must be >= 1");
  if (m.tau && !(*m.tau >= 0.0)) problems.push_back("tau must be >= 0");
  if (!problems.empty()) throw FormatError("manifest: " + join_problems(problems));
  return m;
}

EnsembleManifest load_manifest(const std::filesystem::path& path) {
  try {
    return parse_manifest(read_text_file(path), path.parent_path());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

LoadedManifest resolve_manifest(const EnsembleManifest& manifest) {
  Grid ref = load_grid(manifest.ref_grid_path);
  PipelineParams params;
  params.diffusivity = manifest.diffusivity;
  params.dt_markov = manifest.dt_markov;
  params.eps_acc = manifest.eps_acc;
  params.steps = manifest.steps ? *manifest.steps
                                : snap_horizon(*manifest.tau, manifest.dt_markov).steps;

  std::vector<Realization> realizations;
  for (const auto& spec : manifest.realizations) {
    try {
      Grid grid = load_grid(spec.grid_path);
      VelocityField field = !spec.field_path.empty() ? load_field(spec.field_path, grid)
                            : spec.generator == "double-gyre"
                                ? gen_double_gyre(grid, spec.generator_value)
                                : gen_channel_flow(grid, spec.generator_value);
      realizations.push_back({spec.id, std::move(field), spec.weight});
    } catch (const Error& e) {
      rethrow_with_context(e, "realization " + spec.id);
    }
  }
  const CellSet occupied = CellSet::from_rects(ref, manifest.occupied);
  PlacementConstraints constraints = make_constraints(manifest.preset, occupied);
  return {std::move(ref), std::move(realizations), params, std::move(constraints),
          manifest.sensors};
}

}  // namespace pfplace
