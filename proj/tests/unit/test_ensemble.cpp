#include "doctest.h"

#include <algorithm>
#include <fstream>

#include "desk.hpp"
#include "oracles.hpp"
#include "pfplace/ensemble.hpp"
#include "pfplace/error.hpp"

using namespace pfplace;

namespace {

const Ensemble& desk_ensemble() {
  static const Ensemble e = [] {
    const auto r = desk::realizations();
    const Grid ref = desk::reference_grid();
    return build_ensemble(r, ref, desk::params(), make_constraints(ConstraintPreset::none,
                                                                   desk::occupied(ref)));
  }();
  return e;
}

TrackingMatrix pattern(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& ones) {
  std::vector<double> d(n * n, 0.0);
  for (auto [i, j] : ones) d[i * n + j] = 1.0;
  return TrackingMatrix(TrackingKind::binary, SparseMatrix::from_dense(n, n, d), 1, 1.0);
}

// Deterministic composition for one field.
PlacementResult deterministic(const VelocityField& field, const PlacementConstraints& c,
                              std::size_t p) {
  const auto prod = run_pipeline(field, desk::params(), c);
  const auto adm = admissible_releases(c, field.obstruction_mask());
  return greedy_place(prod.weighted, p, ReleaseScenario::from(adm), field.grid().volumes());
}

void check_same(const PlacementResult& a, const PlacementResult& b) {
  CHECK(a.sensor_cells == b.sensor_cells);
  CHECK(a.scores == b.scores);
  CHECK(a.newly_covered == b.newly_covered);
  CHECK(a.covered_fraction == b.covered_fraction);
  CHECK(a.uncovered == b.uncovered);
  CHECK(a.early_stop == b.early_stop);
}

}  // namespace

TEST_CASE("weights normalise") {
  CHECK(normalize_weights(std::vector<double>{1, 3}) == std::vector<double>{0.25, 0.75});
  CHECK_THROWS_AS(normalize_weights(std::vector<double>{0, 0}), ParameterError);
  CHECK_THROWS_AS(normalize_weights(std::vector<double>{1, -1}), ParameterError);
  CHECK_THROWS_AS(normalize_weights(std::vector<double>{}), ParameterError);
}

TEST_CASE("constraint presets") {
  const CellSet occ({1, 2}, 5);
  const auto none = make_constraints(ConstraintPreset::none, occ);
  CHECK(none.forbidden.empty());
  CHECK(none.unmonitored.empty());
  const auto loc = make_constraints(ConstraintPreset::location, occ);
  CHECK(loc.forbidden == occ);
  CHECK(loc.unmonitored.empty());
  const auto both = make_constraints(ConstraintPreset::sensing_location, occ);
  CHECK(both.forbidden == occ);
  CHECK(both.unmonitored == occ.complement());
  CHECK(parse_constraint_preset("sensing-location") == ConstraintPreset::sensing_location);
  CHECK_THROWS_AS(parse_constraint_preset("everything"), ParameterError);
}

TEST_CASE("a singleton ensemble reproduces the deterministic pipeline") {
  const Grid ref = desk::reference_grid();
  for (auto preset : {ConstraintPreset::none, ConstraintPreset::location,
                      ConstraintPreset::sensing_location}) {
    const auto c = make_constraints(preset, desk::occupied(ref));
    const std::vector<Realization> one{desk::realization(2)};
    const auto e = build_ensemble(one, ref, desk::params(), c);
    const auto mapped = map_to_reference(one[0].field, ref);
    const auto det = run_pipeline(mapped, desk::params(), c);
    CHECK(e.members[0].products.weighted == det.weighted);
    CHECK(e.members[0].products.P == det.P);
    check_same(ensemble_place(e, 3).result, deterministic(mapped, c, 3));
  }
}

TEST_CASE("identical realizations give identical matrices and a binary map") {
  const Grid ref = desk::reference_grid();
  const auto c = make_constraints(ConstraintPreset::location, desk::occupied(ref));
  std::vector<Realization> same(4, desk::realization(1, 0.25));
  for (std::size_t i = 0; i < 4; ++i) same[i].id = "copy" + std::to_string(i);
  const auto e = build_ensemble(same, ref, desk::params(), c);
  for (const auto& m : e.members) CHECK(m.products.weighted == e.members[0].products.weighted);
  const auto placed = ensemble_place(e, 3);
  check_same(placed.result, deterministic(map_to_reference(same[0].field, ref), c, 3));
  const auto map = probable_coverage_map(placed.result.sensor_cells, e.binary_set(), e.weights());
  for (double v : map) CHECK((v == 0.0 || v == 1.0));
}

TEST_CASE("degenerate weights reproduce the single realization") {
  const Grid ref = desk::reference_grid();
  const auto c = make_constraints(ConstraintPreset::none, desk::occupied(ref));
  const std::vector<Realization> two{desk::realization(0, 1.0), desk::realization(3, 0.0)};
  const auto e = build_ensemble(two, ref, desk::params(), c);
  // Admissibility still takes both footprints into account.
  const auto single = build_ensemble(std::vector<Realization>{two[0]}, ref, desk::params(),
                                     PlacementConstraints{e.forbidden,
                                                          e.admissible.complement()});
  check_same(ensemble_place(e, 3).result, ensemble_place(single, 3).result);
  const auto sensors = ensemble_place(e, 3).result.sensor_cells;
  const auto map = probable_coverage_map(sensors, e.binary_set(), e.weights());
  const auto own = probable_coverage_map(sensors, single.binary_set(), single.weights());
  CHECK(map == own);
}

TEST_CASE("desk ensemble operators keep obstruction rows as self-loops") {
  const auto& e = desk_ensemble();
  REQUIRE(e.members.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& m = e.members[i];
    const auto& P = m.products.P.matrix();
    std::size_t blocked = 0;
    for (std::size_t k = 0; k < e.ref_grid.size(); ++k) {
      if (!m.field.obstructed(k)) continue;
      ++blocked;
      REQUIRE(P.row(k).size() == 1);
      CHECK(P.row(k).cols[0] == k);
      CHECK(P.row(k).values[0] == 1.0);
    }
    CHECK(blocked == 6);
    CHECK(m.weight == 0.25);
  }
  CHECK(e.forbidden.size() == 24);
  CHECK(e.admissible.size() == 256 - 24);
}

TEST_CASE("desk ensemble placement follows a dense expectation oracle") {
  const auto& e = desk_ensemble();
  const auto placed = ensemble_place(e, 2);
  REQUIRE(placed.result.sensor_cells.size() == 2);
  const std::size_t n = e.ref_grid.size();
  // Dense recomputation of E[V] for the first sensor.
  std::vector<double> expect(n, 0.0);
  for (const auto& m : e.members) {
    const auto d = m.products.weighted.matrix().to_dense();
    std::vector<double> col(n, 0.0);
    for (std::size_t r : e.admissible) {
      for (std::size_t j = 0; j < n; ++j) col[j] += d[r * n + j];
    }
    for (std::size_t j = 0; j < n; ++j) expect[j] += 0.25 * col[j];
  }
  const auto best = static_cast<std::size_t>(
      std::max_element(expect.begin(), expect.end()) - expect.begin());
  CHECK(placed.result.sensor_cells[0] == best);
  for (std::size_t j = 0; j < n; ++j) {
    CHECK(placed.expectations[0][j] == doctest::Approx(expect[j]).epsilon(1e-12));
  }
  for (std::size_t s : placed.result.sensor_cells) CHECK_FALSE(e.forbidden.contains(s));
}

TEST_CASE("probable coverage map arithmetic") {
  // Cell 0 covered in realizations 0 and 2 only.
  std::vector<TrackingMatrix> set{pattern(3, {{0, 1}, {1, 1}}), pattern(3, {{1, 1}}),
                                  pattern(3, {{0, 1}}), pattern(3, {{2, 2}})};
  const std::vector<double> w(4, 0.25);
  const std::vector<std::size_t> sensors{1};
  const auto map = probable_coverage_map(sensors, set, w);
  CHECK(map[0] == 0.5);
  CHECK(map[1] == 0.5);
  CHECK(map[2] == 0.0);
  const auto more = probable_coverage_map(std::vector<std::size_t>{1, 2}, set, w);
  for (std::size_t c = 0; c < 3; ++c) CHECK(more[c] >= map[c]);
  CHECK(probable_coverage_map(sensors, set, std::vector<double>{1, 0, 0, 0}) ==
        std::vector<double>{1, 1, 0});
}

TEST_CASE("expected coverage fraction arithmetic") {
  const Grid g = Grid::uniform(5, 1, 1.0, 1.0);
  const CellSet all = CellSet::all(5);
  const std::vector<std::size_t> s{0};
  const std::vector<TrackingMatrix> full{pattern(5, {{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}})};
  CHECK(expected_coverage_fraction(s, full, std::vector<double>{1.0}, g, all) == 1.0);
  const std::vector<TrackingMatrix> two{pattern(5, {{0, 0}, {1, 0}}),
                                        pattern(5, {{0, 0}, {1, 0}, {2, 0}})};
  CHECK(expected_coverage_fraction(s, two, std::vector<double>{0.5, 0.5}, g, all) ==
        doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("expected coverage equals the volume-weighted mean of the map on the desk ensemble") {
  const auto& e = desk_ensemble();
  const auto sensors = ensemble_place(e, 1).result.sensor_cells;
  const auto set = e.binary_set();
  const auto w = e.weights();
  const double path_a = expected_coverage_fraction(sensors, set, w, e.ref_grid, e.admissible);
  const auto map = probable_coverage_map(sensors, set, w);
  const double path_b = volume_weighted_mean(map, e.ref_grid, e.admissible);
  CHECK(std::abs(path_a - path_b) <= 1e-12);
  CHECK(path_a > 0.0);
  CHECK(path_a <= 1.0);
  MESSAGE("desk expected coverage with one sensor: " << path_a);
}

TEST_CASE("scaling all weights changes nothing") {
  const Grid ref = desk::reference_grid();
  const auto c = make_constraints(ConstraintPreset::location, desk::occupied(ref));
  auto scaled = desk::realizations();
  const std::vector<double> raw{0.1, 0.4, 0.3, 0.2};
  for (std::size_t i = 0; i < 4; ++i) scaled[i].weight = raw[i];
  auto base = scaled;
  for (auto& r : scaled) r.weight *= 3.7;
  const auto a = build_ensemble(base, ref, desk::params(), c);
  const auto b = build_ensemble(scaled, ref, desk::params(), c);
  const auto pa = ensemble_place(a, 3).result;
  const auto pb = ensemble_place(b, 3).result;
  CHECK(pa.sensor_cells == pb.sensor_cells);
  const auto ma = probable_coverage_map(pa.sensor_cells, a.binary_set(), a.weights());
  const auto mb = probable_coverage_map(pb.sensor_cells, b.binary_set(), b.weights());
  for (std::size_t k = 0; k < ma.size(); ++k) CHECK(ma[k] == doctest::Approx(mb[k]).epsilon(1e-14));
  CHECK(pa.covered_fraction == doctest::Approx(pb.covered_fraction).epsilon(1e-14));
}

TEST_CASE("expected coverage grows with p and with a looser threshold") {
  const Grid ref = desk::reference_grid();
  const auto c = make_constraints(ConstraintPreset::none, desk::occupied(ref));
  const auto r = desk::realizations();
  double last = 0.0;
  const auto& e = desk_ensemble();
  for (std::size_t p = 1; p <= 4; ++p) {
    const double f = ensemble_place(e, p).result.covered_fraction;
    CHECK(f >= last);
    last = f;
  }
  auto loose = desk::params();
  loose.eps_acc = 1e-6;
  const auto el = build_ensemble(r, ref, loose, c);
  const auto sensors = ensemble_place(e, 2).result.sensor_cells;
  CHECK(expected_coverage_fraction(sensors, el.binary_set(), el.weights(), ref, el.admissible) >=
        expected_coverage_fraction(sensors, e.binary_set(), e.weights(), ref, e.admissible));
}

TEST_CASE("realization errors carry the realization id") {
  const Grid ref = desk::reference_grid();
  std::vector<Realization> r{desk::realization(0)};
  r.push_back({"shifted", VelocityField::zero(Grid::uniform(16, 16, 0.25, 0.25, 1.0, 0.0)), 1.0});
  try {
    build_ensemble(r, ref, desk::params(), make_constraints(ConstraintPreset::none, CellSet({}, 256)));
    FAIL("expected an error");
  } catch (const GeometryError& err) {
    CHECK(std::string(err.what()).find("realization shifted") != std::string::npos);
  }
}

TEST_CASE("map exports") {
  const Grid g = Grid::uniform(3, 2, 0.5, 0.5);
  const std::vector<double> map{0, 0.25, 0.5, 0.75, 1, 0.5};
  const auto csv = coverage_csv(map, g);
  CHECK(csv.rfind("k,i,j,x,y,probability\n0,0,0,0.25,0.25,0\n1,1,0,0.75,0.25,0.25\n", 0) == 0);
  CHECK(parse_coverage_csv(csv, g) == map);
  CHECK_THROWS_AS(parse_coverage_csv("k,i,j,x,y,probability\n0,0,0,0,0,2\n", g), FormatError);
  const auto pgm = coverage_pgm(map, g);
  const std::string header = "P5\n3 2\n255\n";
  REQUIRE(pgm.size() == header.size() + 6);
  CHECK(pgm.substr(0, header.size()) == header);
  // Top image row is j = 1.
  const std::vector<int> want{191, 255, 128, 0, 64, 128};
  for (std::size_t p = 0; p < 6; ++p) {
    CHECK(static_cast<unsigned char>(pgm[header.size() + p]) == want[p]);
  }
}

TEST_CASE("manifest parsing") {
  const std::string text =
      "ref_grid = room.cfg\n"
      "diffusivity = 1e-3\ndt_markov = 10\ntau = 80\neps_acc = 1e-4\n"
      "preset = location\noccupied = 3 0 12 6\nsensors = 2\n"
      "realization = a grid=a.cfg generator=double-gyre:0.05 weight=0.25\n"
      "realization = b grid=/abs/b.cfg field=b.field\n";
  const auto m = parse_manifest(text, "/data/desk");
  CHECK(m.ref_grid_path == std::filesystem::path("/data/desk/room.cfg"));
  CHECK(m.tau.value() == 80.0);
  CHECK_FALSE(m.steps.has_value());
  CHECK(m.preset == ConstraintPreset::location);
  CHECK(m.occupied.size() == 1);
  REQUIRE(m.realizations.size() == 2);
  CHECK(m.realizations[0].generator == "double-gyre");
  CHECK(m.realizations[0].generator_value == 0.05);
  CHECK(m.realizations[1].grid_path == std::filesystem::path("/abs/b.cfg"));
  CHECK(m.realizations[1].field_path == std::filesystem::path("/data/desk/b.field"));
  CHECK(m.realizations[1].weight == 1.0);

  const std::string bad =
      "diffusivity = x\npreset = sometimes\n"
      "realization = a grid=a.cfg\nrealization = b field=f generator=channel:1\n";
  try {
    parse_manifest(bad, ".");
    FAIL("expected an error");
  } catch (const FormatError& err) {
    const std::string msg = err.what();
    for (const char* needle : {"line 1", "line 2", "line 3", "line 4", "missing key: ref_grid",
                               "missing key: dt_markov", "tau or steps"}) {
      CHECK(msg.find(needle) != std::string::npos);
    }
  }
}

TEST_CASE("the shipped desk manifest matches the in-memory fixture") {
  const auto manifest = load_manifest(std::filesystem::path(PFPLACE_SOURCE_DIR) / "data/desk/desk.manifest");
  const auto loaded = resolve_manifest(manifest);
  CHECK(loaded.ref_grid == desk::reference_grid());
  CHECK(loaded.params.steps == desk::kSteps);
  CHECK(loaded.params.eps_acc == desk::kEps);
  CHECK(loaded.params.dt_markov == desk::kDtMarkov);
  CHECK(loaded.params.diffusivity == desk::kDiffusivity);
  REQUIRE(loaded.realizations.size() == 4);
  const auto fixture = desk::realizations();
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(loaded.realizations[i].field == fixture[i].field);
    CHECK(loaded.realizations[i].weight == fixture[i].weight);
  }
}
