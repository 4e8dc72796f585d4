#include "doctest.h"

#include "oracles.hpp"
#include "pfplace/container.hpp"
#include "pfplace/error.hpp"
#include "pfplace/pfoperator.hpp"

using namespace pfplace;

namespace {

Grid row_channel(std::size_t n) {
  GridSpec s;
  s.nx = n;
  s.ny = 1;
  s.boundaries = {{Edge::right, 0, 0, BoundaryRole::outlet}};
  return Grid(s);
}

MarkovMatrix shift_operator() {
  const Grid g = row_channel(5);
  const VelocityField f(g, std::vector<double>(5, 1.0), std::vector<double>(5, 0.0));
  BuildOptions opts;
  opts.transport.cfl_safety = 1.0;
  return build(f, 0.0, 1.0, opts);
}

void check_stochastic(const MarkovMatrix& P) {
  const auto& m = P.matrix();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    CHECK(std::abs(m.row_sum(i) - 1.0) <= 1e-10);
    for (double v : m.row(i).values) CHECK(v >= 0.0);
  }
}

}  // namespace

TEST_CASE("a quiescent field builds the identity") {
  const Grid g = Grid::uniform(4, 3, 1.0, 1.0);
  const auto P = build(VelocityField::zero(g), 0.0, 2.0);
  CHECK(P.n_states() == 13);
  CHECK(P.matrix() == SparseMatrix::identity(13));
}

TEST_CASE("a CFL-exact channel builds the unit shift into the sink") {
  const auto P = shift_operator();
  const auto& m = P.matrix();
  for (std::size_t k = 0; k < 5; ++k) {
    REQUIRE(m.row(k).size() == 1);
    CHECK(m.row(k).cols[0] == k + 1);
    CHECK(m.row(k).values[0] == 1.0);
  }
  CHECK(m.at(5, 5) == 1.0);
  const auto out = propagate(with_sink(DensityVector::delta(5, 0)), P, 5);
  CHECK(out[5] == 1.0);
  CHECK(out.total() == 1.0);
}

TEST_CASE("propagation matches direct solves on a 16x16 double gyre") {
  const Grid g = Grid::uniform(16, 16, 1.0 / 16, 1.0 / 16);
  const auto f = gen_double_gyre(g, 0.1);
  const double D = 1e-3, dt = 0.5;
  const auto P = build(f, D, dt);
  check_stochastic(P);
  TransportOptions sync;
  sync.sync_interval = dt;
  oracle::Rng rng(16);
  for (int trial = 0; trial < 10; ++trial) {
    const DensityVector mu(oracle::random_density(rng, g.size()));
    const auto direct = solve(mu, f, D, 10.0, {}, sync);
    const auto markov = propagate(with_sink(mu), P, 20);
    std::vector<double> interior(markov.values().begin(), markov.values().end() - 1);
    CHECK(oracle::l1(interior, direct.density.vector()) <= 1e-9 * mu.total());
    CHECK(std::abs(markov[g.size()] - direct.exited_mass) <= 1e-9 * mu.total());
  }
}

TEST_CASE("obstructed cells are unit self-loops and build is thread-count independent") {
  GridSpec s;
  s.nx = 10;
  s.ny = 8;
  s.dx = s.dy = 0.1;
  s.obstructions = {{3, 2, 5, 4}};
  s.boundaries = {{Edge::left, 0, 7, BoundaryRole::inlet}, {Edge::right, 2, 6, BoundaryRole::outlet}};
  const Grid g(s);
  const auto f = gen_channel_flow(g, 0.2);
  BuildOptions serial, parallel;
  serial.threads = 1;
  parallel.threads = 3;
  const auto P1 = build(f, 2e-3, 0.7, serial);
  const auto P3 = build(f, 2e-3, 0.7, parallel);
  CHECK(P1 == P3);
  check_stochastic(P1);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g.obstructed(k)) continue;
    REQUIRE(P1.matrix().row(k).size() == 1);
    CHECK(P1.matrix().row(k).cols[0] == k);
    CHECK(P1.matrix().row(k).values[0] == 1.0);
    // Nothing flows into an obstruction either.
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (i != k) CHECK(P1.matrix().at(i, k) == 0.0);
    }
  }
  CHECK(P1.matrix().at(g.size(), g.size()) == 1.0);
}

TEST_CASE("sparsification drops tiny entries and renormalises") {
  std::vector<SparseEntry> row{{0, 0.5}, {1, 1e-13}, {2, 0.5 - 1e-13}};
  sparsify_row(row, 1e-12);
  REQUIRE(row.size() == 2);
  CHECK(row[0].value + row[1].value == doctest::Approx(1.0).epsilon(1e-16));
}

TEST_CASE("invariants are enforced on construction") {
  CHECK_THROWS_AS(MarkovMatrix(SparseMatrix::from_rows(2, 2, {{{0, 0.9}}, {{1, 1.0}}}), 1.0, {}),
                  IntegrityError);
  CHECK_THROWS_AS(MarkovMatrix(SparseMatrix::from_rows(2, 2, {{{0, 1.5}, {1, -0.5}}, {{1, 1.0}}}),
                               1.0, {}),
                  IntegrityError);
  CHECK_THROWS_AS(MarkovMatrix(SparseMatrix::from_rows(2, 2, {{{0, 1.0}}, {{0, 1.0}}}), 1.0, {}),
                  IntegrityError);
  CHECK_THROWS_AS(MarkovMatrix(SparseMatrix::identity(2), 0.0, {}), IntegrityError);
}

TEST_CASE("propagation basics") {
  const MarkovMatrix I(SparseMatrix::identity(4), 1.0, {});
  oracle::Rng rng(6);
  const DensityVector mu(oracle::random_density(rng, 4));
  CHECK(propagate(mu, I, 0) == mu);
  const SourceTerm src{{{2, 0.25}}, SourceSchedule::constant};
  const auto out = propagate(mu, I, 3, src);
  CHECK(out[2] == doctest::Approx(mu[2] + 3 * 0.25).epsilon(1e-15));
  CHECK(out[0] == mu[0]);
  const MarkovMatrix half(SparseMatrix::identity(4), 0.5, {});
  CHECK(propagate(mu, half, 3, src)[2] == doctest::Approx(mu[2] + 3 * 0.125).epsilon(1e-15));
  const SourceTerm impulse{{{1, 2.0}}, SourceSchedule::single_step};
  CHECK(propagate(mu, I, 3, impulse)[1] == doctest::Approx(mu[1] + 2.0).epsilon(1e-15));
  CHECK_THROWS_AS(propagate(DensityVector(3), I, 1), DimensionError);
  CHECK_THROWS_AS(propagate(mu, I, 1, SourceTerm{{{3, 1.0}}, SourceSchedule::constant}),
                  IndexError);
}

TEST_CASE("batched propagation equals one-at-a-time propagation") {
  const Grid g = Grid::uniform(8, 8, 0.125, 0.125);
  const auto P = build(gen_double_gyre(g, 0.1), 1e-3, 0.5);
  oracle::Rng rng(12);
  std::vector<DensityVector> states;
  for (int t = 0; t < 7; ++t) states.push_back(with_sink(DensityVector(oracle::random_density(rng, 64))));
  const auto batch = propagate_batch(states, P, 9);
  for (std::size_t t = 0; t < states.size(); ++t) CHECK(batch[t] == propagate(states[t], P, 9));
}

TEST_CASE("observation reads indicator columns") {
  const DensityVector mu(std::vector<double>{0.1, 0.3, 0.2, 0.4});
  const SensorConfig one({1}, 4);
  CHECK(observe(mu, one) == std::vector<double>{0.3});
  const DensityVector uniform(4, 0.25);
  const SensorConfig two({3, 0}, 4);
  CHECK(observe(uniform, two) == std::vector<double>{0.25, 0.25});
  // Dense C with indicator columns.
  std::vector<double> C(4 * 2, 0.0);
  C[3 * 2 + 0] = 1.0;
  C[0 * 2 + 1] = 1.0;
  std::vector<double> y(2, 0.0);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t s = 0; s < 2; ++s) y[s] += mu[i] * C[i * 2 + s];
  }
  CHECK(observe(mu, two) == y);
  CHECK_THROWS_AS(SensorConfig({1, 1}, 4), ParameterError);
  CHECK_THROWS_AS(SensorConfig({4}, 4), IndexError);
}

TEST_CASE("save and load") {
  const auto dir = oracle::temp_dir("pfoperator");
  const MarkovMatrix I(SparseMatrix::identity(5), 1.0, {});
  save(I, dir / "id.pfop");
  CHECK(load(dir / "id.pfop") == I);

  const Grid g = Grid::uniform(16, 16, 1.0 / 16, 1.0 / 16);
  const auto f = gen_double_gyre(g, 0.1);
  const auto P = build(f, 1e-3, 0.5);
  save(P, dir / "gyre.pfop");
  const auto back = load(dir / "gyre.pfop", P.provenance());
  CHECK(back.matrix().values() == P.matrix().values());
  CHECK(back.matrix().col_idx() == P.matrix().col_idx());
  CHECK(back == P);
  Provenance other = P.provenance();
  other.field_hash ^= 1;
  CHECK_THROWS_AS(load(dir / "gyre.pfop", other), IntegrityError);

  // A row summing to 0.9 under a valid checksum still fails the invariant.
  ContainerHeader h;
  h.kind = "markov";
  h.dt_markov = 1.0;
  h.scheme = kTransportScheme;
  write_container(dir / "bad.pfop", h, SparseMatrix::from_rows(2, 2, {{{0, 0.9}}, {{1, 1.0}}}));
  CHECK_THROWS_AS(load(dir / "bad.pfop"), IntegrityError);
}
