#include "doctest.h"

#include <cmath>
#include <fstream>
#include <numbers>

#include "oracles.hpp"
#include "pfplace/error.hpp"
#include "pfplace/flowfield.hpp"

using namespace pfplace;

namespace {

// Central-difference divergence at interior cells.
double max_divergence(const VelocityField& f) {
  const auto& g = f.grid();
  double worst = 0.0;
  for (std::size_t j = 1; j + 1 < g.ny(); ++j) {
    for (std::size_t i = 1; i + 1 < g.nx(); ++i) {
      const double dudx = (f.u()[g.index(i + 1, j)] - f.u()[g.index(i - 1, j)]) / (2 * g.dx());
      const double dvdy = (f.v()[g.index(i, j + 1)] - f.v()[g.index(i, j - 1)]) / (2 * g.dy());
      worst = std::max(worst, std::abs(dudx + dvdy));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("double gyre with zero amplitude is the zero field") {
  const Grid g = Grid::uniform(8, 8, 0.125, 0.125);
  const auto f = gen_double_gyre(g, 0.0);
  CHECK(f.max_speed() == 0.0);
  CHECK_THROWS_AS(gen_double_gyre(g, -1.0), ParameterError);
}

TEST_CASE("double gyre symmetry on an odd grid") {
  const Grid g = Grid::uniform(9, 9, 1.0 / 9.0, 1.0 / 9.0);
  const auto f = gen_double_gyre(g, 1.0);
  const std::size_t centre = g.index(4, 4);
  CHECK(std::abs(f.u()[centre]) < 1e-15);
  // For every column, |v| peaks on the horizontal midline.
  for (std::size_t i = 0; i < 9; ++i) {
    const double mid = std::abs(f.v()[g.index(i, 4)]);
    for (std::size_t j = 0; j < 9; ++j) CHECK(std::abs(f.v()[g.index(i, j)]) <= mid);
  }
  CHECK(f == gen_double_gyre(g, 1.0));
}

TEST_CASE("double gyre discrete divergence on a 64x64 grid") {
  const double A = 0.7;
  const double h = 1.0 / 64.0;
  const Grid g = Grid::uniform(64, 64, h, h);
  const double div = max_divergence(gen_double_gyre(g, A));
  const double bound = 1e-2 * A / h * (h * h + h * h);
  CHECK(div < bound);
  // With dx/Lx == dy/Ly the central-difference truncation terms cancel
  // exactly, leaving only rounding (measured ~1e-14 * A / h).
  CHECK(div < 1e-12 * A / h);
}

TEST_CASE("double gyre divergence on an anisotropic grid matches its closed form") {
  // With unequal cell aspect ratios the central-difference divergence is
  // A cos(pi x/Lx) cos(pi y/Ly) [ (pi/Ly) sin(pi dx/Lx)/dx - (pi/Lx) sin(pi dy/Ly)/dy ].
  const double A = 0.5, lx = 1.0, ly = 1.0;
  const Grid g = Grid::uniform(64, 32, lx / 64, ly / 32);
  const auto f = gen_double_gyre(g, A);
  const double pi = std::numbers::pi;
  const double factor = (pi / ly) * std::sin(pi * g.dx() / lx) / g.dx() -
                        (pi / lx) * std::sin(pi * g.dy() / ly) / g.dy();
  double worst_gap = 0.0;
  for (std::size_t j = 1; j + 1 < g.ny(); ++j) {
    for (std::size_t i = 1; i + 1 < g.nx(); ++i) {
      const auto c = g.center(g.index(i, j));
      const double dudx = (f.u()[g.index(i + 1, j)] - f.u()[g.index(i - 1, j)]) / (2 * g.dx());
      const double dvdy = (f.v()[g.index(i, j + 1)] - f.v()[g.index(i, j - 1)]) / (2 * g.dy());
      const double expected = A * std::cos(pi * c.x / lx) * std::cos(pi * c.y / ly) * factor;
      worst_gap = std::max(worst_gap, std::abs(dudx + dvdy - expected));
    }
  }
  CHECK(worst_gap < 1e-12);
}

TEST_CASE("channel flow profile and flux") {
  const double u_max = 0.3;
  GridSpec s;
  s.nx = 6;
  s.ny = 5;
  s.dx = 0.2;
  s.dy = 0.1;
  const Grid g(s);
  const auto f = gen_channel_flow(g, u_max);
  const double ly = 0.5;
  const double yh = g.dy() / (2 * ly);
  CHECK(f.u()[g.index(0, 0)] == doctest::Approx(u_max * 4 * yh * (1 - yh)).epsilon(1e-14));
  CHECK(f.u()[g.index(0, 4)] == doctest::Approx(u_max * 4 * yh * (1 - yh)).epsilon(1e-14));
  CHECK(f.u()[g.index(3, 2)] == doctest::Approx(u_max).epsilon(1e-15));
  CHECK(f.max_abs_v() == 0.0);
  double first = 0.0;
  for (std::size_t i = 0; i < g.nx(); ++i) {
    double flux = 0.0;
    for (std::size_t j = 0; j < g.ny(); ++j) flux += f.u()[g.index(i, j)] * g.dy();
    if (i == 0) first = flux;
    CHECK(std::abs(flux - first) <= 1e-12);
  }
  CHECK_THROWS_AS(gen_channel_flow(g, 0.0), ParameterError);
}

TEST_CASE("obstructed cells carry zero velocity") {
  GridSpec s;
  s.nx = 4;
  s.ny = 4;
  s.dx = s.dy = 0.25;
  s.obstructions = {{1, 1, 2, 2}};
  const Grid g(s);
  const auto f = gen_channel_flow(g, 1.0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.obstructed(k)) {
      CHECK(f.u()[k] == 0.0);
      CHECK(f.v()[k] == 0.0);
    }
  }
  CHECK(f.zeroed_count() == 4);
}

TEST_CASE("field file parsing") {
  const Grid g = Grid::uniform(2, 2, 1.0, 1.0);
  const auto f = parse_field("pffield v1 nx=2 ny=2\n0,1,0\n1,0.5,-0.5\n2,0,0\n3,-1,2\n", g);
  CHECK(f.u()[1] == 0.5);
  CHECK(f.v()[3] == 2.0);

  try {
    parse_field("pffield v1 nx=2 ny=2\n0,1,0\n1,0.5,-0.5\n2,0,0\n", g);
    FAIL("expected an error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("expected 4 cells, found 3") != std::string::npos);
  }
  try {
    parse_field("pffield v1 nx=2 ny=2\n0,1,0\n1,abc,0\n2,0,0\n3,0,0\n", g);
    FAIL("expected an error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  try {
    parse_field("pffield v1 nx=2 ny=2\n0,1,0\n1,0,0\n2,nan,0\n3,0,0\n", g);
    FAIL("expected an error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_field("pffield v1 nx=3 ny=2\n", g), FormatError);
}

TEST_CASE("field file disagreeing with the obstruction mask is corrected with a warning") {
  GridSpec s;
  s.nx = 2;
  s.ny = 1;
  s.obstructions = {{1, 0, 1, 0}};
  const Grid g(s);
  static int warnings = 0;
  warnings = 0;
  auto previous = set_warning_handler([](std::string_view) { ++warnings; });
  const auto f = parse_field("pffield v1 nx=2 ny=1\n0,1,0\n1,3,4\n", g);
  set_warning_handler(previous);
  CHECK(warnings == 1);
  CHECK(f.u()[1] == 0.0);
  CHECK(f.v()[1] == 0.0);
}

TEST_CASE("write then load reproduces the field bit for bit") {
  const auto dir = oracle::temp_dir("flowfield");
  GridSpec s;
  s.nx = 13;
  s.ny = 7;
  s.dx = 0.1;
  s.dy = 0.3;
  s.x0 = -0.37;
  const Grid g(s);
  oracle::Rng rng(7);
  std::vector<double> u(g.size()), v(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    u[k] = (rng.uniform() - 0.5) * 1e-3;
    v[k] = (rng.uniform() - 0.5) * 17.0;
  }
  const VelocityField f(g, u, v);
  write_field(f, dir / "f.txt");
  const auto back = load_field(dir / "f.txt", g);
  CHECK(back == f);
  CHECK(back.hash() == f.hash());
}
