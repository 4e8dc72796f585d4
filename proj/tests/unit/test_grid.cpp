#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "pfplace/error.hpp"
#include "pfplace/flowfield.hpp"
#include "pfplace/grid.hpp"

using namespace pfplace;

TEST_CASE("cell index follows j*nx+i") {
  const Grid g = Grid::uniform(4, 3, 1.0, 1.0);
  CHECK(g.index(0, 0) == 0);
  CHECK(g.index(2, 1) == 6);
  CHECK_THROWS_AS(g.index(4, 0), IndexError);
  CHECK_THROWS_AS(g.index(0, 3), IndexError);
  CHECK_THROWS_AS(g.coords(12), IndexError);
}

TEST_CASE("index and coords round-trip on every cell of a 5x3 grid") {
  const Grid g = Grid::uniform(5, 3, 0.5, 2.0);
  std::size_t visited = 0;
  for (std::size_t j = 0; j < 3; ++j) {
    for (std::size_t i = 0; i < 5; ++i) {
      const auto c = g.coords(g.index(i, j));
      CHECK(c.i == i);
      CHECK(c.j == j);
      ++visited;
    }
  }
  CHECK(visited == 15);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto c = g.coords(k);
    CHECK(g.index(c.i, c.j) == k);
  }
}

TEST_CASE("cell centres, volumes and point location") {
  const Grid g = Grid::uniform(4, 2, 0.5, 1.0, 1.0, -1.0);
  const auto p = g.center(g.index(1, 1));
  CHECK(p.x == doctest::Approx(1.75));
  CHECK(p.y == doctest::Approx(0.5));
  CHECK(g.volume(3) == 0.5);
  CHECK(g.total_volume() == doctest::Approx(4.0));
  CHECK(g.locate(1.75, 0.5) == g.index(1, 1));
  // A point on a shared edge belongs to the lower-index cell.
  CHECK(g.locate(1.5, 0.5) == g.index(0, 1));
  CHECK(g.locate(1.0, -1.0) == 0);
  CHECK(g.locate(3.0, 1.0) == g.index(3, 1));
  CHECK_THROWS_AS(g.locate(3.1, 0.0), GeometryError);
  CHECK_THROWS_AS(g.locate(1.5, -1.5), GeometryError);
}

TEST_CASE("grid validation reports every problem") {
  GridSpec s;
  s.nx = 0;
  s.dx = -1.0;
  s.dy = 0.0;
  try {
    Grid g(s);
    FAIL("expected an error");
  } catch (const ParameterError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("nx") != std::string::npos);
    CHECK(msg.find("dx") != std::string::npos);
    CHECK(msg.find("dy") != std::string::npos);
  }
}

TEST_CASE("boundary roles default to wall and honour segments") {
  GridSpec s;
  s.nx = 4;
  s.ny = 4;
  s.boundaries = {{Edge::left, 1, 2, BoundaryRole::inlet}, {Edge::right, 0, 0, BoundaryRole::outlet}};
  const Grid g(s);
  CHECK(g.boundary_role(Edge::left, 0) == BoundaryRole::wall);
  CHECK(g.boundary_role(Edge::left, 1) == BoundaryRole::inlet);
  CHECK(g.boundary_role(Edge::left, 2) == BoundaryRole::inlet);
  CHECK(g.boundary_role(Edge::right, 0) == BoundaryRole::outlet);
  CHECK(g.boundary_role(Edge::top, 3) == BoundaryRole::wall);

  GridSpec overlap = s;
  overlap.boundaries.push_back({Edge::left, 2, 3, BoundaryRole::outlet});
  CHECK_THROWS_AS(Grid{overlap}, ParameterError);
  GridSpec outside = s;
  outside.boundaries = {{Edge::bottom, 2, 4, BoundaryRole::outlet}};
  CHECK_THROWS_AS(Grid{outside}, ParameterError);
}

TEST_CASE("cell sets are sorted, distinct and validated") {
  const CellSet s({5, 1, 3, 1}, 6);
  CHECK(s.indices() == std::vector<std::size_t>{1, 3, 5});
  CHECK(s.contains(3));
  CHECK_FALSE(s.contains(2));
  CHECK(s.complement().indices() == std::vector<std::size_t>{0, 2, 4});
  CHECK(s.united(CellSet({0, 1}, 6)).indices() == std::vector<std::size_t>{0, 1, 3, 5});
  CHECK_THROWS_AS(CellSet({6}, 6), IndexError);
  CHECK(CellSet::all(3).size() == 3);

  const Grid g = Grid::uniform(4, 4, 1.0, 1.0);
  const CellRect r{1, 1, 2, 2};
  const auto rect = CellSet::from_rects(g, std::span<const CellRect>(&r, 1));
  CHECK(rect.indices() == std::vector<std::size_t>{5, 6, 9, 10});
}

TEST_CASE("grid config parses and round-trips") {
  const std::string text =
      "# desk room\n"
      "nx = 8\nny = 4\ndx = 0.25\ndy = 0.5\norigin = 1 2\n"
      "boundary = left 0 1 inlet\nboundary = right 2 3 outlet\n"
      "obstruction = 2 1 3 2\ninlet_value = 0.5\n";
  const GridSpec spec = parse_grid_config(text);
  const Grid g(spec);
  CHECK(g.nx() == 8);
  CHECK(g.x0() == 1.0);
  CHECK(g.inlet_value() == 0.5);
  CHECK(g.obstruction_count() == 4);
  CHECK(g.obstructed(g.index(3, 2)));
  CHECK(g.boundary_role(Edge::right, 3) == BoundaryRole::outlet);
  const Grid again(parse_grid_config(grid_config_text(spec)));
  CHECK(again == g);
  CHECK(again.hash() == g.hash());
}

TEST_CASE("grid config collects all errors with line numbers") {
  const std::string text = "nx = four\nboundary = middle 0 1 inlet\ncolour = red\ndy = 1\n";
  try {
    parse_grid_config(text);
    FAIL("expected an error");
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 1") != std::string::npos);
    CHECK(msg.find("line 2") != std::string::npos);
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("missing key: dx") != std::string::npos);
  }
}

TEST_CASE("mapping onto an identical grid leaves the field unchanged") {
  const Grid g = Grid::uniform(6, 5, 0.2, 0.2);
  const auto f = gen_double_gyre(g, 0.3);
  CHECK(map_to_reference(f, g) == f);
}

TEST_CASE("a uniform field stays uniform on a finer reference grid") {
  const Grid src = Grid::uniform(10, 10, 0.1, 0.1);
  const Grid ref = Grid::uniform(20, 20, 0.05, 0.05);
  const VelocityField f(src, std::vector<double>(100, 1.0), std::vector<double>(100, 0.0));
  const auto mapped = map_to_reference(f, ref);
  REQUIRE(mapped.size() == 400);
  for (std::size_t k = 0; k < 400; ++k) {
    CHECK(mapped.u()[k] == 1.0);
    CHECK(mapped.v()[k] == 0.0);
  }
}

TEST_CASE("mapping a shear field around an obstruction matches containment") {
  GridSpec s;
  s.nx = 6;
  s.ny = 6;
  s.dx = s.dy = 1.0 / 6.0;
  s.obstructions = {{2, 2, 3, 3}};
  const Grid src(s);
  std::vector<double> u(36), v(36);
  for (std::size_t k = 0; k < 36; ++k) {
    u[k] = src.center(k).y;  // linear shear
    v[k] = 0.5 * src.center(k).x;
  }
  const VelocityField f(src, u, v);
  const Grid ref = Grid::uniform(15, 15, 1.0 / 15.0, 1.0 / 15.0);
  const auto mapped = map_to_reference(f, ref);
  for (std::size_t k = 0; k < ref.size(); ++k) {
    const auto c = ref.center(k);
    // Containing source cell, computed independently from the centre; a
    // centre on a shared edge belongs to the lower cell.
    auto containing = [](double t) {
      const double r = std::round(t);
      return static_cast<std::size_t>(std::abs(t - r) < 1e-9 ? std::max(r - 1.0, 0.0)
                                                             : std::floor(t));
    };
    const std::size_t si = containing(c.x * 6.0);
    const std::size_t sj = containing(c.y * 6.0);
    const std::size_t sk = sj * 6 + si;
    const bool inside = si >= 2 && si <= 3 && sj >= 2 && sj <= 3;
    CHECK(mapped.obstructed(k) == inside);
    if (inside) {
      CHECK(mapped.u()[k] == 0.0);
      CHECK(mapped.v()[k] == 0.0);
    } else {
      CHECK(mapped.u()[k] == u[sk]);
      CHECK(mapped.v()[k] == v[sk]);
    }
  }
}

TEST_CASE("mapping is idempotent and does not raise the peak speed") {
  GridSpec s;
  s.nx = 7;
  s.ny = 9;
  s.dx = 2.0 / 7.0;
  s.dy = 1.0 / 9.0;
  s.obstructions = {{1, 1, 2, 3}};
  const Grid src(s);
  const Grid ref = Grid::uniform(16, 8, 0.125, 0.125);
  const auto f = gen_double_gyre(src, 0.4);
  const auto once = map_to_reference(f, ref);
  CHECK(map_to_reference(once, ref) == once);
  CHECK(once.max_speed() <= f.max_speed());
}

TEST_CASE("mapping across different extents is rejected") {
  const Grid a = Grid::uniform(4, 4, 0.25, 0.25);
  const Grid b = Grid::uniform(4, 4, 0.25, 0.25, 0.1, 0.0);
  CHECK_THROWS_AS(map_to_reference(VelocityField::zero(a), b), GeometryError);
  const Grid c = Grid::uniform(8, 8, 0.125, 0.125 * (1 + 1e-12));
  CHECK_NOTHROW(map_to_reference(VelocityField::zero(a), c));
}
