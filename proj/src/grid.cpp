#include "pfplace/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pfplace/error.hpp"
#include "pfplace/hash.hpp"
#include "pfplace/keyvalue.hpp"

namespace pfplace {

std::string_view to_string(Edge edge) {
  switch (edge) {
    case Edge::left: return "left";
    case Edge::right: return "right";
    case Edge::bottom: return "bottom";
    case Edge::top: return "top";
  }
  return "?";
}

std::string_view to_string(BoundaryRole role) {
  switch (role) {
    case BoundaryRole::wall: return "wall";
    case BoundaryRole::inlet: return "inlet";
    case BoundaryRole::outlet: return "outlet";
  }
  return "?";
}

namespace {

std::vector<std::string> validate(const GridSpec& s) {
  std::vector<std::string> problems;
  if (s.nx < 1) problems.push_back("nx must be >= 1");
  if (s.ny < 1) problems.push_back("ny must be >= 1");
  if (!(s.dx > 0.0) || !std::isfinite(s.dx)) problems.push_back("dx must be > 0");
  if (!(s.dy > 0.0) || !std::isfinite(s.dy)) problems.push_back("dy must be > 0");
  if (!std::isfinite(s.x0) || !std::isfinite(s.y0)) problems.push_back("origin must be finite");
  if (!std::isfinite(s.inlet_value) || s.inlet_value < 0.0) {
    problems.push_back("inlet_value must be finite and >= 0");
  }
  if (!problems.empty()) return problems;

  for (const auto& seg : s.boundaries) {
    const std::size_t len = (seg.edge == Edge::left || seg.edge == Edge::right) ? s.ny : s.nx;
    if (seg.first > seg.last || seg.last >= len) {
      problems.push_back("boundary segment " + std::string(to_string(seg.edge)) + " " +
                         std::to_string(seg.first) + ".." + std::to_string(seg.last) +
                         " outside edge of length " + std::to_string(len));
    }
  }
  for (std::size_t a = 0; a < s.boundaries.size(); ++a) {
    for (std::size_t b = a + 1; b < s.boundaries.size(); ++b) {
      const auto& p = s.boundaries[a];
      const auto& q = s.boundaries[b];
      if (p.edge == q.edge && p.first <= q.last && q.first <= p.last) {
        problems.push_back("boundary segments overlap on edge " + std::string(to_string(p.edge)));
      }
    }
  }
  for (const auto& r : s.obstructions) {
    if (r.i0 > r.i1 || r.j0 > r.j1 || r.i1 >= s.nx || r.j1 >= s.ny) {
      problems.push_back("obstruction (" + std::to_string(r.i0) + "," + std::to_string(r.j0) +
                         "," + std::to_string(r.i1) + "," + std::to_string(r.j1) +
                         ") outside grid");
    }
  }
  if (!s.cell_volumes.empty()) {
    if (s.cell_volumes.size() != s.nx * s.ny) {
      problems.push_back("cell_volumes has " + std::to_string(s.cell_volumes.size()) +
                         " entries, expected " + std::to_string(s.nx * s.ny));
    } else if (std::any_of(s.cell_volumes.begin(), s.cell_volumes.end(),
                           [](double v) { return !(v > 0.0) || !std::isfinite(v); })) {
      problems.push_back("cell volumes must be positive");
    }
  }
  return problems;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += "; ";
    out += parts[i];
  }
  return out;
}

}  // namespace

Grid::Grid(const GridSpec& spec)
    : spec_(spec),
      nx_(spec.nx),
      ny_(spec.ny),
      dx_(spec.dx),
      dy_(spec.dy),
      x0_(spec.x0),
      y0_(spec.y0),
      inlet_value_(spec.inlet_value) {
  if (auto problems = validate(spec); !problems.empty()) {
    throw ParameterError("invalid grid: " + join(problems));
  }
  const std::size_t n = size();
  if (spec.cell_volumes.empty()) {
    volumes_.assign(n, dx_ * dy_);
  } else {
    volumes_ = spec.cell_volumes;
  }
  for (double v : volumes_) total_volume_ += v;

  obstructed_.assign(n, 0);
  for (const auto& r : spec.obstructions) {
    for (std::size_t j = r.j0; j <= r.j1; ++j) {
      for (std::size_t i = r.i0; i <= r.i1; ++i) obstructed_[j * nx_ + i] = 1;
    }
  }

  roles_[static_cast<int>(Edge::left)].assign(ny_, BoundaryRole::wall);
  roles_[static_cast<int>(Edge::right)].assign(ny_, BoundaryRole::wall);
  roles_[static_cast<int>(Edge::bottom)].assign(nx_, BoundaryRole::wall);
  roles_[static_cast<int>(Edge::top)].assign(nx_, BoundaryRole::wall);
  for (const auto& seg : spec.boundaries) {
    auto& roles = roles_[static_cast<int>(seg.edge)];
    for (std::size_t p = seg.first; p <= seg.last; ++p) roles[p] = seg.role;
  }
}

Grid Grid::uniform(std::size_t nx, std::size_t ny, double dx, double dy, double x0, double y0) {
  GridSpec spec;
  spec.nx = nx;
  spec.ny = ny;
  spec.dx = dx;
  spec.dy = dy;
  spec.x0 = x0;
  spec.y0 = y0;
  return Grid(spec);
}

std::size_t Grid::index(std::size_t i, std::size_t j) const {
  if (i >= nx_ || j >= ny_) {
    throw IndexError("cell (" + std::to_string(i) + "," + std::to_string(j) +
                     ") outside " + std::to_string(nx_) + "x" + std::to_string(ny_) + " grid");
  }
  return j * nx_ + i;
}

CellCoords Grid::coords(std::size_t k) const {
  if (k >= size()) {
    throw IndexError("cell index " + std::to_string(k) + " >= " + std::to_string(size()));
  }
  return {k % nx_, k / nx_};
}

Point Grid::center(std::size_t k) const {
  const auto c = coords(k);
  return {x0_ + (static_cast<double>(c.i) + 0.5) * dx_,
          y0_ + (static_cast<double>(c.j) + 0.5) * dy_};
}

namespace {

// Cell position along one axis; exact edge hits go to the lower cell.
std::size_t axis_cell(double coord, double origin, double h, std::size_t n) {
  const double t = (coord - origin) / h;
  const double nearest = std::round(t);
  double cell;
  if (std::abs(t - nearest) <= 1e-9 * std::max(1.0, std::abs(t))) {
    cell = nearest - 1.0;  // on an edge
  } else {
    cell = std::floor(t);
  }
  cell = std::clamp(cell, 0.0, static_cast<double>(n - 1));
  return static_cast<std::size_t>(cell);
}

}  // namespace

std::size_t Grid::locate(double x, double y) const {
  const double tol_x = 1e-9 * std::max(1.0, width());
  const double tol_y = 1e-9 * std::max(1.0, height());
  if (x < x0_ - tol_x || x > x0_ + width() + tol_x || y < y0_ - tol_y ||
      y > y0_ + height() + tol_y) {
    throw GeometryError("point (" + format_double(x) + ", " + format_double(y) +
                        ") outside grid domain");
  }
  return axis_cell(y, y0_, dy_, ny_) * nx_ + axis_cell(x, x0_, dx_, nx_);
}

std::size_t Grid::obstruction_count() const {
  return static_cast<std::size_t>(std::count(obstructed_.begin(), obstructed_.end(), 1));
}

BoundaryRole Grid::boundary_role(Edge edge, std::size_t position) const {
  const auto& roles = roles_[static_cast<int>(edge)];
  if (position >= roles.size()) {
    throw IndexError("boundary position " + std::to_string(position) + " outside " +
                     std::string(to_string(edge)) + " edge");
  }
  return roles[position];
}

std::size_t Grid::edge_length(Edge edge) const {
  return (edge == Edge::left || edge == Edge::right) ? ny_ : nx_;
}

bool Grid::same_extent(const Grid& other) const {
  auto close = [](double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
  };
  return close(x0_, other.x0_) && close(y0_, other.y0_) && close(width(), other.width()) &&
         close(height(), other.height());
}

std::uint64_t Grid::hash() const {
  Fnv1a h;
  h.update("grid");
  h.update_value(static_cast<std::uint64_t>(nx_));
  h.update_value(static_cast<std::uint64_t>(ny_));
  h.update_value(dx_);
  h.update_value(dy_);
  h.update_value(x0_);
  h.update_value(y0_);
  h.update_value(inlet_value_);
  h.update_span<double>(volumes_);
  h.update_span<std::uint8_t>(obstructed_);
  for (const auto& roles : roles_) h.update_span<BoundaryRole>(roles);
  return h.digest();
}

bool Grid::operator==(const Grid& o) const {
  return nx_ == o.nx_ && ny_ == o.ny_ && dx_ == o.dx_ && dy_ == o.dy_ && x0_ == o.x0_ &&
         y0_ == o.y0_ && inlet_value_ == o.inlet_value_ && volumes_ == o.volumes_ &&
         obstructed_ == o.obstructed_ && roles_[0] == o.roles_[0] && roles_[1] == o.roles_[1] &&
         roles_[2] == o.roles_[2] && roles_[3] == o.roles_[3];
}

CellSet::CellSet(std::vector<std::size_t> indices, std::size_t cell_count)
    : indices_(std::move(indices)), cell_count_(cell_count) {
  std::sort(indices_.begin(), indices_.end());
  indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
  if (!indices_.empty() && indices_.back() >= cell_count_) {
    throw IndexError("cell index " + std::to_string(indices_.back()) + " >= " +
                     std::to_string(cell_count_));
  }
}

CellSet CellSet::all(std::size_t cell_count) {
  std::vector<std::size_t> idx(cell_count);
  for (std::size_t k = 0; k < cell_count; ++k) idx[k] = k;
  return CellSet(std::move(idx), cell_count);
}

CellSet CellSet::from_rects(const Grid& grid, std::span<const CellRect> rects) {
  std::vector<std::size_t> idx;
  for (const auto& r : rects) {
    if (r.i0 > r.i1 || r.j0 > r.j1) throw IndexError("empty cell rectangle");
    for (std::size_t j = r.j0; j <= r.j1; ++j) {
      for (std::size_t i = r.i0; i <= r.i1; ++i) idx.push_back(grid.index(i, j));
    }
  }
  return CellSet(std::move(idx), grid.size());
}

CellSet CellSet::obstructed(const Grid& grid) {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid.obstructed(k)) idx.push_back(k);
  }
  return CellSet(std::move(idx), grid.size());
}

bool CellSet::contains(std::size_t k) const {
  return std::binary_search(indices_.begin(), indices_.end(), k);
}

CellSet CellSet::complement() const {
  std::vector<std::size_t> idx;
  idx.reserve(cell_count_ - indices_.size());
  auto it = indices_.begin();
  for (std::size_t k = 0; k < cell_count_; ++k) {
    if (it != indices_.end() && *it == k) {
      ++it;
    } else {
      idx.push_back(k);
    }
  }
  return CellSet(std::move(idx), cell_count_);
}

CellSet CellSet::united(const CellSet& other) const {
  if (other.cell_count_ != cell_count_) {
    throw IndexError("cell sets built for different grids");
  }
  std::vector<std::size_t> idx = indices_;
  idx.insert(idx.end(), other.indices_.begin(), other.indices_.end());
  return CellSet(std::move(idx), cell_count_);
}

GridSpec parse_grid_config(std::string_view text) {
  GridSpec spec;
  std::vector<std::string> problems;
  bool have_nx = false, have_ny = false, have_dx = false, have_dy = false;
  auto bad = [&](const KeyValue& kv, const std::string& msg) {
    problems.push_back("line " + std::to_string(kv.line) + ": " + kv.key + ": " + msg);
  };

  for (const auto& kv : parse_key_values(text)) {
    const auto tokens = split_ws(kv.value);
    if (kv.key == "nx" || kv.key == "ny") {
      std::size_t n = 0;
      if (tokens.size() != 1 || !parse_size(tokens[0], n)) {
        bad(kv, "expected a non-negative integer");
        continue;
      }
      (kv.key == "nx" ? spec.nx : spec.ny) = n;
      (kv.key == "nx" ? have_nx : have_ny) = true;
    } else if (kv.key == "dx" || kv.key == "dy" || kv.key == "inlet_value") {
      double v = 0;
      if (tokens.size() != 1 || !parse_double(tokens[0], v)) {
        bad(kv, "expected a number");
        continue;
      }
      if (kv.key == "dx") {
        spec.dx = v;
        have_dx = true;
      } else if (kv.key == "dy") {
        spec.dy = v;
        have_dy = true;
      } else {
        spec.inlet_value = v;
      }
    } else if (kv.key == "origin") {
      if (tokens.size() != 2 || !parse_double(tokens[0], spec.x0) ||
          !parse_double(tokens[1], spec.y0)) {
        bad(kv, "expected 'x0 y0'");
      }
    } else if (kv.key == "boundary") {
      BoundarySegment seg;
      if (tokens.size() != 4) {
        bad(kv, "expected '<edge> <first> <last> <role>'");
        continue;
      }
      const auto& e = tokens[0];
      if (e == "left") seg.edge = Edge::left;
      else if (e == "right") seg.edge = Edge::right;
      else if (e == "bottom") seg.edge = Edge::bottom;
      else if (e == "top") seg.edge = Edge::top;
      else {
        bad(kv, "unknown edge '" + e + "'");
        continue;
      }
      const auto& r = tokens[3];
      if (r == "wall") seg.role = BoundaryRole::wall;
      else if (r == "inlet") seg.role = BoundaryRole::inlet;
      else if (r == "outlet") seg.role = BoundaryRole::outlet;
      else {
        bad(kv, "unknown role '" + r + "'");
        continue;
      }
      if (!parse_size(tokens[1], seg.first) || !parse_size(tokens[2], seg.last)) {
        bad(kv, "segment range must be non-negative integers");
        continue;
      }
      spec.boundaries.push_back(seg);
    } else if (kv.key == "obstruction") {
      CellRect r;
      if (tokens.size() != 4 || !parse_size(tokens[0], r.i0) || !parse_size(tokens[1], r.j0) ||
          !parse_size(tokens[2], r.i1) || !parse_size(tokens[3], r.j1)) {
        bad(kv, "expected 'i0 j0 i1 j1'");
        continue;
      }
      spec.obstructions.push_back(r);
    } else {
      bad(kv, "unknown key");
    }
  }
  if (!have_nx) problems.push_back("missing key: nx");
  if (!have_ny) problems.push_back("missing key: ny");
  if (!have_dx) problems.push_back("missing key: dx");
  if (!have_dy) problems.push_back("missing key: dy");
  if (problems.empty()) {
    for (auto& p : validate(spec)) problems.push_back(std::move(p));
  }
  if (!problems.empty()) throw FormatError("grid config: " + join(problems));
  return spec;
}

Grid load_grid(const std::filesystem::path& path) {
  try {
    return Grid(parse_grid_config(read_text_file(path)));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string grid_config_text(const GridSpec& spec) {
  std::ostringstream out;
  out << "nx = " << spec.nx << "\n";
  out << "ny = " << spec.ny << "\n";
  out << "dx = " << format_double(spec.dx) << "\n";
  out << "dy = " << format_double(spec.dy) << "\n";
  out << "origin = " << format_double(spec.x0) << " " << format_double(spec.y0) << "\n";
  out << "inlet_value = " << format_double(spec.inlet_value) << "\n";
  for (const auto& seg : spec.boundaries) {
    out << "boundary = " << to_string(seg.edge) << " " << seg.first << " " << seg.last << " "
        << to_string(seg.role) << "\n";
  }
  for (const auto& r : spec.obstructions) {
    out << "obstruction = " << r.i0 << " " << r.j0 << " " << r.i1 << " " << r.j1 << "\n";
  }
  return out.str();
}

}  // namespace pfplace
