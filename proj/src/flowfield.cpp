#include "pfplace/flowfield.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "pfplace/error.hpp"
#include "pfplace/hash.hpp"
#include "pfplace/keyvalue.hpp"

namespace pfplace {

VelocityField::VelocityField(Grid grid, std::vector<double> u, std::vector<double> v)
    : VelocityField(grid, std::move(u), std::move(v),
                    std::vector<std::uint8_t>(grid.obstruction_mask().begin(),
                                              grid.obstruction_mask().end())) {}

VelocityField::VelocityField(Grid grid, std::vector<double> u, std::vector<double> v,
                             std::vector<std::uint8_t> obstructed)
    : grid_(std::move(grid)), u_(std::move(u)), v_(std::move(v)), obstructed_(std::move(obstructed)) {
  const std::size_t n = grid_.size();
  if (u_.size() != n || v_.size() != n || obstructed_.size() != n) {
    throw DimensionError("velocity field has " + std::to_string(u_.size()) + "/" +
                         std::to_string(v_.size()) + " components for " + std::to_string(n) +
                         " cells");
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!std::isfinite(u_[k]) || !std::isfinite(v_[k])) {
      throw ParameterError("non-finite velocity at cell " + std::to_string(k));
    }
    if (grid_.obstructed(k)) obstructed_[k] = 1;
    if (obstructed_[k]) {
      if (u_[k] != 0.0 || v_[k] != 0.0) ++zeroed_;
      u_[k] = 0.0;
      v_[k] = 0.0;
    }
  }
}

VelocityField VelocityField::zero(const Grid& grid) {
  return VelocityField(grid, std::vector<double>(grid.size(), 0.0),
                       std::vector<double>(grid.size(), 0.0));
}

double VelocityField::max_abs_u() const {
  double m = 0.0;
  for (double x : u_) m = std::max(m, std::abs(x));
  return m;
}

double VelocityField::max_abs_v() const {
  double m = 0.0;
  for (double x : v_) m = std::max(m, std::abs(x));
  return m;
}

double VelocityField::max_speed() const {
  double m = 0.0;
  for (std::size_t k = 0; k < u_.size(); ++k) m = std::max(m, std::hypot(u_[k], v_[k]));
  return m;
}

std::uint64_t VelocityField::hash() const {
  Fnv1a h;
  h.update("field");
  h.update_value(grid_.hash());
  h.update_span<double>(u_);
  h.update_span<double>(v_);
  h.update_span<std::uint8_t>(obstructed_);
  return h.digest();
}

bool VelocityField::operator==(const VelocityField& o) const {
  return grid_ == o.grid_ && u_ == o.u_ && v_ == o.v_ && obstructed_ == o.obstructed_;
}

VelocityField gen_double_gyre(const Grid& grid, double amplitude) {
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
    throw ParameterError("double-gyre amplitude must be >= 0, got " + format_double(amplitude));
  }
  const double lx = grid.width();
  const double ly = grid.height();
  const double pi = std::numbers::pi;
  std::vector<double> u(grid.size()), v(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Point c = grid.center(k);
    const double x = c.x - grid.x0();
    const double y = c.y - grid.y0();
    u[k] = amplitude * (pi / ly) * std::sin(pi * x / lx) * std::cos(pi * y / ly);
    v[k] = -amplitude * (pi / lx) * std::cos(pi * x / lx) * std::sin(pi * y / ly);
  }
  return VelocityField(grid, std::move(u), std::move(v));
}

VelocityField gen_channel_flow(const Grid& grid, double u_max) {
  if (!(u_max > 0.0) || !std::isfinite(u_max)) {
    throw ParameterError("channel u_max must be > 0, got " + format_double(u_max));
  }
  std::vector<double> u(grid.size()), v(grid.size(), 0.0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double yh = (grid.center(k).y - grid.y0()) / grid.height();
    u[k] = u_max * 4.0 * yh * (1.0 - yh);
  }
  return VelocityField(grid, std::move(u), std::move(v));
}

VelocityField parse_field(std::string_view text, const Grid& grid) {
  const std::size_t n = grid.size();
  std::vector<double> u, v;
  u.reserve(n);
  v.reserve(n);
  std::vector<std::uint8_t> mask(grid.obstruction_mask().begin(), grid.obstruction_mask().end());

  std::size_t pos = 0;
  int line_no = 0;
  bool header_seen = false;
  auto fail = [&](const std::string& msg) -> FormatError {
    return FormatError("line " + std::to_string(line_no) + ": " + msg);
  };
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (!header_seen) {
      const auto tok = split_ws(line);
      std::size_t hx = 0, hy = 0;
      if (tok.size() != 4 || tok[0] != "pffield" || tok[1] != "v1" || tok[2].rfind("nx=", 0) != 0 ||
          tok[3].rfind("ny=", 0) != 0 || !parse_size(std::string_view(tok[2]).substr(3), hx) ||
          !parse_size(std::string_view(tok[3]).substr(3), hy)) {
        throw fail("expected header 'pffield v1 nx=<nx> ny=<ny>'");
      }
      if (hx != grid.nx() || hy != grid.ny()) {
        throw fail("field is " + std::to_string(hx) + "x" + std::to_string(hy) + " but grid is " +
                   std::to_string(grid.nx()) + "x" + std::to_string(grid.ny()));
      }
      header_seen = true;
      continue;
    }
    std::string_view parts[3];
    std::size_t count = 0, start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        if (count < 3) parts[count] = line.substr(start, i - start);
        ++count;
        start = i + 1;
      }
    }
    if (count != 3) throw fail("expected 'k,u,v'");
    std::size_t k = 0;
    double uk = 0, vk = 0;
    if (!parse_size(parts[0], k)) throw fail("non-numeric cell index");
    if (!parse_double(parts[1], uk) || !parse_double(parts[2], vk)) {
      throw fail("non-numeric velocity");
    }
    if (!std::isfinite(uk) || !std::isfinite(vk)) throw fail("velocity is NaN or Inf");
    if (k != u.size()) {
      throw fail("expected cell index " + std::to_string(u.size()) + ", found " + std::to_string(k));
    }
    if (k >= n) throw fail("more than " + std::to_string(n) + " cells");
    u.push_back(uk);
    v.push_back(vk);
  }
  if (!header_seen) throw FormatError("empty field file");
  if (u.size() != n) {
    throw FormatError("expected " + std::to_string(n) + " cells, found " + std::to_string(u.size()));
  }
  VelocityField field(grid, std::move(u), std::move(v), std::move(mask));
  if (field.zeroed_count() > 0) {
    warn(std::to_string(field.zeroed_count()) +
         " obstructed cells had nonzero velocity in the field file; forced to zero");
  }
  return field;
}

VelocityField load_field(const std::filesystem::path& path, const Grid& grid) {
  try {
    return parse_field(read_text_file(path), grid);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string field_text(const VelocityField& field) {
  std::string out = "pffield v1 nx=" + std::to_string(field.grid().nx()) +
                    " ny=" + std::to_string(field.grid().ny()) + "\n";
  for (std::size_t k = 0; k < field.size(); ++k) {
    out += std::to_string(k);
    out += ',';
    out += format_double(field.u()[k]);
    out += ',';
    out += format_double(field.v()[k]);
    out += '\n';
  }
  return out;
}

void write_field(const VelocityField& field, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  out << field_text(field);
}

VelocityField map_to_reference(const VelocityField& src, const Grid& ref_grid) {
  const Grid& sg = src.grid();
  if (!sg.same_extent(ref_grid)) {
    throw GeometryError("source and reference grids cover different domains");
  }
  const std::size_t n = ref_grid.size();
  std::vector<double> u(n), v(n);
  std::vector<std::uint8_t> mask(n, 0);
  for (std::size_t k = 0; k < n; ++k) {
    const Point c = ref_grid.center(k);
    const std::size_t s = sg.locate(c.x, c.y);
    if (src.obstructed(s) || ref_grid.obstructed(k)) {
      mask[k] = 1;
    } else {
      u[k] = src.u()[s];
      v[k] = src.v()[s];
    }
  }
  return VelocityField(ref_grid, std::move(u), std::move(v), std::move(mask));
}

}  // namespace pfplace
