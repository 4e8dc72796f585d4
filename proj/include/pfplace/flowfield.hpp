#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pfplace/grid.hpp"

namespace pfplace {

// Cell-centred velocity field bound to a grid. Obstructed cells always carry
// (0, 0); the obstruction mask starts from the grid's mask and may be widened
// by map_to_reference.
class VelocityField {
 public:
  VelocityField(Grid grid, std::vector<double> u, std::vector<double> v);
  VelocityField(Grid grid, std::vector<double> u, std::vector<double> v,
                std::vector<std::uint8_t> obstructed);

  static VelocityField zero(const Grid& grid);

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return u_.size(); }
  std::span<const double> u() const { return u_; }
  std::span<const double> v() const { return v_; }
  bool obstructed(std::size_t k) const { return obstructed_[k] != 0; }
  std::span<const std::uint8_t> obstruction_mask() const { return obstructed_; }

  double max_abs_u() const;
  double max_abs_v() const;
  double max_speed() const;

  // Obstructed cells that arrived with a nonzero velocity and were zeroed.
  std::size_t zeroed_count() const { return zeroed_; }

  std::uint64_t hash() const;
  bool operator==(const VelocityField& other) const;

 private:
  Grid grid_;
  std::vector<double> u_, v_;
  std::vector<std::uint8_t> obstructed_;
  std::size_t zeroed_ = 0;
};

// Recirculating field from psi = A sin(pi x/Lx) sin(pi y/Ly), with
// u = dpsi/dy and v = -dpsi/dx at cell centres (coordinates relative to the
// grid origin). amplitude == 0 gives the zero field; negative is rejected.
VelocityField gen_double_gyre(const Grid& grid, double amplitude);

// Left-to-right parabolic profile u = u_max * 4 yh (1 - yh), v = 0, where yh
// is the normalised height of the cell centre.
VelocityField gen_channel_flow(const Grid& grid, double u_max);

// "pffield v1 nx=<nx> ny=<ny>" followed by N lines "k,u,v" in ascending k.
VelocityField parse_field(std::string_view text, const Grid& grid);
VelocityField load_field(const std::filesystem::path& path, const Grid& grid);
std::string field_text(const VelocityField& field);
void write_field(const VelocityField& field, const std::filesystem::path& path);

// Piecewise-constant transfer onto ref_grid: each reference cell takes the
// velocity of the source cell containing its centre. Reference cells landing
// in a source obstruction (or obstructed on ref_grid itself) become obstructed
// with zero velocity.
VelocityField map_to_reference(const VelocityField& src, const Grid& ref_grid);

}  // namespace pfplace
