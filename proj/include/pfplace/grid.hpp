#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pfplace {

enum class Edge : std::uint8_t { left, right, bottom, top };
enum class BoundaryRole : std::uint8_t { wall, inlet, outlet };

std::string_view to_string(Edge edge);
std::string_view to_string(BoundaryRole role);

struct CellCoords {
  std::size_t i = 0;
  std::size_t j = 0;
  bool operator==(const CellCoords&) const = default;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Inclusive cell range [first, last] along one domain edge. Positions count
// rows (j) on the left/right edges and columns (i) on the bottom/top edges.
struct BoundarySegment {
  Edge edge = Edge::left;
  std::size_t first = 0;
  std::size_t last = 0;
  BoundaryRole role = BoundaryRole::wall;
};

// Inclusive rectangle of cells (i0..i1, j0..j1).
struct CellRect {
  std::size_t i0 = 0, j0 = 0, i1 = 0, j1 = 0;
};

struct GridSpec {
  std::size_t nx = 1;
  std::size_t ny = 1;
  double dx = 1.0;
  double dy = 1.0;
  double x0 = 0.0;
  double y0 = 0.0;
  double inlet_value = 0.0;
  std::vector<BoundarySegment> boundaries;  // unlisted boundary faces are walls
  std::vector<CellRect> obstructions;
  std::vector<double> cell_volumes;  // empty: uniform dx*dy
};

// Uniform rectangular cell discretization. Cells are numbered k = j*nx + i.
// Immutable once built; share freely between threads.
class Grid {
 public:
  explicit Grid(const GridSpec& spec);
  static Grid uniform(std::size_t nx, std::size_t ny, double dx, double dy,
                      double x0 = 0.0, double y0 = 0.0);

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t size() const { return nx_ * ny_; }
  double dx() const { return dx_; }
  double dy() const { return dy_; }
  double x0() const { return x0_; }
  double y0() const { return y0_; }
  double width() const { return dx_ * static_cast<double>(nx_); }
  double height() const { return dy_ * static_cast<double>(ny_); }
  double inlet_value() const { return inlet_value_; }

  std::size_t index(std::size_t i, std::size_t j) const;
  CellCoords coords(std::size_t k) const;
  Point center(std::size_t k) const;

  // Cell containing (x, y). A point on a shared cell edge belongs to the
  // lower-index cell; points outside the domain raise GeometryError.
  std::size_t locate(double x, double y) const;

  double volume(std::size_t k) const { return volumes_[k]; }
  std::span<const double> volumes() const { return volumes_; }
  double total_volume() const { return total_volume_; }

  bool obstructed(std::size_t k) const { return obstructed_[k] != 0; }
  std::span<const std::uint8_t> obstruction_mask() const { return obstructed_; }
  std::size_t obstruction_count() const;

  BoundaryRole boundary_role(Edge edge, std::size_t position) const;
  std::size_t edge_length(Edge edge) const;

  // True if both grids cover the same physical extent (relative tol 1e-9).
  bool same_extent(const Grid& other) const;

  std::uint64_t hash() const;
  const GridSpec& spec() const { return spec_; }

  bool operator==(const Grid& other) const;

 private:
  GridSpec spec_;
  std::size_t nx_, ny_;
  double dx_, dy_, x0_, y0_, inlet_value_;
  std::vector<double> volumes_;
  double total_volume_ = 0.0;
  std::vector<std::uint8_t> obstructed_;
  std::vector<BoundaryRole> roles_[4];
};

// Sorted set of distinct cell indices, validated against a cell count.
class CellSet {
 public:
  CellSet() = default;
  CellSet(std::vector<std::size_t> indices, std::size_t cell_count);

  static CellSet all(std::size_t cell_count);
  static CellSet from_rects(const Grid& grid, std::span<const CellRect> rects);
  static CellSet obstructed(const Grid& grid);

  bool contains(std::size_t k) const;
  bool empty() const { return indices_.empty(); }
  std::size_t size() const { return indices_.size(); }
  std::size_t cell_count() const { return cell_count_; }
  const std::vector<std::size_t>& indices() const { return indices_; }
  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

  CellSet complement() const;
  CellSet united(const CellSet& other) const;

  bool operator==(const CellSet&) const = default;

 private:
  std::vector<std::size_t> indices_;
  std::size_t cell_count_ = 0;
};

// Grid config text: "nx = 16", "dx = 0.25", "origin = 0 0",
// "boundary = left 12 15 inlet", "obstruction = i0 j0 i1 j1", "inlet_value = 0".
// Every problem in the file is reported in one FormatError.
GridSpec parse_grid_config(std::string_view text);
Grid load_grid(const std::filesystem::path& path);
std::string grid_config_text(const GridSpec& spec);

}  // namespace pfplace
