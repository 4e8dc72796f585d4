#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pfplace/flowfield.hpp"
#include "pfplace/grid.hpp"

namespace pfplace {

// Contaminant mass per cell (the cell average times the cell volume). Markov
// states use the same type with one extra trailing entry for the sink.
class DensityVector {
 public:
  DensityVector() = default;
  explicit DensityVector(std::size_t n, double fill = 0.0);
  explicit DensityVector(std::vector<double> values);

  static DensityVector delta(std::size_t n, std::size_t k, double mass = 1.0);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  double& operator[](std::size_t k) { return values_[k]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  const std::vector<double>& vector() const { return values_; }

  double total() const;
  double abs_total() const;

  // Zeroes entries in [-tol, 0). Entries below -tol raise ConservationError.
  void clamp_negative(double tol = 1e-12);

  bool operator==(const DensityVector&) const = default;

 private:
  std::vector<double> values_;
};

double l1_distance(std::span<const double> a, std::span<const double> b);

enum class SourceSchedule { constant, single_step };

// Release rates per cell. constant: mass per second, integrated over every
// step. single_step: the listed masses are injected once, after the first step.
struct SourceTerm {
  std::vector<std::pair<std::size_t, double>> cell_rates;
  SourceSchedule schedule = SourceSchedule::constant;

  bool empty() const { return cell_rates.empty(); }
  void validate(std::size_t cell_count) const;
};

struct TransportOptions {
  double cfl_safety = 0.5;
  double dt_cap = 1.0;  // returned by cfl_dt for a quiescent, non-diffusive setup
  // When > 0, solve() never lets a substep straddle a multiple of this interval,
  // which reproduces the time discretization of an operator built with
  // dt_markov == sync_interval.
  double sync_interval = 0.0;
  // Treat inlet faces as carrying zero concentration (the Markov operator is
  // the homogeneous part of the dynamics; inlet loading is a source).
  bool homogeneous = false;
};

double cfl_dt(const VelocityField& field, double diffusivity, const TransportOptions& options = {});

struct StepResult {
  DensityVector density;
  double exited_mass = 0.0;
  double injected_mass = 0.0;
};

// One explicit Euler finite-volume step: first-order upwind advection with face
// velocity = mean of the adjacent cell centres, central diffusion, zero flux on
// walls and obstruction faces, inflow of the grid's inlet value on inlet faces
// and upwind outflow through inlet/outlet faces. Throws StabilityError if dt
// exceeds cfl_dt.
StepResult step(const DensityVector& density, const VelocityField& field, double diffusivity,
                double dt, const SourceTerm& source = {}, const TransportOptions& options = {});

struct SolveResult {
  DensityVector density;
  double exited_mass = 0.0;
  double injected_mass = 0.0;
  std::size_t substeps = 0;
};

// Integrates to t_end with equal substeps no longer than cfl_dt. Verifies that
// interior + exited - injected mass matches the initial mass to 1e-10 relative.
SolveResult solve(const DensityVector& initial, const VelocityField& field, double diffusivity,
                  double t_end, const SourceTerm& source = {}, const TransportOptions& options = {});

// Number of equal substeps used to cover `duration` under the CFL limit.
std::size_t substep_count(double duration, double max_dt);

// Raises ConservationError when |final + exited - injected - initial| exceeds
// 1e-10 of the mass scale.
void check_conservation(double initial, double final_mass, double exited, double injected,
                        double scale, std::string_view where);

// Process-wide tally of check_conservation calls and the largest relative
// residual seen (|residual| / scale).
struct ConservationStats {
  std::uint64_t checks = 0;
  double worst_relative = 0.0;
};
ConservationStats conservation_stats();

// Density files: "pfdensity v1 n=<n>" then n lines "k,value".
DensityVector parse_density(std::string_view text);
DensityVector load_density(const std::filesystem::path& path);
std::string density_text(const DensityVector& density);
void write_density(const DensityVector& density, const std::filesystem::path& path);

}  // namespace pfplace
