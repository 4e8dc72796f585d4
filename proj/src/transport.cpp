#include "pfplace/transport.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>

#include "pfplace/error.hpp"
#include "pfplace/keyvalue.hpp"

namespace pfplace {

DensityVector::DensityVector(std::size_t n, double fill) : values_(n, fill) {}

DensityVector::DensityVector(std::vector<double> values) : values_(std::move(values)) {
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      throw ParameterError("density entry " + std::to_string(k) + " is not finite");
    }
  }
}

DensityVector DensityVector::delta(std::size_t n, std::size_t k, double mass) {
  if (k >= n) throw IndexError("delta index " + std::to_string(k) + " >= " + std::to_string(n));
  DensityVector d(n);
  d[k] = mass;
  return d;
}

double DensityVector::total() const {
  double s = 0.0;
  for (double x : values_) s += x;
  return s;
}

double DensityVector::abs_total() const {
  double s = 0.0;
  for (double x : values_) s += std::abs(x);
  return s;
}

void DensityVector::clamp_negative(double tol) {
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (values_[k] < 0.0) {
      if (values_[k] < -tol) {
        throw ConservationError("density entry " + std::to_string(k) + " = " +
                                format_double(values_[k]) + " is negative");
      }
      values_[k] = 0.0;
    }
  }
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("l1_distance: size mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
  return s;
}

void SourceTerm::validate(std::size_t cell_count) const {
  for (const auto& [cell, rate] : cell_rates) {
    if (cell >= cell_count) {
      throw IndexError("source cell " + std::to_string(cell) + " >= " + std::to_string(cell_count));
    }
    if (!(rate >= 0.0) || !std::isfinite(rate)) {
      throw ParameterError("source rate at cell " + std::to_string(cell) + " must be >= 0");
    }
  }
}

double cfl_dt(const VelocityField& field, double diffusivity, const TransportOptions& options) {
  const Grid& g = field.grid();
  const double rate = field.max_abs_u() / g.dx() + field.max_abs_v() / g.dy() +
                      2.0 * diffusivity / (g.dx() * g.dx()) +
                      2.0 * diffusivity / (g.dy() * g.dy());
  if (rate == 0.0) return options.dt_cap;
  return options.cfl_safety / rate;
}

std::size_t substep_count(double duration, double max_dt) {
  const double ratio = duration / max_dt;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(ratio * (1.0 - 1e-12))));
}

namespace {

std::atomic<std::uint64_t> g_checks{0};
std::atomic<double> g_worst{0.0};

}  // namespace

ConservationStats conservation_stats() { return {g_checks.load(), g_worst.load()}; }

void check_conservation(double initial, double final_mass, double exited, double injected,
                        double scale, std::string_view where) {
  const double residual = final_mass + exited - injected - initial;
  g_checks.fetch_add(1);
  if (scale > 0.0) {
    const double rel = std::abs(residual) / scale;
    double seen = g_worst.load();
    while (rel > seen && !g_worst.compare_exchange_weak(seen, rel)) {
    }
  }
  if (scale > 0.0 && std::abs(residual) > 1e-10 * scale) {
    throw ConservationError(std::string(where) + ": mass balance off by " +
                            format_double(residual) + " (scale " + format_double(scale) + ")");
  }
}

namespace {

void check_inputs(const DensityVector& density, const VelocityField& field, double diffusivity) {
  if (density.size() != field.size()) {
    throw DimensionError("density has " + std::to_string(density.size()) + " cells, field has " +
                         std::to_string(field.size()));
  }
  if (!(diffusivity >= 0.0) || !std::isfinite(diffusivity)) {
    throw ParameterError("diffusivity must be >= 0");
  }
}

}  // namespace

StepResult step(const DensityVector& density, const VelocityField& field, double diffusivity,
                double dt, const SourceTerm& source, const TransportOptions& options) {
  check_inputs(density, field, diffusivity);
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("dt must be > 0");
  const double limit = cfl_dt(field, diffusivity, options);
  if (dt > limit * (1.0 + 1e-12)) {
    throw StabilityError("dt " + format_double(dt) + " exceeds CFL limit " + format_double(limit));
  }
  source.validate(field.size());

  const Grid& g = field.grid();
  const std::size_t nx = g.nx(), ny = g.ny();
  const auto u = field.u();
  const auto v = field.v();
  const double inlet = options.homogeneous ? 0.0 : g.inlet_value();

  std::vector<double> conc(density.size());
  for (std::size_t k = 0; k < conc.size(); ++k) conc[k] = density[k] / g.volume(k);

  StepResult r;
  r.density = density;
  auto& m = r.density;
  const double ax = g.dy() * dt;  // face length times dt, x-faces
  const double ay = g.dx() * dt;
  const double dcx = diffusivity / g.dx() * ax;
  const double dcy = diffusivity / g.dy() * ay;

  // Interior x-faces.
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 1; i < nx; ++i) {
      const std::size_t left = j * nx + i - 1, right = left + 1;
      if (field.obstructed(left) || field.obstructed(right)) continue;
      const double uf = 0.5 * (u[left] + u[right]);
      const double adv = uf > 0.0 ? uf * conc[left] : uf * conc[right];
      const double flux = adv * ax + dcx * (conc[left] - conc[right]);
      m[left] -= flux;
      m[right] += flux;
    }
  }
  // Interior y-faces.
  for (std::size_t j = 1; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t below = (j - 1) * nx + i, above = below + nx;
      if (field.obstructed(below) || field.obstructed(above)) continue;
      const double vf = 0.5 * (v[below] + v[above]);
      const double adv = vf > 0.0 ? vf * conc[below] : vf * conc[above];
      const double flux = adv * ay + dcy * (conc[below] - conc[above]);
      m[below] -= flux;
      m[above] += flux;
    }
  }

  // Open boundary faces. `inward` is the velocity component pointing into the
  // domain; `area` is face length times dt.
  auto boundary = [&](std::size_t k, BoundaryRole role, double inward, double area) {
    if (role == BoundaryRole::wall || field.obstructed(k)) return;
    if (inward > 0.0) {
      if (role == BoundaryRole::inlet && inlet > 0.0) {
        const double in = inward * inlet * area;
        m[k] += in;
        r.injected_mass += in;
      }
    } else if (inward < 0.0) {
      const double out = -inward * conc[k] * area;
      m[k] -= out;
      r.exited_mass += out;
    }
  };
  for (std::size_t j = 0; j < ny; ++j) {
    const std::size_t kl = j * nx, kr = j * nx + nx - 1;
    boundary(kl, g.boundary_role(Edge::left, j), u[kl], ax);
    boundary(kr, g.boundary_role(Edge::right, j), -u[kr], ax);
  }
  for (std::size_t i = 0; i < nx; ++i) {
    const std::size_t kb = i, kt = (ny - 1) * nx + i;
    boundary(kb, g.boundary_role(Edge::bottom, i), v[kb], ay);
    boundary(kt, g.boundary_role(Edge::top, i), -v[kt], ay);
  }

  for (const auto& [cell, rate] : source.cell_rates) {
    const double add = source.schedule == SourceSchedule::constant ? rate * dt : rate;
    m[cell] += add;
    r.injected_mass += add;
  }
  m.clamp_negative();
  return r;
}

SolveResult solve(const DensityVector& initial, const VelocityField& field, double diffusivity,
                  double t_end, const SourceTerm& source, const TransportOptions& options) {
  check_inputs(initial, field, diffusivity);
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ParameterError("t_end must be > 0");
  source.validate(field.size());
  const double max_dt = cfl_dt(field, diffusivity, options);

  std::vector<double> chunks;
  if (options.sync_interval > 0.0) {
    const double sync = options.sync_interval;
    const auto count = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(t_end / sync - 1e-9)));
    chunks.assign(count, sync);
    chunks.back() = t_end - static_cast<double>(count - 1) * sync;
  } else {
    chunks.push_back(t_end);
  }

  SolveResult result;
  result.density = initial;
  const SourceTerm none;
  for (double chunk : chunks) {
    const std::size_t n = substep_count(chunk, max_dt);
    const double dt = chunk / static_cast<double>(n);
    for (std::size_t s = 0; s < n; ++s) {
      const bool first = result.substeps == 0;
      const SourceTerm& src =
          (source.schedule == SourceSchedule::single_step && !first) ? none : source;
      StepResult r = step(result.density, field, diffusivity, dt, src, options);
      result.density = std::move(r.density);
      result.exited_mass += r.exited_mass;
      result.injected_mass += r.injected_mass;
      ++result.substeps;
    }
  }
  check_conservation(initial.total(), result.density.total(), result.exited_mass,
                     result.injected_mass,
                     initial.abs_total() + result.injected_mass + result.exited_mass, "solve");
  return result;
}

DensityVector parse_density(std::string_view text) {
  std::vector<double> values;
  std::size_t expected = 0;
  bool header_seen = false;
  int line_no = 0;
  std::size_t pos = 0;
  auto fail = [&](const std::string& msg) {
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
      if (tok.size() != 3 || tok[0] != "pfdensity" || tok[1] != "v1" || tok[2].rfind("n=", 0) != 0 ||
          !parse_size(std::string_view(tok[2]).substr(2), expected)) {
        throw fail("expected header 'pfdensity v1 n=<n>'");
      }
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    std::size_t k = 0;
    double value = 0;
    if (comma == std::string_view::npos || !parse_size(line.substr(0, comma), k) ||
        !parse_double(line.substr(comma + 1), value)) {
      throw fail("expected 'k,value'");
    }
    if (!std::isfinite(value)) throw fail("value is NaN or Inf");
    if (k != values.size()) throw fail("expected index " + std::to_string(values.size()));
    if (k >= expected) throw fail("more than " + std::to_string(expected) + " entries");
    values.push_back(value);
  }
  if (!header_seen) throw FormatError("empty density file");
  if (values.size() != expected) {
    throw FormatError("expected " + std::to_string(expected) + " entries, found " +
                      std::to_string(values.size()));
  }
  return DensityVector(std::move(values));
}

DensityVector load_density(const std::filesystem::path& path) {
  try {
    return parse_density(read_text_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string density_text(const DensityVector& density) {
  std::string out = "pfdensity v1 n=" + std::to_string(density.size()) + "\n";
  for (std::size_t k = 0; k < density.size(); ++k) {
    out += std::to_string(k);
    out += ',';
    out += format_double(density[k]);
    out += '\n';
  }
  return out;
}

void write_density(const DensityVector& density, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  out << density_text(density);
}

}  // namespace pfplace
