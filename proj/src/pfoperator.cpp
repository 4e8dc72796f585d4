#include "pfplace/pfoperator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pfplace/container.hpp"
#include "pfplace/error.hpp"
#include "pfplace/keyvalue.hpp"
#include "pfplace/parallel.hpp"

namespace pfplace {

MarkovMatrix::MarkovMatrix(SparseMatrix matrix, double dt_markov, Provenance provenance)
    : matrix_(std::move(matrix)), dt_markov_(dt_markov), provenance_(std::move(provenance)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() < 2) {
    throw IntegrityError("Markov matrix must be square with at least one cell and a sink");
  }
  if (!(dt_markov_ > 0.0) || !std::isfinite(dt_markov_)) {
    throw IntegrityError("Markov time step must be > 0");
  }
  for (std::size_t i = 0; i < matrix_.rows(); ++i) {
    const auto r = matrix_.row(i);
    double sum = 0.0;
    for (double v : r.values) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw IntegrityError("row " + std::to_string(i) + " has a negative or non-finite entry");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-10) {
      throw IntegrityError("row " + std::to_string(i) + " sums to " + format_double(sum));
    }
  }
  const auto s = matrix_.row(sink());
  if (s.size() != 1 || s.cols[0] != sink() || s.values[0] != 1.0) {
    throw IntegrityError("sink row must be a unit self-loop");
  }
}

void sparsify_row(std::vector<SparseEntry>& row, double floor) {
  std::erase_if(row, [floor](const SparseEntry& e) { return e.value < floor; });
  double kept = 0.0;
  for (const auto& e : row) kept += e.value;
  if (kept <= 0.0) return;
  for (auto& e : row) e.value /= kept;
}

MarkovMatrix build(const VelocityField& field, double diffusivity, double dt_markov,
                   const BuildOptions& options) {
  if (!(dt_markov > 0.0) || !std::isfinite(dt_markov)) {
    throw ParameterError("dt_markov must be > 0");
  }
  const std::size_t n = field.size();
  const std::size_t sink = n;
  TransportOptions transport = options.transport;
  transport.homogeneous = true;
  transport.sync_interval = 0.0;

  std::vector<std::vector<SparseEntry>> rows(n + 1);
  parallel_for(n, options.threads, [&](std::size_t k) {
    auto& row = rows[k];
    if (field.obstructed(k)) {
      row.push_back({static_cast<std::uint32_t>(k), 1.0});
      return;
    }
    SolveResult r;
    try {
      r = solve(DensityVector::delta(n, k), field, diffusivity, dt_markov, {}, transport);
    } catch (const Error& e) {
      rethrow_with_context(e, "building row " + std::to_string(k));
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (r.density[j] > 0.0) row.push_back({static_cast<std::uint32_t>(j), r.density[j]});
    }
    if (r.exited_mass > 0.0) row.push_back({static_cast<std::uint32_t>(sink), r.exited_mass});
    sparsify_row(row, options.sparsity_floor);
  });
  rows[sink].push_back({static_cast<std::uint32_t>(sink), 1.0});

  Provenance prov{field.grid().hash(), field.hash(), diffusivity, kTransportScheme};
  return MarkovMatrix(SparseMatrix::from_rows(n + 1, n + 1, std::move(rows)), dt_markov, prov);
}

namespace {

void check_state(const DensityVector& state, const MarkovMatrix& P) {
  if (state.size() != P.n_states()) {
    throw DimensionError("state has " + std::to_string(state.size()) + " entries, operator has " +
                         std::to_string(P.n_states()) + " states");
  }
}

}  // namespace

DensityVector propagate(const DensityVector& state, const MarkovMatrix& P, std::size_t steps,
                        const SourceTerm& source) {
  check_state(state, P);
  source.validate(P.cell_count());
  std::vector<double> x(state.values().begin(), state.values().end());
  std::vector<double> y(x.size());
  double injected = 0.0;
  for (std::size_t s = 0; s < steps; ++s) {
    P.matrix().left_multiply(x, y);
    if (source.schedule == SourceSchedule::constant || s == 0) {
      for (const auto& [cell, rate] : source.cell_rates) {
        const double add =
            source.schedule == SourceSchedule::constant ? rate * P.dt_markov() : rate;
        y[cell] += add;
        injected += add;
      }
    }
    x.swap(y);
  }
  DensityVector out(std::move(x));
  check_conservation(state.total(), out.total(), 0.0, injected, state.abs_total() + injected,
                     "propagate");
  return out;
}

std::vector<DensityVector> propagate_batch(std::span<const DensityVector> states,
                                           const MarkovMatrix& P, std::size_t steps) {
  const std::size_t batch = states.size();
  const std::size_t n = P.n_states();
  if (batch == 0) return {};
  for (const auto& s : states) check_state(s, P);
  std::vector<double> x(n * batch), y(n * batch);
  for (std::size_t t = 0; t < batch; ++t) {
    for (std::size_t i = 0; i < n; ++i) x[i * batch + t] = states[t][i];
  }
  // Gather form: each output row stays in cache while its inputs stream in.
  const SparseMatrix pt = P.matrix().transpose();
  for (std::size_t s = 0; s < steps; ++s) {
    pt.multiply_batch(x, y, batch);
    x.swap(y);
  }
  std::vector<DensityVector> out;
  out.reserve(batch);
  for (std::size_t t = 0; t < batch; ++t) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = x[i * batch + t];
    out.emplace_back(std::move(v));
    check_conservation(states[t].total(), out.back().total(), 0.0, 0.0, states[t].abs_total(),
                       "propagate_batch");
  }
  return out;
}

DensityVector with_sink(const DensityVector& density) {
  std::vector<double> v(density.values().begin(), density.values().end());
  v.push_back(0.0);
  return DensityVector(std::move(v));
}

SensorConfig::SensorConfig(std::vector<std::size_t> cells, std::size_t cell_count)
    : cells_(std::move(cells)), cell_count_(cell_count) {
  std::vector<std::size_t> sorted = cells_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ParameterError("sensor cells must be distinct");
  }
  if (!sorted.empty() && sorted.back() >= cell_count_) {
    throw IndexError("sensor cell " + std::to_string(sorted.back()) + " >= " +
                     std::to_string(cell_count_));
  }
}

std::vector<double> observe(const DensityVector& state, const SensorConfig& config) {
  if (state.size() < config.cell_count()) {
    throw DimensionError("state shorter than the sensor configuration's grid");
  }
  std::vector<double> y;
  y.reserve(config.size());
  for (std::size_t c : config.cells()) y.push_back(state[c]);
  return y;
}

void save(const MarkovMatrix& P, const std::filesystem::path& path) {
  ContainerHeader h;
  h.kind = "markov";
  h.dt_markov = P.dt_markov();
  h.diffusivity = P.provenance().diffusivity;
  h.scheme = P.provenance().scheme;
  h.grid_hash = P.provenance().grid_hash;
  h.field_hash = P.provenance().field_hash;
  write_container(path, h, P.matrix());
}

MarkovMatrix load(const std::filesystem::path& path, const std::optional<Provenance>& expected) {
  Container c = read_container(path);
  if (c.header.kind != "markov") {
    throw IntegrityError(path.string() + ": expected kind 'markov', found '" + c.header.kind + "'");
  }
  Provenance prov{c.header.grid_hash, c.header.field_hash, c.header.diffusivity, c.header.scheme};
  if (expected && !(*expected == prov)) {
    throw IntegrityError(path.string() + ": provenance does not match the expected grid/field");
  }
  try {
    return MarkovMatrix(std::move(c.matrix), c.header.dt_markov, prov);
  } catch (const IntegrityError& e) {
    throw IntegrityError(path.string() + ": " + e.what());
  }
}

}  // namespace pfplace
