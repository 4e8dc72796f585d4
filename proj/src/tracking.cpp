#include "pfplace/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>

#include "pfplace/container.hpp"
#include "pfplace/error.hpp"
#include "pfplace/keyvalue.hpp"
#include "pfplace/parallel.hpp"

namespace pfplace {

std::string_view to_string(TrackingKind kind) {
  switch (kind) {
    case TrackingKind::real: return "tracking-real";
    case TrackingKind::binary: return "tracking-binary";
    case TrackingKind::volume_weighted: return "tracking-volume-weighted";
  }
  return "?";
}

TrackingMatrix::TrackingMatrix(TrackingKind kind, SparseMatrix matrix, std::size_t steps,
                               double dt_markov, double eps_acc, std::vector<double> sink_exposure,
                               bool sink_column)
    : kind_(kind),
      matrix_(std::move(matrix)),
      steps_(steps),
      dt_markov_(dt_markov),
      eps_acc_(eps_acc),
      sink_exposure_(std::move(sink_exposure)),
      sink_column_(sink_column) {
  if (!sink_exposure_.empty() && sink_exposure_.size() != matrix_.rows()) {
    throw DimensionError("sink exposure length does not match tracking rows");
  }
  for (double v : matrix_.values()) {
    if (!(v >= 0.0)) throw IntegrityError("tracking matrix has a negative entry");
    if (kind_ == TrackingKind::binary && v != 1.0) {
      throw IntegrityError("binary tracking matrix has an entry other than 1");
    }
  }
}

HorizonSteps snap_horizon(double tau, double dt_markov) {
  if (!(tau >= 0.0) || !(dt_markov > 0.0)) {
    throw ParameterError("horizon needs tau >= 0 and dt_markov > 0");
  }
  HorizonSteps h;
  h.steps = static_cast<std::size_t>(std::llround(tau / dt_markov));
  h.tau = static_cast<double>(h.steps) * dt_markov;
  h.snapped = std::abs(h.tau - tau) > 1e-9 * std::max(1.0, tau);
  if (h.snapped) {
    warn("horizon tau=" + format_double(tau) + " snapped to " + format_double(h.tau) + " (" +
         std::to_string(h.steps) + " Markov steps)");
  }
  return h;
}

namespace {

// Sparse accumulation of e_i (I + P + ... + P^m) with dense scratch rows.
class RowAccumulator {
 public:
  explicit RowAccumulator(std::size_t n)
      : cur_(n, 0.0), next_(n, 0.0), acc_(n, 0.0), in_next_(n, 0), in_acc_(n, 0) {}

  void run(const SparseMatrix& P, std::size_t i, std::size_t steps) {
    for (std::size_t j : touched_) {
      acc_[j] = 0.0;
      in_acc_[j] = 0;
    }
    touched_.assign(1, i);
    in_acc_[i] = 1;
    acc_[i] = 1.0;
    cur_idx_.assign(1, i);
    cur_[i] = 1.0;
    for (std::size_t s = 0; s < steps; ++s) {
      next_idx_.clear();
      for (std::size_t k : cur_idx_) {
        const double x = cur_[k];
        cur_[k] = 0.0;
        const auto r = P.row(k);
        for (std::size_t e = 0; e < r.size(); ++e) {
          const std::size_t j = r.cols[e];
          if (!in_next_[j]) {
            in_next_[j] = 1;
            next_idx_.push_back(j);
          }
          next_[j] += x * r.values[e];
        }
      }
      std::sort(next_idx_.begin(), next_idx_.end());
      for (std::size_t j : next_idx_) {
        in_next_[j] = 0;
        if (!in_acc_[j]) {
          in_acc_[j] = 1;
          touched_.push_back(j);
        }
        acc_[j] += next_[j];
      }
      cur_idx_.swap(next_idx_);
      cur_.swap(next_);
    }
    for (std::size_t k : cur_idx_) cur_[k] = 0.0;
    std::sort(touched_.begin(), touched_.end());
  }

  const std::vector<std::size_t>& touched() const { return touched_; }
  double acc(std::size_t j) const { return acc_[j]; }

 private:
  std::vector<double> cur_, next_, acc_;
  std::vector<std::uint8_t> in_next_, in_acc_;
  std::vector<std::size_t> cur_idx_, next_idx_, touched_;
};

template <class Keep>
TrackingMatrix accumulate(const MarkovMatrix& P, std::size_t steps, TrackingKind kind,
                          double eps_acc, const TrackingOptions& options, Keep keep) {
  const std::size_t n = P.cell_count();
  const std::size_t sink = P.sink();
  const std::size_t cols = options.include_sink_column ? n + 1 : n;
  std::vector<std::vector<SparseEntry>> rows(n);
  std::vector<double> sink_exposure(n, 0.0);
  const unsigned threads = resolve_threads(options.threads);
  const std::size_t block = (n + threads - 1) / std::max(1u, threads);
  parallel_for(threads, threads, [&](std::size_t t) {
    RowAccumulator accumulator(P.n_states());
    for (std::size_t i = t * block; i < std::min(n, (t + 1) * block); ++i) {
      accumulator.run(P.matrix(), i, steps);
      for (std::size_t j : accumulator.touched()) {
        const double value = accumulator.acc(j);
        if (j == sink) {
          sink_exposure[i] = value;
          if (!options.include_sink_column) continue;
        }
        if (auto v = keep(value)) rows[i].push_back({static_cast<std::uint32_t>(j), *v});
      }
    }
  });
  return TrackingMatrix(kind, SparseMatrix::from_rows(n, cols, std::move(rows)), steps,
                        P.dt_markov(), eps_acc, std::move(sink_exposure),
                        options.include_sink_column);
}

struct KeepReal {
  std::optional<double> operator()(double v) const {
    return v > 0.0 ? std::optional<double>(v) : std::nullopt;
  }
};

struct KeepAbove {
  double eps;
  std::optional<double> operator()(double v) const {
    return v > eps ? std::optional<double>(1.0) : std::nullopt;
  }
};

TrackingMatrix map_entries(const TrackingMatrix& q, TrackingKind kind, double eps_acc,
                           const auto& fn) {
  const auto& m = q.matrix();
  std::vector<std::vector<SparseEntry>> rows(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    for (std::size_t e = 0; e < r.size(); ++e) {
      if (auto v = fn(i, r.cols[e], r.values[e])) rows[i].push_back({r.cols[e], *v});
    }
  }
  return TrackingMatrix(kind, SparseMatrix::from_rows(m.rows(), m.cols(), std::move(rows)),
                        q.steps(), q.dt_markov(), eps_acc, q.sink_exposure(), q.has_sink_column());
}

void check_cells(const TrackingMatrix& q, const CellSet& cells, std::size_t extent) {
  if (!cells.empty() && cells.indices().back() >= extent) {
    throw IndexError("cell " + std::to_string(cells.indices().back()) +
                     " outside tracking matrix of extent " + std::to_string(extent));
  }
  (void)q;
}

}  // namespace

TrackingMatrix tracking_matrix(const MarkovMatrix& P, std::size_t steps,
                               const TrackingOptions& options) {
  return accumulate(P, steps, TrackingKind::real, 0.0, options, KeepReal{});
}

TrackingMatrix tracking_pattern(const MarkovMatrix& P, std::size_t steps, double eps_acc,
                                const TrackingOptions& options) {
  if (!(eps_acc >= 0.0)) throw ParameterError("eps_acc must be >= 0");
  return accumulate(P, steps, TrackingKind::binary, eps_acc, options, KeepAbove{eps_acc});
}

TrackingMatrix threshold(const TrackingMatrix& q, double eps_acc) {
  if (!(eps_acc >= 0.0)) throw ParameterError("eps_acc must be >= 0");
  if (q.kind() != TrackingKind::real) {
    throw ParameterError("threshold expects a real-valued tracking matrix");
  }
  return map_entries(q, TrackingKind::binary, eps_acc,
                     [eps_acc](std::size_t, std::uint32_t, double v) -> std::optional<double> {
                       return v > eps_acc ? std::optional<double>(1.0) : std::nullopt;
                     });
}

TrackingMatrix apply_location_constraint(const TrackingMatrix& q, const CellSet& forbidden) {
  check_cells(q, forbidden, q.cols());
  std::vector<std::uint8_t> blocked(q.cols(), 0);
  for (std::size_t c : forbidden) blocked[c] = 1;
  return map_entries(q, q.kind(), q.eps_acc(),
                     [&](std::size_t, std::uint32_t j, double v) -> std::optional<double> {
                       return blocked[j] ? std::nullopt : std::optional<double>(v);
                     });
}

TrackingMatrix apply_sensing_constraint(const TrackingMatrix& q, const CellSet& unmonitored) {
  check_cells(q, unmonitored, q.rows());
  std::vector<std::uint8_t> blocked(q.rows(), 0);
  for (std::size_t c : unmonitored) blocked[c] = 1;
  return map_entries(q, q.kind(), q.eps_acc(),
                     [&](std::size_t i, std::uint32_t, double v) -> std::optional<double> {
                       return blocked[i] ? std::nullopt : std::optional<double>(v);
                     });
}

TrackingMatrix volume_weight(const TrackingMatrix& q, const Grid& grid) {
  const std::size_t n = grid.size();
  if (q.rows() != n || q.cols() != n + (q.has_sink_column() ? 1 : 0)) {
    throw DimensionError("tracking matrix does not match the grid");
  }
  std::vector<double> weight(q.cols());
  for (std::size_t j = 0; j < n; ++j) weight[j] = grid.volume(j) / grid.total_volume();
  if (q.has_sink_column()) weight[n] = 1.0 / static_cast<double>(n);
  return map_entries(q, TrackingKind::volume_weighted, q.eps_acc(),
                     [&](std::size_t, std::uint32_t j, double v) -> std::optional<double> {
                       return v * weight[j];
                     });
}

void save(const TrackingMatrix& q, const std::filesystem::path& path) {
  ContainerHeader h;
  h.kind = std::string(to_string(q.kind()));
  if (q.has_sink_column()) h.kind += "+sink";
  h.dt_markov = q.dt_markov();
  h.steps = q.steps();
  h.eps_acc = q.eps_acc();
  write_container(path, h, q.matrix());
}

TrackingMatrix load_tracking(const std::filesystem::path& path) {
  Container c = read_container(path);
  std::string kind = c.header.kind;
  bool sink_column = false;
  if (kind.size() > 5 && kind.ends_with("+sink")) {
    sink_column = true;
    kind.resize(kind.size() - 5);
  }
  TrackingKind k;
  if (kind == to_string(TrackingKind::real)) k = TrackingKind::real;
  else if (kind == to_string(TrackingKind::binary)) k = TrackingKind::binary;
  else if (kind == to_string(TrackingKind::volume_weighted)) k = TrackingKind::volume_weighted;
  else throw IntegrityError(path.string() + ": not a tracking matrix (kind '" + c.header.kind + "')");
  try {
    return TrackingMatrix(k, std::move(c.matrix), c.header.steps, c.header.dt_markov,
                          c.header.eps_acc, {}, sink_column);
  } catch (const Error& e) {
    throw IntegrityError(path.string() + ": " + e.what());
  }
}

void write_bitset(const TrackingMatrix& q, const std::filesystem::path& path) {
  const std::size_t rows = q.rows(), cols = q.cols();
  std::vector<std::uint8_t> bytes((rows * cols + 7) / 8, 0);
  for (std::size_t i = 0; i < rows; ++i) {
    const auto r = q.matrix().row(i);
    for (std::size_t e = 0; e < r.size(); ++e) {
      if (r.values[e] == 0.0) continue;
      const std::size_t bit = i * cols + r.cols[e];
      bytes[bit / 8] |= static_cast<std::uint8_t>(1u << (bit % 8));
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  out.write("PFBITS1\n", 8);
  auto put_u64 = [&](std::uint64_t v) {
    unsigned char b[8];
    for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(v >> (8 * k));
    out.write(reinterpret_cast<const char*>(b), 8);
  };
  put_u64(rows);
  put_u64(cols);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<std::uint8_t> read_bitset(const std::filesystem::path& path, std::size_t& rows,
                                      std::size_t& cols) {
  const std::string data = read_text_file(path);
  if (data.size() < 24 || data.compare(0, 8, "PFBITS1\n") != 0) {
    throw FormatError(path.string() + ": not a PFBITS1 file");
  }
  auto get_u64 = [&](std::size_t offset) {
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data[offset + k])) << (8 * k);
    }
    return v;
  };
  rows = get_u64(8);
  cols = get_u64(16);
  const std::size_t expected = (rows * cols + 7) / 8;
  if (data.size() != 24 + expected) throw FormatError(path.string() + ": truncated bitset");
  std::vector<std::uint8_t> bits(rows * cols);
  for (std::size_t b = 0; b < bits.size(); ++b) {
    bits[b] = (static_cast<unsigned char>(data[24 + b / 8]) >> (b % 8)) & 1u;
  }
  return bits;
}

}  // namespace pfplace
