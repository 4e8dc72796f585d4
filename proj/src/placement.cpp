#include "pfplace/placement.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>

#include "pfplace/error.hpp"
#include "pfplace/keyvalue.hpp"

namespace pfplace {

double observability(const TrackingMatrix& q, const SensorConfig& config, std::size_t k) {
  if (k >= q.rows()) throw IndexError("release cell " + std::to_string(k) + " out of range");
  double o = 0.0;
  for (std::size_t s : config.cells()) {
    if (s >= q.cols()) throw IndexError("sensor cell " + std::to_string(s) + " out of range");
    o += q.matrix().at(k, s);
  }
  return o;
}

ReleaseScenario ReleaseScenario::all(std::size_t n) {
  ReleaseScenario r;
  r.rows.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.rows[i] = i;
  return r;
}

ReleaseScenario ReleaseScenario::from(const CellSet& cells) { return {cells.indices()}; }

ReleaseScenario ReleaseScenario::single(std::size_t a) { return {{a}}; }

namespace {

std::vector<double> row_weights(std::span<const double> volumes, std::size_t rows) {
  if (volumes.empty()) return std::vector<double>(rows, 1.0);
  if (volumes.size() != rows) throw DimensionError("release volume count does not match rows");
  return {volumes.begin(), volumes.end()};
}

std::vector<std::uint8_t> scenario_mask(const ReleaseScenario& scenario, std::size_t rows) {
  std::vector<std::uint8_t> active(rows, 0);
  for (std::size_t r : scenario.rows) {
    if (r >= rows) throw IndexError("scenario row " + std::to_string(r) + " out of range");
    active[r] = 1;
  }
  return active;
}

void finish(PlacementResult& result, const std::vector<std::uint8_t>& in_scenario,
            const std::vector<std::uint8_t>& covered, const std::vector<double>& weights) {
  double total = 0.0, hit = 0.0;
  for (std::size_t r = 0; r < in_scenario.size(); ++r) {
    if (!in_scenario[r]) continue;
    total += weights[r];
    if (covered[r]) {
      hit += weights[r];
    } else {
      result.uncovered.push_back(r);
    }
  }
  result.covered_fraction = total > 0.0 ? hit / total : 0.0;
}

}  // namespace

PlacementResult greedy_place(const TrackingMatrix& q, std::size_t p,
                             const ReleaseScenario& scenario,
                             std::span<const double> release_volumes) {
  if (p < 1) throw ParameterError("sensor count must be >= 1");
  const auto& m = q.matrix();
  const auto weights = row_weights(release_volumes, m.rows());
  const auto in_scenario = scenario_mask(scenario, m.rows());
  std::vector<std::uint8_t> active = in_scenario;
  std::vector<std::uint8_t> covered(m.rows(), 0), chosen(m.cols(), 0);

  PlacementResult result;
  result.requested = p;
  std::vector<double> score(m.cols());
  for (std::size_t round = 0; round < p; ++round) {
    std::fill(score.begin(), score.end(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
      if (!active[r]) continue;
      const auto row = m.row(r);
      for (std::size_t e = 0; e < row.size(); ++e) score[row.cols[e]] += row.values[e];
    }
    std::size_t best = m.cols();
    double best_score = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (!chosen[j] && score[j] > best_score) {
        best = j;
        best_score = score[j];
      }
    }
    if (best == m.cols()) {
      result.early_stop = true;
      break;
    }
    chosen[best] = 1;
    std::vector<std::size_t> fresh;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      if (active[r] && m.at(r, best) > 0.0) {
        active[r] = 0;
        covered[r] = 1;
        fresh.push_back(r);
      }
    }
    result.sensor_cells.push_back(best);
    result.scores.push_back(best_score);
    result.newly_covered.push_back(std::move(fresh));
  }
  finish(result, in_scenario, covered, weights);
  return result;
}

double coverage_fraction(const TrackingMatrix& q, std::span<const std::size_t> sensors,
                         const ReleaseScenario& scenario,
                         std::span<const double> release_volumes) {
  const auto& m = q.matrix();
  const auto weights = row_weights(release_volumes, m.rows());
  const auto in_scenario = scenario_mask(scenario, m.rows());
  double total = 0.0, hit = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (!in_scenario[r]) continue;
    total += weights[r];
    for (std::size_t s : sensors) {
      if (m.at(r, s) > 0.0) {
        hit += weights[r];
        break;
      }
    }
  }
  return total > 0.0 ? hit / total : 0.0;
}

PlacementResult brute_force_place(const TrackingMatrix& q, std::size_t p,
                                  const ReleaseScenario& scenario,
                                  std::span<const double> release_volumes) {
  if (p < 1) throw ParameterError("sensor count must be >= 1");
  const auto& m = q.matrix();
  const auto weights = row_weights(release_volumes, m.rows());
  const auto in_scenario = scenario_mask(scenario, m.rows());

  // Column -> covered scenario rows, as bitsets.
  const std::size_t words = (m.rows() + 63) / 64;
  std::vector<std::vector<std::uint64_t>> cover(m.cols(), std::vector<std::uint64_t>(words, 0));
  std::vector<std::uint8_t> useful(m.cols(), 0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (!in_scenario[r]) continue;
    const auto row = m.row(r);
    for (std::size_t e = 0; e < row.size(); ++e) {
      if (row.values[e] > 0.0) {
        cover[row.cols[e]][r / 64] |= std::uint64_t{1} << (r % 64);
        useful[row.cols[e]] = 1;
      }
    }
  }
  std::vector<std::size_t> admissible;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    if (useful[j]) admissible.push_back(j);
  }
  const std::size_t n = admissible.size();
  const std::size_t k = std::min(p, n);

  double combos = 1.0;
  for (std::size_t t = 0; t < k; ++t) {
    combos = combos * static_cast<double>(n - t) / static_cast<double>(t + 1);
  }
  if (combos > kBruteForceLimit) {
    throw PlacementError("brute force needs C(" + std::to_string(n) + "," + std::to_string(k) +
                         ") = " + format_double(std::round(combos)) +
                         " combinations, limit is 1e6");
  }

  auto weight_of = [&](const std::vector<std::uint64_t>& bits) {
    double w = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      if ((bits[r / 64] >> (r % 64)) & 1u) w += weights[r];
    }
    return w;
  };

  std::vector<std::size_t> best_combo;
  double best_weight = -1.0;
  std::vector<std::size_t> idx(k);
  for (std::size_t t = 0; t < k; ++t) idx[t] = t;
  std::vector<std::uint64_t> acc(words);
  while (k > 0) {
    std::fill(acc.begin(), acc.end(), 0);
    for (std::size_t t = 0; t < k; ++t) {
      const auto& c = cover[admissible[idx[t]]];
      for (std::size_t w = 0; w < words; ++w) acc[w] |= c[w];
    }
    const double w = weight_of(acc);
    if (w > best_weight) {
      best_weight = w;
      best_combo.clear();
      for (std::size_t t = 0; t < k; ++t) best_combo.push_back(admissible[idx[t]]);
    }
    // Next combination in lexicographic order.
    std::size_t t = k;
    while (t > 0 && idx[t - 1] == n - k + t - 1) --t;
    if (t == 0) break;
    ++idx[t - 1];
    for (std::size_t u = t; u < k; ++u) idx[u] = idx[u - 1] + 1;
  }

  PlacementResult result;
  result.requested = p;
  result.early_stop = k < p;
  std::vector<std::uint8_t> covered(m.rows(), 0);
  for (std::size_t s : best_combo) {
    std::vector<std::size_t> fresh;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      if (!covered[r] && ((cover[s][r / 64] >> (r % 64)) & 1u)) {
        covered[r] = 1;
        fresh.push_back(r);
      }
    }
    double score = 0.0;
    for (std::size_t r : fresh) score += weights[r];
    result.sensor_cells.push_back(s);
    result.scores.push_back(score);
    result.newly_covered.push_back(std::move(fresh));
  }
  finish(result, in_scenario, covered, weights);
  return result;
}

std::string placement_report(const PlacementResult& result, const Grid& grid) {
  std::ostringstream out;
  out << "pfplace placement v1\n";
  out << "requested " << result.requested << "\n";
  out << "placed " << result.sensor_cells.size() << "\n";
  for (std::size_t s = 0; s < result.sensor_cells.size(); ++s) {
    const std::size_t k = result.sensor_cells[s];
    out << "sensor " << (s + 1) << " cell " << k;
    if (k < grid.size()) {
      const auto c = grid.coords(k);
      const auto p = grid.center(k);
      out << " ij " << c.i << " " << c.j << " xy " << format_double(p.x) << " "
          << format_double(p.y);
    } else {
      out << " sink";
    }
    out << " newly_covered " << result.newly_covered[s].size() << " score "
        << format_double(result.scores[s]) << "\n";
  }
  if (result.early_stop) {
    out << "early_stop no remaining location observes an uncovered release\n";
  }
  out << "covered_fraction " << format_double(result.covered_fraction) << "\n";
  out << "uncovered " << result.uncovered.size();
  for (std::size_t k : result.uncovered) out << " " << k;
  out << "\n";
  return out.str();
}

}  // namespace pfplace
