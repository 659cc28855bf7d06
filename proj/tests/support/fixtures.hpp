#pragma once

#include <random>
#include <string>
#include <vector>

#include "resfault/data_model.hpp"

namespace fixture {

using resfault::Index;
using resfault::MatrixXd;

inline std::vector<std::string> names(const std::string& prefix, Index n) {
  std::vector<std::string> out;
  for (Index i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i + 1));
  return out;
}

inline MatrixXd random_matrix(Index rows, Index cols, std::uint64_t seed, double sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sd);
  MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

/// `rows_per_cycle` rows for each cycle 1..n_cycles with random readings.
inline resfault::UnitSeries series(int unit_id, int n_cycles, int rows_per_cycle, Index nw = 2, Index nx = 3,
                                   std::uint64_t seed = 1) {
  const Index T = static_cast<Index>(n_cycles) * rows_per_cycle;
  std::vector<int> cyc;
  for (int c = 1; c <= n_cycles; ++c)
    for (int r = 0; r < rows_per_cycle; ++r) cyc.push_back(c);
  return {unit_id, "d", random_matrix(T, nw, seed), random_matrix(T, nx, seed + 1000), cyc, names("w", nw),
          names("x", nx)};
}

}  // namespace fixture

#include "resfault/synth.hpp"

namespace fixture {

/// Residuals a perfect operating-condition model would produce: readings
/// mapped back to latent units minus the noise-free map output.
inline MatrixXd oracle_residual(const resfault::GeneratedUnit& unit, const resfault::SynthConfig& cfg) {
  const resfault::SensorMap map(cfg.map_seed);
  const MatrixXd offset = map.to_physical(MatrixXd::Zero(1, unit.series.n_x()));
  MatrixXd latent = unit.series.x().rowwise() - offset.row(0);
  latent.array().rowwise() /= map.span().transpose().array();
  return latent - map.latent(unit.series.w());
}

}  // namespace fixture
