#include "resfault/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "resfault/error.hpp"

namespace resfault {

UnitSeries::UnitSeries(int unit_id, std::string dataset_id, MatrixXd w, MatrixXd x,
                       std::vector<int> cycle_of, std::vector<std::string> w_names,
                       std::vector<std::string> x_names)
    : unit_id_(unit_id),
      dataset_id_(std::move(dataset_id)),
      w_(std::move(w)),
      x_(std::move(x)),
      cycle_of_(std::move(cycle_of)),
      w_names_(std::move(w_names)),
      x_names_(std::move(x_names)) {
  if (w_.rows() < 1 || w_.rows() != x_.rows() ||
      static_cast<Index>(cycle_of_.size()) != w_.rows()) {
    throw Error(Errc::ShapeMismatch, "unit " + std::to_string(unit_id_) +
                                         ": w, x and cycle_of must share a row count >= 1");
  }
  if (w_.cols() < 1 || x_.cols() < 1) {
    throw Error(Errc::ShapeMismatch, "unit needs at least one descriptor and one sensor");
  }
  if (!std::is_sorted(cycle_of_.begin(), cycle_of_.end())) {
    throw Error(Errc::ShapeMismatch,
                "unit " + std::to_string(unit_id_) + ": cycle indices must be non-decreasing");
  }
  if (static_cast<Index>(w_names_.size()) != w_.cols() ||
      static_cast<Index>(x_names_.size()) != x_.cols()) {
    throw Error(Errc::ShapeMismatch, "channel name count does not match column count");
  }
}

MatrixXd UnitSeries::z() const {
  MatrixXd out(rows(), n_z());
  out << x_, w_;
  return out;
}

std::vector<std::string> UnitSeries::z_names() const {
  std::vector<std::string> names = x_names_;
  names.insert(names.end(), w_names_.begin(), w_names_.end());
  return names;
}

UnitSeries UnitSeries::select_rows(std::span<const Index> rows) const {
  MatrixXd w(static_cast<Index>(rows.size()), n_w());
  MatrixXd x(static_cast<Index>(rows.size()), n_x());
  std::vector<int> cyc(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Index r = rows[i];
    w.row(static_cast<Index>(i)) = w_.row(r);
    x.row(static_cast<Index>(i)) = x_.row(r);
    cyc[i] = cycle_of_[static_cast<std::size_t>(r)];
  }
  return UnitSeries(unit_id_, dataset_id_, std::move(w), std::move(x), std::move(cyc), w_names_,
                    x_names_);
}

UnitSeries UnitSeries::with_dataset_id(std::string dataset_id) const {
  UnitSeries copy = *this;
  copy.dataset_id_ = std::move(dataset_id);
  return copy;
}

std::vector<CycleView> cycles(const UnitSeries& series) {
  std::vector<CycleView> out;
  const auto& cyc = series.cycle_of();
  Index begin = 0;
  for (Index t = 1; t <= series.rows(); ++t) {
    if (t == series.rows() || cyc[static_cast<std::size_t>(t)] != cyc[static_cast<std::size_t>(begin)]) {
      out.push_back({cyc[static_cast<std::size_t>(begin)], begin, t});
      begin = t;
    }
  }
  return out;
}

void SplitSpec::validate() const {
  if (healthy_cycles_per_unit < 1) {
    throw Error(Errc::ConfigInvalid, "healthy_cycles_per_unit must be >= 1");
  }
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw Error(Errc::ConfigInvalid, "validation_fraction must lie in (0, 1)");
  }
}

Split split(std::span<const UnitSeries> fleet, const SplitSpec& spec) {
  spec.validate();
  Split out;
  SampleSet healthy;
  const auto n_healthy = static_cast<std::size_t>(spec.healthy_cycles_per_unit);
  for (std::size_t u = 0; u < fleet.size(); ++u) {
    const auto views = cycles(fleet[u]);
    if (views.size() <= n_healthy) {
      throw Error(Errc::UnitTooShort, "unit " + std::to_string(fleet[u].unit_id()) + " has " +
                                          std::to_string(views.size()) + " cycles, needs more than " +
                                          std::to_string(n_healthy));
    }
    const Index first_test = views[n_healthy].begin;
    out.first_test_row.push_back(first_test);
    for (Index r = 0; r < first_test; ++r) healthy.push_back({u, r});
    for (Index r = first_test; r < fleet[u].rows(); ++r) out.test.push_back({u, r});
  }

  const auto n = static_cast<long long>(healthy.size());
  long long n_val = std::llround(spec.validation_fraction * static_cast<double>(n));
  if (n >= 2) n_val = std::clamp(n_val, 1LL, n - 1);

  std::vector<std::size_t> order(healthy.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(spec.seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<bool> is_val(healthy.size(), false);
  for (long long i = 0; i < n_val; ++i) is_val[order[static_cast<std::size_t>(i)]] = true;
  for (std::size_t i = 0; i < healthy.size(); ++i) {
    (is_val[i] ? out.validation : out.train).push_back(healthy[i]);
  }
  return out;
}

MatrixXd gather(std::span<const UnitSeries> fleet, const SampleSet& rows, Channels which) {
  if (fleet.empty()) return {};
  const Index nw = fleet.front().n_w();
  const Index nx = fleet.front().n_x();
  const Index cols = which == Channels::Z ? nw + nx : (which == Channels::W ? nw : nx);
  MatrixXd out(static_cast<Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& unit = fleet[rows[i].unit];
    if (unit.n_w() != nw || unit.n_x() != nx) {
      throw Error(Errc::ShapeMismatch, "fleet units disagree on channel counts");
    }
    const auto r = rows[i].row;
    const auto dst = static_cast<Index>(i);
    switch (which) {
      case Channels::Z:
        out.row(dst).head(nx) = unit.x().row(r);
        out.row(dst).tail(nw) = unit.w().row(r);
        break;
      case Channels::W:
        out.row(dst) = unit.w().row(r);
        break;
      case Channels::X:
        out.row(dst) = unit.x().row(r);
        break;
    }
  }
  return out;
}

}  // namespace resfault
