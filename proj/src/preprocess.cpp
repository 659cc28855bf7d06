#include "resfault/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "resfault/error.hpp"

namespace resfault {

Standardizer Standardizer::slice(Index first, Index count) const {
  return {mean.segment(first, count), std.segment(first, count), epsilon};
}

Standardizer fit_standardizer(const MatrixXd& train_rows, double epsilon) {
  if (train_rows.rows() < 2) {
    throw Error(Errc::InsufficientData, "standardizer needs at least 2 rows");
  }
  Standardizer out;
  out.epsilon = epsilon;
  out.mean = train_rows.colwise().mean().transpose();
  const MatrixXd centered = train_rows.rowwise() - out.mean.transpose();
  out.std = (centered.array().square().colwise().sum() / static_cast<double>(train_rows.rows()))
                .sqrt()
                .transpose();
  return out;
}

MatrixXd apply_standardizer(const Standardizer& standardizer, const MatrixXd& rows) {
  if (rows.cols() != standardizer.channels()) {
    throw Error(Errc::ShapeMismatch, "standardizer fitted on " +
                                         std::to_string(standardizer.channels()) +
                                         " channels, got " + std::to_string(rows.cols()));
  }
  const VectorXd divisor = standardizer.std.cwiseMax(standardizer.epsilon);
  MatrixXd out = rows.rowwise() - standardizer.mean.transpose();
  out.array().rowwise() /= divisor.transpose().array();
  return out;
}

UnitSeries downsample(const UnitSeries& series, int factor) {
  if (factor < 1) throw Error(Errc::ConfigInvalid, "downsample factor must be >= 1");
  if (factor == 1) return series;
  std::vector<Index> keep;
  for (const auto& view : cycles(series)) {
    for (Index r = view.begin; r < view.end; r += factor) keep.push_back(r);
  }
  return series.select_rows(keep);
}

CruiseResult cruise_filter(const UnitSeries& series, double threshold, Index altitude_column) {
  if (altitude_column < 0 || altitude_column >= series.n_w()) {
    throw Error(Errc::ShapeMismatch, "altitude column out of range");
  }
  std::vector<Index> keep;
  std::vector<int> dropped;
  const auto alt = series.w().col(altitude_column);
  for (const auto& view : cycles(series)) {
    const double peak = alt.segment(view.begin, view.size()).maxCoeff();
    if (!(peak > 0.0)) {
      throw Error(Errc::NonPositiveAltitude, "unit " + std::to_string(series.unit_id()) +
                                                 " cycle " + std::to_string(view.cycle_index) +
                                                 " has maximum altitude <= 0");
    }
    const std::size_t before = keep.size();
    for (Index r = view.begin; r < view.end; ++r) {
      if (alt(r) / peak > threshold) keep.push_back(r);
    }
    if (keep.size() == before) dropped.push_back(view.cycle_index);
  }
  if (keep.empty()) {
    throw Error(Errc::InsufficientData,
                "cruise filter removed every row of unit " + std::to_string(series.unit_id()));
  }
  return {series.select_rows(keep), std::move(dropped)};
}

UnitSeries select_analysis_rows(const UnitSeries& series, const PreprocessConfig& config) {
  if (config.order == PreprocessOrder::DownsampleFirst) {
    return cruise_filter(downsample(series, config.downsample_factor), config.cruise_threshold)
        .series;
  }
  return downsample(cruise_filter(series, config.cruise_threshold).series,
                    config.downsample_factor);
}

}  // namespace resfault
