#pragma once

#include <vector>

#include "resfault/data_model.hpp"

namespace resfault {

/// Per-channel standardization, fitted on training rows only.
struct Standardizer {
  VectorXd mean;
  VectorXd std;  // population standard deviation
  double epsilon = 1e-8;

  Index channels() const noexcept { return mean.size(); }
  /// Channels [first, first + count).
  Standardizer slice(Index first, Index count) const;
};

Standardizer fit_standardizer(const MatrixXd& train_rows, double epsilon = 1e-8);
MatrixXd apply_standardizer(const Standardizer& standardizer, const MatrixXd& rows);

/// Keeps rows 0, factor, 2*factor, ... of every cycle.
UnitSeries downsample(const UnitSeries& series, int factor);

struct CruiseResult {
  UnitSeries series;
  std::vector<int> dropped_cycles;
};

/// Keeps rows whose altitude exceeds `threshold` times the maximum altitude of
/// their cycle. Altitude is descriptor column `altitude_column`.
CruiseResult cruise_filter(const UnitSeries& series, double threshold = 0.85,
                           Index altitude_column = 0);

enum class PreprocessOrder { DownsampleFirst, CruiseFirst };

struct PreprocessConfig {
  int downsample_factor = 10;
  double cruise_threshold = 0.85;
  PreprocessOrder order = PreprocessOrder::DownsampleFirst;
  double epsilon = 1e-8;
};

/// Row selection for one unit: downsampling and cruise filtering in the
/// configured order. Standardization happens later on the pooled split.
UnitSeries select_analysis_rows(const UnitSeries& series, const PreprocessConfig& config);

}  // namespace resfault
