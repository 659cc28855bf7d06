#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "resfault/data_model.hpp"
#include "resfault/residual_models.hpp"

namespace resfault {

enum class HiKind { Aggregated, Sensorwise };

std::string_view to_string(HiKind kind) noexcept;
HiKind parse_hi_kind(std::string_view text);

/// Health-indicator time series aligned with the cycle index of each row.
struct HiSeries {
  MatrixXd values;  // T x K, non-negative
  HiKind kind = HiKind::Aggregated;
  ModelKind source = ModelKind::OC;
  std::vector<std::string> channel_names;
  std::vector<int> cycle_of;

  Index channels() const noexcept { return values.cols(); }
};

/// Per-row Euclidean norm, T x 1.
MatrixXd aggregated_hi(const MatrixXd& residuals);
/// Elementwise absolute value, T x K.
MatrixXd sensorwise_hi(const MatrixXd& residuals);

HiSeries make_hi(const MatrixXd& residuals, HiKind kind, ModelKind source,
                 std::vector<std::string> channel_names, std::vector<int> cycle_of);

}  // namespace resfault
