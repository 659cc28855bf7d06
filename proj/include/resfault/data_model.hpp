#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace resfault {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// One unit's multivariate time series.
///
/// `w` holds the operating descriptors (altitude first), `x` the sensor
/// readings. `cycle_of[t]` is the flight cycle of row t; cycles are contiguous,
/// non-decreasing runs of rows. The model input `z` concatenates x then w, so
/// sensor channels keep the same indices in both residual models.
class UnitSeries {
 public:
  UnitSeries(int unit_id, std::string dataset_id, MatrixXd w, MatrixXd x, std::vector<int> cycle_of,
             std::vector<std::string> w_names, std::vector<std::string> x_names);

  int unit_id() const noexcept { return unit_id_; }
  const std::string& dataset_id() const noexcept { return dataset_id_; }
  const MatrixXd& w() const noexcept { return w_; }
  const MatrixXd& x() const noexcept { return x_; }
  const std::vector<int>& cycle_of() const noexcept { return cycle_of_; }
  const std::vector<std::string>& w_names() const noexcept { return w_names_; }
  const std::vector<std::string>& x_names() const noexcept { return x_names_; }

  Index rows() const noexcept { return w_.rows(); }
  Index n_w() const noexcept { return w_.cols(); }
  Index n_x() const noexcept { return x_.cols(); }
  Index n_z() const noexcept { return n_w() + n_x(); }

  /// [x | w], T x N_z.
  MatrixXd z() const;
  std::vector<std::string> z_names() const;

  /// Same unit restricted to `rows` (strictly increasing).
  UnitSeries select_rows(std::span<const Index> rows) const;
  UnitSeries with_dataset_id(std::string dataset_id) const;

 private:
  int unit_id_;
  std::string dataset_id_;
  MatrixXd w_;
  MatrixXd x_;
  std::vector<int> cycle_of_;
  std::vector<std::string> w_names_;
  std::vector<std::string> x_names_;
};

struct CycleView {
  int cycle_index = 0;
  Index begin = 0;  // first row
  Index end = 0;    // one past the last row

  Index size() const noexcept { return end - begin; }
  bool operator==(const CycleView&) const = default;
};

std::vector<CycleView> cycles(const UnitSeries& series);

struct SplitSpec {
  int healthy_cycles_per_unit = 16;
  double validation_fraction = 0.15;
  std::uint64_t seed = 0;

  void validate() const;
};

struct RowRef {
  std::size_t unit = 0;
  Index row = 0;

  auto operator<=>(const RowRef&) const = default;
};

using SampleSet = std::vector<RowRef>;

struct Split {
  SampleSet train;
  SampleSet validation;
  SampleSet test;
  /// Per unit, the first row of the test period.
  std::vector<Index> first_test_row;
};

Split split(std::span<const UnitSeries> fleet, const SplitSpec& spec);

enum class Channels { Z, W, X };

/// Stacks the selected rows of the fleet into one matrix.
MatrixXd gather(std::span<const UnitSeries> fleet, const SampleSet& rows, Channels which);

}  // namespace resfault
