#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "resfault/health_indicators.hpp"

namespace resfault {

/// Healthy-condition statistics per HI channel: tau = mu + 3 sigma.
struct HealthyStats {
  VectorXd mu;
  VectorXd sigma;  // population standard deviation
  VectorXd tau;
  Index fitted_on = 0;

  Index channels() const noexcept { return mu.size(); }
};

inline constexpr double kSigmaMultiplier = 3.0;

/// `healthy_values` is T_H x K.
HealthyStats fit_stats(const MatrixXd& healthy_values);

/// Cycle-averaged HI: one row per cycle present in the series, in order.
struct CycleHi {
  std::vector<int> cycles;
  MatrixXd values;  // C x K

  /// Row of cycle `cycle`, or nullopt when the cycle is absent.
  std::optional<Index> position_of(int cycle) const;
  /// Rows whose cycle is >= `first_cycle`.
  CycleHi from_cycle(int first_cycle) const;
};

CycleHi cycle_average(const MatrixXd& values, const std::vector<int>& cycle_of);
CycleHi cycle_average(const HiSeries& hi);

struct Detection {
  std::optional<Index> alarm_position;  // row of cycle_hi where the alarm fires
  std::optional<int> alarm_cycle;       // n0
  /// For every cycle row, the channels with averaged HI above tau.
  std::vector<std::vector<Index>> exceedance;
  /// Channels above tau throughout the alarm window.
  std::vector<Index> triggered_first;
};

/// Raises the alarm at the last cycle of the first window of `n_wait`
/// consecutive cycles in which one and the same channel stays above its
/// threshold.
Detection detect(const CycleHi& cycle_hi, const HealthyStats& stats, int n_wait = 3);

/// d_u = n0 - n_true; negative values are false positives.
int detection_delay(int n0, int n_true);

struct DetectionReport {
  int unit_id = 0;
  std::string dataset_id;
  std::optional<int> n_true;  // nullopt: the unit never develops a fault
  std::optional<int> alarm_cycle;
  std::optional<int> delay;
  std::vector<int> cycles;
  std::vector<std::vector<Index>> per_cycle_exceedance;
  std::vector<Index> triggered_first;

  /// Alarm before the fault, or any alarm on a fault-free unit.
  bool false_positive() const noexcept;
};

DetectionReport make_report(int unit_id, std::string dataset_id, std::optional<int> n_true,
                            const CycleHi& cycle_hi, const Detection& detection);

/// Units with a false-positive alarm over all units; units without an alarm
/// only enter the denominator.
double false_positive_rate(std::span<const DetectionReport> reports);

/// Mean delay over units that have a fault and an alarm; nullopt when none.
std::optional<double> mean_detection_delay(std::span<const DetectionReport> reports);

}  // namespace resfault
