#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "resfault/data_model.hpp"

namespace resfault {

inline constexpr std::array<std::string_view, 4> kDescriptorNames{"alt", "XM", "TRA", "T2"};
inline constexpr std::array<std::string_view, 14> kSensorNames{
    "T24", "T30", "T48", "T50", "P15", "P2", "P21", "P24", "Ps30", "P40", "P50", "Nf", "Nc", "Wf"};

std::vector<std::string> descriptor_names();
std::vector<std::string> sensor_names();
/// Index into kSensorNames; throws ConfigInvalid for unknown names.
Index sensor_index(std::string_view name);

struct FaultSensor {
  std::string sensor;
  double weight = 1.0;   // drift multiplier; sign sets the drift direction
  int onset_delay = 0;   // cycles after the family's fault start
};

struct FaultFamily {
  std::string name;
  std::vector<FaultSensor> sensors;
};

/// Fan, HPC and LPT style families on disjoint sensor sets.
std::vector<FaultFamily> default_families();

inline constexpr std::string_view kHealthyFamily = "healthy";

struct SynthConfig {
  int n_units_per_family = 10;
  int n_families = 3;  // leading entries of `families`
  std::vector<FaultFamily> families = default_families();
  int n_healthy_units = 0;  // extra units that never develop a fault
  int cycles_per_unit = 80;
  int rows_per_cycle = 200;  // raw rate, before downsampling
  double cruise_fraction = 0.7;
  int fault_start_min = 20;
  int fault_start_max = 30;
  double severity_exponent = 2.0;
  /// Drift per cycle^exponent; nullopt means 6 noise_std after 10 cycles.
  std::optional<double> severity_scale;
  double noise_std = 0.1;
  double weight_jitter = 0.25;
  int healthy_cycles_per_unit = 16;
  std::uint64_t seed = 0;
  std::uint64_t map_seed = 20231016;

  void validate() const;
  double drift_scale() const;
  std::vector<FaultFamily> active_families() const;
};

/// Fleet-wide smooth nonlinear map from operating descriptors to sensors.
/// Noise and drift live in the map's latent units; readings are
/// offset + span * latent in physical units.
class SensorMap {
 public:
  explicit SensorMap(std::uint64_t seed);

  /// Noise-free latent sensor values, rows are samples.
  MatrixXd latent(const MatrixXd& w) const;
  MatrixXd to_physical(const MatrixXd& latent) const;
  MatrixXd sensors(const MatrixXd& w) const { return to_physical(latent(w)); }

  const VectorXd& span() const noexcept { return span_; }

 private:
  MatrixXd inner_;  // H x 4
  VectorXd inner_bias_;
  MatrixXd outer_;   // 14 x H
  MatrixXd linear_;  // 14 x 4
  VectorXd offset_;
  VectorXd span_;
};

enum class FlightPhase { Climb, Cruise, Descent };

struct GroundTruth {
  int unit_id = 0;
  std::string family;
  std::optional<int> fault_cycle;
  std::vector<std::string> faulty_sensors;
};

struct GeneratedUnit {
  UnitSeries series;
  GroundTruth truth;
  std::vector<FlightPhase> phase;  // per raw row
  MatrixXd drift;                  // T x 14, latent units
};

/// `family` indexes active_families(); nullopt generates a fault-free unit.
GeneratedUnit gen_unit(const SynthConfig& config, std::optional<std::size_t> family, int unit_id,
                       std::uint64_t unit_seed);

/// Families in order, n_units_per_family each, then the healthy units.
/// Unit ids run from 1.
std::vector<GeneratedUnit> gen_fleet(const SynthConfig& config);

}  // namespace resfault
