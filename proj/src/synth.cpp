#include "resfault/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "resfault/error.hpp"
#include "resfault/seeding.hpp"

namespace resfault {

std::vector<std::string> descriptor_names() {
  return {kDescriptorNames.begin(), kDescriptorNames.end()};
}

std::vector<std::string> sensor_names() { return {kSensorNames.begin(), kSensorNames.end()}; }

Index sensor_index(std::string_view name) {
  const auto it = std::find(kSensorNames.begin(), kSensorNames.end(), name);
  if (it == kSensorNames.end()) {
    throw Error(Errc::ConfigInvalid, "unknown sensor '" + std::string(name) + "'");
  }
  return static_cast<Index>(it - kSensorNames.begin());
}

std::vector<FaultFamily> default_families() {
  return {
      {"fan", {{"P21", 1.0, 0}, {"P15", 0.8, 0}, {"Nf", 0.6, 0}, {"T24", 0.5, 3}}},
      {"hpc", {{"T30", 1.0, 0}, {"Ps30", 0.7, 0}, {"Nc", 0.6, 3}, {"Wf", 0.5, 5}}},
      {"lpt", {{"T50", 1.0, 0}, {"T48", 0.8, 0}, {"P50", 0.6, 4}}},
  };
}

void SynthConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(Errc::ConfigInvalid, "synth: " + msg); };
  if (n_families < 1) fail("n_families must be >= 1");
  if (n_families > static_cast<int>(families.size())) fail("n_families exceeds the family list");
  if (n_units_per_family < 1) fail("n_units_per_family must be >= 1");
  if (n_healthy_units < 0) fail("n_healthy_units must be >= 0");
  if (rows_per_cycle < 10) fail("rows_per_cycle must be >= 10");
  if (!(cruise_fraction > 0.1 && cruise_fraction < 0.95)) fail("cruise_fraction must lie in (0.1, 0.95)");
  if (healthy_cycles_per_unit < 1) fail("healthy_cycles_per_unit must be >= 1");
  if (fault_start_min <= healthy_cycles_per_unit) {
    fail("faults must start after the healthy training window");
  }
  if (fault_start_max < fault_start_min) fail("fault_start_max < fault_start_min");
  if (cycles_per_unit <= fault_start_max) fail("cycles_per_unit must exceed fault_start_max");
  if (!(severity_exponent > 0.0)) fail("severity_exponent must be > 0");
  if (severity_scale && !(*severity_scale >= 0.0)) fail("severity_scale must be >= 0");
  if (!(noise_std >= 0.0)) fail("noise_std must be >= 0");
  if (!(weight_jitter >= 0.0 && weight_jitter < 1.0)) fail("weight_jitter must lie in [0, 1)");

  std::set<std::string> names;
  std::set<std::set<std::string>> sensor_sets;
  for (const auto& fam : active_families()) {
    if (fam.name.empty() || fam.name == kHealthyFamily) fail("invalid family name '" + fam.name + "'");
    if (!names.insert(fam.name).second) fail("duplicate family '" + fam.name + "'");
    if (fam.sensors.empty()) fail("family '" + fam.name + "' has no faulty sensors");
    std::set<std::string> set;
    for (const auto& s : fam.sensors) {
      sensor_index(s.sensor);
      if (s.onset_delay < 0) fail("onset_delay must be >= 0");
      if (!set.insert(s.sensor).second) fail("sensor listed twice in '" + fam.name + "'");
    }
    if (!sensor_sets.insert(set).second) fail("families must have distinct sensor sets");
  }
}

double SynthConfig::drift_scale() const {
  if (severity_scale) return *severity_scale;
  return 6.0 * noise_std / std::pow(10.0, severity_exponent);
}

std::vector<FaultFamily> SynthConfig::active_families() const {
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(std::max(n_families, 0)), families.size());
  return {families.begin(), families.begin() + static_cast<std::ptrdiff_t>(n)};
}

namespace {

constexpr int kHidden = 8;

MatrixXd normal_matrix(std::mt19937_64& rng, Index rows, Index cols, double sd) {
  std::normal_distribution<double> dist(0.0, sd);
  MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
  }
  return m;
}

/// Descriptors mapped to roughly unit scale around a typical cruise point.
MatrixXd normalize_descriptors(const MatrixXd& w) {
  Eigen::RowVector4d center(30000.0, 0.75, 70.0, 450.0);
  Eigen::RowVector4d scale(5000.0, 0.05, 8.0, 15.0);
  MatrixXd u = w.rowwise() - center;
  u.array().rowwise() /= scale.array();
  return u;
}

double ambient_temperature(double altitude_ft) { return 518.67 - 0.00356 * altitude_ft; }

}  // namespace

SensorMap::SensorMap(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Index nx = static_cast<Index>(kSensorNames.size());
  inner_ = normal_matrix(rng, kHidden, 4, 0.6);
  inner_bias_ = normal_matrix(rng, kHidden, 1, 0.3);
  outer_ = normal_matrix(rng, nx, kHidden, 1.0 / std::sqrt(static_cast<double>(kHidden)));
  linear_ = normal_matrix(rng, nx, 4, 0.3);
  offset_.resize(nx);
  offset_ << 620.0, 1500.0, 1800.0, 1300.0, 14.5, 10.5, 15.0, 18.5, 270.0, 285.0, 11.5, 2200.0,
      8600.0, 3.6;
  span_ = 0.02 * offset_;
}

MatrixXd SensorMap::latent(const MatrixXd& w) const {
  if (w.cols() != 4) throw Error(Errc::ShapeMismatch, "sensor map expects 4 descriptors");
  const MatrixXd u = normalize_descriptors(w);
  MatrixXd h = u * inner_.transpose();
  h.rowwise() += inner_bias_.transpose();
  h = h.array().tanh().matrix();
  return h * outer_.transpose() + u * linear_.transpose();
}

MatrixXd SensorMap::to_physical(const MatrixXd& latent) const {
  MatrixXd out = latent.array().rowwise() * span_.transpose().array();
  out.rowwise() += offset_.transpose();
  return out;
}

GeneratedUnit gen_unit(const SynthConfig& config, std::optional<std::size_t> family, int unit_id,
                       std::uint64_t unit_seed) {
  config.validate();
  const auto families = config.active_families();
  if (family && *family >= families.size()) {
    throw Error(Errc::ConfigInvalid, "family index out of range");
  }
  std::mt19937_64 rng(unit_seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const int R = config.rows_per_cycle;
  const int C = config.cycles_per_unit;
  const Index T = static_cast<Index>(R) * C;
  const int n_side = std::max(1, static_cast<int>(std::lround(R * (1.0 - config.cruise_fraction) / 2.0)));
  const int n_cruise = R - 2 * n_side;

  MatrixXd w(T, 4);
  std::vector<int> cycle_of(static_cast<std::size_t>(T));
  std::vector<FlightPhase> phase(static_cast<std::size_t>(T));
  const double two_pi = 2.0 * std::numbers::pi;

  Index t = 0;
  for (int c = 1; c <= C; ++c) {
    const double alt_c = 28000.0 + 8000.0 * unif(rng);
    const double mach_c = 0.72 + 0.08 * unif(rng);
    const double tra_c = 62.0 + 16.0 * unif(rng);
    const double d_temp = 5.0 * gauss(rng);
    const double ph1 = two_pi * unif(rng), ph2 = two_pi * unif(rng), ph3 = two_pi * unif(rng);
    auto emit = [&](double alt, double mach, double tra, FlightPhase p) {
      const double t2 = (ambient_temperature(alt) + d_temp) * (1.0 + 0.2 * mach * mach);
      w.row(t) << alt, mach, tra, t2;
      cycle_of[static_cast<std::size_t>(t)] = c;
      phase[static_cast<std::size_t>(t)] = p;
      ++t;
    };
    for (int i = 0; i < n_side; ++i) {
      const double f = static_cast<double>(i) / n_side;
      emit(0.8 * alt_c * f, 0.25 + (0.9 * mach_c - 0.25) * f, 85.0 - (85.0 - tra_c) * f,
           FlightPhase::Climb);
    }
    for (int i = 0; i < n_cruise; ++i) {
      const double s = static_cast<double>(i) / n_cruise;
      const double alt = alt_c * (0.98 + 0.02 * (0.5 + 0.5 * std::sin(two_pi * 1.5 * s + ph1)));
      const double mach = mach_c + 0.01 * std::sin(two_pi * 2.0 * s + ph2) + 0.002 * gauss(rng);
      const double tra = tra_c + 3.0 * std::sin(two_pi * 3.0 * s + ph3) + 0.5 * gauss(rng);
      emit(alt, mach, tra, FlightPhase::Cruise);
    }
    for (int i = 0; i < n_side; ++i) {
      const double f = static_cast<double>(i + 1) / n_side;
      emit(0.8 * alt_c * (1.0 - f), 0.9 * mach_c - (0.9 * mach_c - 0.25) * f,
           tra_c - (tra_c - 40.0) * f, FlightPhase::Descent);
    }
  }

  const SensorMap map(config.map_seed);
  MatrixXd latent = map.latent(w);
  const Index nx = latent.cols();
  for (Index j = 0; j < nx; ++j) {
    for (Index r = 0; r < T; ++r) latent(r, j) += config.noise_std * gauss(rng);
  }

  GroundTruth truth;
  truth.unit_id = unit_id;
  MatrixXd drift = MatrixXd::Zero(T, nx);
  if (family) {
    const auto& fam = families[*family];
    truth.family = fam.name;
    std::uniform_int_distribution<int> start(config.fault_start_min, config.fault_start_max);
    const int n_true = start(rng);
    truth.fault_cycle = n_true;
    const double scale = config.drift_scale();
    for (const auto& fs : fam.sensors) {
      truth.faulty_sensors.push_back(fs.sensor);
      const Index j = sensor_index(fs.sensor);
      const double jitter = 1.0 + config.weight_jitter * (2.0 * unif(rng) - 1.0);
      const double gain = fs.weight * jitter * scale;
      const int onset = n_true + fs.onset_delay;
      for (Index r = 0; r < T; ++r) {
        const int c = cycle_of[static_cast<std::size_t>(r)];
        if (c > onset) drift(r, j) = gain * std::pow(static_cast<double>(c - onset), config.severity_exponent);
      }
    }
  } else {
    truth.family = std::string(kHealthyFamily);
  }
  latent += drift;

  UnitSeries series(unit_id, truth.family, std::move(w), map.to_physical(latent), std::move(cycle_of),
                    descriptor_names(), sensor_names());
  return {std::move(series), std::move(truth), std::move(phase), std::move(drift)};
}

std::vector<GeneratedUnit> gen_fleet(const SynthConfig& config) {
  config.validate();
  std::vector<GeneratedUnit> fleet;
  int unit_id = 1;
  const auto n_fam = config.active_families().size();
  for (std::size_t f = 0; f < n_fam; ++f) {
    for (int i = 0; i < config.n_units_per_family; ++i, ++unit_id) {
      fleet.push_back(gen_unit(config, f, unit_id, derive_seed(config.seed, 1, static_cast<std::uint64_t>(unit_id))));
    }
  }
  for (int i = 0; i < config.n_healthy_units; ++i, ++unit_id) {
    fleet.push_back(gen_unit(config, std::nullopt, unit_id,
                             derive_seed(config.seed, 1, static_cast<std::uint64_t>(unit_id))));
  }
  return fleet;
}

}  // namespace resfault
