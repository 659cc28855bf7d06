#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "../support/fixtures.hpp"
#include "resfault/error.hpp"
#include "resfault/synth.hpp"

using namespace resfault;

namespace {

SynthConfig small() {
  SynthConfig cfg;
  cfg.n_units_per_family = 2;
  cfg.cycles_per_unit = 40;
  cfg.rows_per_cycle = 50;
  cfg.seed = 3;
  return cfg;
}

}  // namespace

TEST(GenFleet, DefaultFleetSize) {
  SynthConfig cfg;
  cfg.cycles_per_unit = 35;
  cfg.rows_per_cycle = 20;
  const auto fleet = gen_fleet(cfg);
  ASSERT_EQ(fleet.size(), 30u);
  std::set<std::string> families;
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    EXPECT_EQ(fleet[i].truth.unit_id, static_cast<int>(i) + 1);
    EXPECT_EQ(fleet[i].series.unit_id(), static_cast<int>(i) + 1);
    families.insert(fleet[i].truth.family);
  }
  EXPECT_EQ(families, (std::set<std::string>{"fan", "hpc", "lpt"}));
}

TEST(GenFleet, HealthyUnitsAppended) {
  auto cfg = small();
  cfg.n_healthy_units = 3;
  const auto fleet = gen_fleet(cfg);
  ASSERT_EQ(fleet.size(), 9u);
  for (std::size_t i = 6; i < 9; ++i) {
    EXPECT_EQ(fleet[i].truth.family, kHealthyFamily);
    EXPECT_FALSE(fleet[i].truth.fault_cycle);
    EXPECT_TRUE(fleet[i].drift.isZero(0.0));
  }
}

TEST(GenFleet, SameSeedBitIdentical) {
  const auto a = gen_fleet(small());
  const auto b = gen_fleet(small());
  auto other = small();
  other.seed = 4;
  const auto c = gen_fleet(other);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].series.x(), b[i].series.x());
    EXPECT_EQ(a[i].series.w(), b[i].series.w());
    EXPECT_EQ(a[i].truth.fault_cycle, b[i].truth.fault_cycle);
  }
  EXPECT_NE(a[0].series.x(), c[0].series.x());
}

TEST(GenFleet, FamiliesUseDisjointSensors) {
  const auto fleet = gen_fleet(small());
  std::map<std::string, std::set<std::string>> sensors;
  for (const auto& u : fleet) sensors[u.truth.family].insert(u.truth.faulty_sensors.begin(), u.truth.faulty_sensors.end());
  for (const auto& [f, s] : sensors)
    for (const auto& [g, t] : sensors) {
      if (f == g) continue;
      for (const auto& name : s) EXPECT_FALSE(t.count(name)) << name;
    }
  for (const auto& fam : default_families()) {
    std::set<std::string> names;
    for (const auto& s : fam.sensors) names.insert(s.sensor);
    EXPECT_EQ(sensors[fam.name], names);
  }
}

TEST(GenUnit, ShapesAndFaultWindow) {
  const auto cfg = small();
  const auto u = gen_unit(cfg, 1, 5, 9);
  EXPECT_EQ(u.series.rows(), 40 * 50);
  EXPECT_EQ(u.series.n_w(), 4);
  EXPECT_EQ(u.series.n_x(), 14);
  EXPECT_EQ(u.series.cycle_of().front(), 1);
  EXPECT_EQ(u.series.cycle_of().back(), 40);
  ASSERT_TRUE(u.truth.fault_cycle);
  EXPECT_GE(*u.truth.fault_cycle, 20);
  EXPECT_LE(*u.truth.fault_cycle, 30);
  EXPECT_EQ(u.truth.family, "hpc");
  EXPECT_EQ(u.phase.size(), static_cast<std::size_t>(u.series.rows()));
}

TEST(GenUnit, DriftStartsAfterFaultAndGrows) {
  const auto cfg = small();
  for (std::uint64_t seed = 1; seed < 6; ++seed) {
    const auto u = gen_unit(cfg, 0, 1, seed);
    const int n_true = *u.truth.fault_cycle;
    for (Index t = 0; t < u.series.rows(); ++t) {
      const int c = u.series.cycle_of()[static_cast<std::size_t>(t)];
      if (c <= n_true) EXPECT_TRUE(u.drift.row(t).isZero(0.0));
      if (t > 0) EXPECT_TRUE((u.drift.row(t).cwiseAbs().array() >= u.drift.row(t - 1).cwiseAbs().array()).all());
    }
    std::set<Index> faulty;
    for (const auto& s : u.truth.faulty_sensors) faulty.insert(sensor_index(s));
    for (Index j = 0; j < 14; ++j) {
      if (!faulty.count(j)) EXPECT_TRUE(u.drift.col(j).isZero(0.0));
    }
  }
}

TEST(GenUnit, DriftCalibration) {
  auto cfg = small();
  cfg.weight_jitter = 0.0;
  const auto u = gen_unit(cfg, 0, 1, 3);
  const int n_true = *u.truth.fault_cycle;
  const Index p21 = sensor_index("P21");
  for (Index t = 0; t < u.series.rows(); ++t) {
    if (u.series.cycle_of()[static_cast<std::size_t>(t)] == n_true + 10) {
      EXPECT_NEAR(u.drift(t, p21), 6.0 * cfg.noise_std, 1e-12);
      break;
    }
  }
}

TEST(GenUnit, HealthyWindowIsStationary) {
  auto cfg = small();
  cfg.cycles_per_unit = 60;
  const auto u = gen_unit(cfg, std::nullopt, 1, 11);
  const MatrixXd r = fixture::oracle_residual(u, cfg);
  const Index half = r.rows() / 2;
  const VectorXd first = r.topRows(half).colwise().mean();
  const VectorXd second = r.bottomRows(r.rows() - half).colwise().mean();
  EXPECT_LT((first - second).cwiseAbs().maxCoeff(), 0.1 * cfg.noise_std);
}

TEST(GenUnit, NoiselessHealthyUnitMatchesMap) {
  auto cfg = small();
  cfg.noise_std = 0.0;
  cfg.severity_scale = 0.0;
  const auto u = gen_unit(cfg, 0, 1, 2);
  EXPECT_LT(fixture::oracle_residual(u, cfg).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(GenUnit, FlightProfile) {
  const auto cfg = small();
  const auto u = gen_unit(cfg, std::nullopt, 1, 4);
  int cruise = 0;
  for (std::size_t t = 0; t < 50; ++t) cruise += u.phase[t] == FlightPhase::Cruise;
  EXPECT_EQ(cruise, 34);
  EXPECT_EQ(u.phase.front(), FlightPhase::Climb);
  EXPECT_EQ(u.phase[49], FlightPhase::Descent);
  EXPECT_GT(u.series.w().col(0).minCoeff(), -1e-9);
}

TEST(SynthConfig, Validation) {
  auto cfg = small();
  cfg.n_families = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = small();
  cfg.fault_start_min = 10;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = small();
  cfg.families[1].sensors = cfg.families[0].sensors;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = small();
  cfg.families[0].sensors[0].sensor = "XYZ";
  EXPECT_THROW(cfg.validate(), Error);
  cfg = small();
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_DOUBLE_EQ(cfg.drift_scale(), 6.0 * 0.1 / 100.0);
}
