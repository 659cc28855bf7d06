#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "../support/fixtures.hpp"
#include "resfault/error.hpp"
#include "resfault/io_persistence.hpp"
#include "resfault/synth.hpp"

using namespace resfault;
namespace fs = std::filesystem;

namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("resfault_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  void write(const std::string& name, const std::string& text) { std::ofstream(dir_ / name) << text; }

  Errc code_of(const std::function<void()>& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return Errc::ConfigInvalid;
  }

  fs::path dir_;
};

DataSchema tiny_schema() {
  DataSchema s;
  s.descriptors = {"alt"};
  s.sensors = {"T30", "P50"};
  return s;
}

Checkpoint sample_checkpoint(ModelKind kind) {
  Checkpoint ck;
  ck.kind = kind;
  ck.w_names = {"alt", "XM"};
  ck.x_names = {"a", "b", "c"};
  ck.net = kind == ModelKind::AE ? init_weights({5, 4, 2, 4, 5}, 3) : init_weights({2, 6, 3}, 3);
  for (auto& l : ck.net.layers) l.bias = VectorXd::LinSpaced(l.bias.size(), -0.3, 0.7) / 3.0;
  ck.standardizer = fit_standardizer(fixture::random_matrix(10, 5, 1));
  ck.meta.master_seed = 123456789012345ULL;
  ck.meta.best_val_loss = 0.1 + 0.2;
  return ck;
}

}  // namespace

TEST(FormatDouble, ShortestRoundTrip) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    EXPECT_EQ(*parse_double(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_FALSE(parse_double("1.5x"));
  EXPECT_FALSE(parse_double(""));
  EXPECT_EQ(*parse_double("-2.5e3"), -2500.0);
}

using CsvIo = TempDir;

TEST_F(CsvIo, SynthFleetRoundTrips) {
  SynthConfig cfg;
  cfg.n_units_per_family = 1;
  cfg.cycles_per_unit = 32;
  cfg.rows_per_cycle = 10;
  std::vector<UnitSeries> fleet;
  for (const auto& u : gen_fleet(cfg)) fleet.push_back(u.series);
  save_csv(dir_ / "data.csv", fleet);
  const auto back = load_csv(dir_ / "data.csv");
  ASSERT_EQ(back.size(), fleet.size());
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    EXPECT_EQ(back[i].unit_id(), fleet[i].unit_id());
    EXPECT_EQ(back[i].w(), fleet[i].w());
    EXPECT_EQ(back[i].x(), fleet[i].x());
    EXPECT_EQ(back[i].cycle_of(), fleet[i].cycle_of());
    EXPECT_EQ(back[i].x_names(), fleet[i].x_names());
  }
}

TEST_F(CsvIo, InterleavedUnitsAreRegrouped) {
  write("d.csv", "unit,cycle,alt,T30,P50\n2,1,10,1,2\n1,1,11,3,4\n2,2,12,5,6\n1,1,13,7,8\n1,2,14,9,10\n");
  const auto fleet = load_csv(dir_ / "d.csv", tiny_schema());
  ASSERT_EQ(fleet.size(), 2u);
  EXPECT_EQ(fleet[0].unit_id(), 1);
  EXPECT_EQ(fleet[0].rows(), 3);
  EXPECT_EQ(fleet[0].w()(1, 0), 13);
  EXPECT_EQ(fleet[0].cycle_of(), (std::vector<int>{1, 1, 2}));
  EXPECT_EQ(fleet[1].x()(1, 1), 6);
}

TEST_F(CsvIo, ColumnOrderFollowsHeader) {
  write("d.csv", "P50,alt,cycle,unit,T30,extra\n2,10,1,1,1,x\n");
  const auto fleet = load_csv(dir_ / "d.csv", tiny_schema());
  EXPECT_EQ(fleet[0].x()(0, 0), 1);
  EXPECT_EQ(fleet[0].x()(0, 1), 2);
}

TEST_F(CsvIo, Errors) {
  write("missing.csv", "unit,cycle,alt,T30\n1,1,1,1\n");
  try {
    load_csv(dir_ / "missing.csv", tiny_schema());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MissingColumn);
    EXPECT_NE(std::string(e.what()).find("P50"), std::string::npos);
  }
  write("bad.csv", "unit,cycle,alt,T30,P50\n1,1,1,abc,2\n");
  EXPECT_EQ(code_of([&] { load_csv(dir_ / "bad.csv", tiny_schema()); }), Errc::NonNumericCell);
  write("empty.csv", "");
  EXPECT_EQ(code_of([&] { load_csv(dir_ / "empty.csv", tiny_schema()); }), Errc::EmptyFile);
  EXPECT_EQ(code_of([&] { load_csv(dir_ / "nope.csv", tiny_schema()); }), Errc::Io);
  EXPECT_EQ(category_of(Errc::MissingColumn), ErrorCategory::Data);
}

TEST_F(CsvIo, GroundTruthRoundTrip) {
  std::vector<GroundTruth> truth{{1, "fan", 24, {"P21", "Nf"}}, {2, "healthy", std::nullopt, {}}};
  save_ground_truth(dir_ / "gt.csv", truth);
  const auto back = load_ground_truth(dir_ / "gt.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].fault_cycle, 24);
  EXPECT_EQ(back[0].faulty_sensors, truth[0].faulty_sensors);
  EXPECT_FALSE(back[1].fault_cycle);
  EXPECT_TRUE(back[1].faulty_sensors.empty());
}

using CheckpointIo = TempDir;

TEST_F(CheckpointIo, ParametersSurviveBitExactly) {
  for (ModelKind kind : {ModelKind::AE, ModelKind::OC}) {
    const auto ck = sample_checkpoint(kind);
    save_checkpoint(ck, dir_ / "ck.json");
    const auto back = load_checkpoint(dir_ / "ck.json", kind);
    ASSERT_EQ(back.net.layers.size(), ck.net.layers.size());
    for (std::size_t l = 0; l < ck.net.layers.size(); ++l) {
      EXPECT_EQ(back.net.layers[l].weight, ck.net.layers[l].weight);
      EXPECT_EQ(back.net.layers[l].bias, ck.net.layers[l].bias);
      EXPECT_EQ(back.net.layers[l].activation, ck.net.layers[l].activation);
    }
    EXPECT_EQ(back.standardizer.mean, ck.standardizer.mean);
    EXPECT_EQ(back.standardizer.std, ck.standardizer.std);
    EXPECT_EQ(back.meta.master_seed, ck.meta.master_seed);
    EXPECT_EQ(back.meta.best_val_loss, ck.meta.best_val_loss);
    const MatrixXd in = fixture::random_matrix(100, ck.net.input_dim(), 5);
    EXPECT_EQ(forward(back.net, in), forward(ck.net, in));
  }
}

TEST_F(CheckpointIo, VersionKindAndCorruption) {
  save_checkpoint(sample_checkpoint(ModelKind::OC), dir_ / "oc.json");
  EXPECT_EQ(code_of([&] { load_checkpoint(dir_ / "oc.json", ModelKind::AE); }), Errc::KindMismatch);
  EXPECT_EQ(code_of([&] { load_checkpoint(dir_ / "oc.json").ae(); }), Errc::KindMismatch);

  std::ifstream in(dir_ / "oc.json");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto pos = text.find("\"format_version\": 1");
  ASSERT_NE(pos, std::string::npos);
  std::string tampered = text;
  tampered.replace(pos, 19, "\"format_version\": 7");
  write("v7.json", tampered);
  EXPECT_EQ(code_of([&] { load_checkpoint(dir_ / "v7.json"); }), Errc::VersionMismatch);

  write("trunc.json", text.substr(0, text.size() / 2));
  EXPECT_EQ(code_of([&] { load_checkpoint(dir_ / "trunc.json"); }), Errc::CorruptCheckpoint);
  write("other.json", "{\"hello\": 1}");
  EXPECT_EQ(code_of([&] { load_checkpoint(dir_ / "other.json"); }), Errc::CorruptCheckpoint);
}
