#include <gtest/gtest.h>

#include "resfault/config.hpp"
#include "resfault/error.hpp"

using namespace resfault;

namespace {

Errc code_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "accepted: " << text;
  return Errc::Io;
}

}  // namespace

TEST(Config, EmptyTextGivesReferenceDefaults) {
  for (const char* text : {"", "  \n\t", "{}"}) {
    const auto c = parse_config(text);
    EXPECT_EQ(c.preprocess.downsample_factor, 10);
    EXPECT_EQ(c.preprocess.cruise_threshold, 0.85);
    EXPECT_EQ(c.split.healthy_cycles_per_unit, 16);
    EXPECT_EQ(c.split.validation_fraction, 0.15);
    EXPECT_EQ(c.train.epochs, 70);
    EXPECT_EQ(c.train.batch_size, 64);
    EXPECT_EQ(c.train.patience, 10);
    EXPECT_EQ(c.train.adam.lr, 0.001);
    EXPECT_EQ(c.train.adam.beta1, 0.9);
    EXPECT_EQ(c.train.adam.beta2, 0.999);
    EXPECT_EQ(c.models.ae_hidden, (std::vector<Index>{128, 8, 128}));
    EXPECT_EQ(c.models.oc_hidden, (std::vector<Index>{128, 128}));
    EXPECT_EQ(c.detect.n_wait, 3);
    EXPECT_EQ(c.segment.snapshot_offset, 10);
    EXPECT_EQ(c.segment.k_max, 34);
    EXPECT_EQ(c.segment.checkpoints, (std::vector<int>{10, 20, 30, 40}));
    EXPECT_EQ(c.experiment.realisations, 5);
    EXPECT_EQ(c.synth.n_units_per_family * c.synth.n_families, 30);
  }
}

TEST(Config, Overrides) {
  const auto c = parse_config(R"({"train": {"adam": {"lr": 0.01}, "epochs": 5},
    "detect": {"n_wait": 1, "stats_source": "train_validation"},
    "experiment": {"seed": 42},
    "synth": {"n_healthy_units": 10, "severity_scale": 0.5,
              "families": [{"name": "a", "sensors": [{"sensor": "T30"}]},
                           {"name": "b", "sensors": [{"sensor": "P50", "weight": -1.0, "onset_delay": 2}]}],
              "n_families": 2}})");
  EXPECT_EQ(c.train.adam.lr, 0.01);
  EXPECT_EQ(c.train.epochs, 5);
  EXPECT_EQ(c.detect.n_wait, 1);
  EXPECT_EQ(c.detect.stats_source, StatsSource::TrainAndValidation);
  EXPECT_EQ(c.experiment.seed, 42u);
  EXPECT_EQ(c.synth.seed, 42u);
  EXPECT_EQ(*c.synth.severity_scale, 0.5);
  ASSERT_EQ(c.synth.families.size(), 2u);
  EXPECT_EQ(c.synth.families[1].sensors[0].weight, -1.0);
  EXPECT_EQ(c.synth.families[1].sensors[0].onset_delay, 2);
}

TEST(Config, Rejections) {
  EXPECT_EQ(code_of(R"({"detect": {"n_wait": 0}})"), Errc::ConfigInvalid);
  EXPECT_EQ(code_of(R"({"detect": {"nwait": 3}})"), Errc::UnknownKey);
  EXPECT_EQ(code_of(R"({"bogus": {}})"), Errc::UnknownKey);
  EXPECT_EQ(code_of(R"({"train": {"epochs": "70"}})"), Errc::ConfigType);
  EXPECT_EQ(code_of(R"({"train": {"epochs": 7.5}})"), Errc::ConfigType);
  EXPECT_EQ(code_of(R"({"train": []})"), Errc::ConfigType);
  EXPECT_EQ(code_of(R"({"synth": {"n_families": 0}})"), Errc::ConfigInvalid);
  EXPECT_EQ(code_of(R"({"experiment": {"seed": -1}})"), Errc::ConfigType);
  EXPECT_EQ(code_of("{not json"), Errc::ConfigInvalid);
  EXPECT_EQ(code_of(R"({"segment": {"normalization": "l1"}})"), Errc::ConfigInvalid);
  EXPECT_EQ(category_of(Errc::UnknownKey), ErrorCategory::Config);
}

TEST(Config, DumpParsesBack) {
  auto c = parse_config(R"({"train": {"epochs": 12}, "synth": {"noise_std": 0.05}})");
  const auto back = parse_config(dump_config(c));
  EXPECT_EQ(dump_config(back), dump_config(c));
  EXPECT_EQ(back.train.epochs, 12);
  EXPECT_EQ(back.synth.noise_std, 0.05);
}
