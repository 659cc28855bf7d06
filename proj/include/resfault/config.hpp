#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "resfault/data_model.hpp"
#include "resfault/nn_core.hpp"
#include "resfault/preprocess.hpp"
#include "resfault/residual_models.hpp"
#include "resfault/segmentation_eval.hpp"
#include "resfault/synth.hpp"

namespace resfault {

enum class StatsSource { Validation, TrainAndValidation };

struct DetectConfig {
  int n_wait = 3;
  StatsSource stats_source = StatsSource::Validation;
};

struct SegmentConfig {
  int snapshot_offset = 10;
  int k_min = 0;
  int k_max = 34;
  std::vector<int> checkpoints = kTimelineCheckpoints;
  SignatureNorm normalization = SignatureNorm::Max;
};

struct ModelsConfig {
  std::vector<Index> ae_hidden = kAeHidden;
  std::vector<Index> oc_hidden = kOcHidden;
};

struct ExperimentConfig {
  int realisations = 5;
  std::uint64_t seed = 0;
};

/// Every tunable of a run. Defaults reproduce the reference setup: downsample
/// by 10, cruise above 0.85 of the cycle's peak altitude, 16 healthy cycles,
/// 15% validation, 70 epochs of batch 64 Adam (0.9, 0.999, 1e-3), patience 10,
/// N_wait 3 and 5 realisations.
struct RunConfig {
  PreprocessConfig preprocess;
  SplitSpec split;  // seed is set per realisation
  TrainConfig train;
  ModelsConfig models;
  DetectConfig detect;
  SegmentConfig segment;
  ExperimentConfig experiment;
  SynthConfig synth;

  void validate() const;
};

/// Empty or whitespace-only text yields the defaults.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);
/// Full configuration as pretty-printed JSON (parse_config accepts it back).
std::string dump_config(const RunConfig& config);

}  // namespace resfault
