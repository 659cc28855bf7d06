#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "resfault/data_model.hpp"
#include "resfault/preprocess.hpp"
#include "resfault/residual_models.hpp"
#include "resfault/synth.hpp"

namespace resfault {

/// Header names bound to each column role.
struct DataSchema {
  std::string unit = "unit";
  std::string cycle = "cycle";
  std::vector<std::string> descriptors = descriptor_names();
  std::vector<std::string> sensors = sensor_names();

  /// Throws ConfigInvalid when a header name is bound to two roles.
  void validate() const;
  std::vector<std::string> header() const;
};

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
/// Whole-string numeric parse; nullopt on anything else.
std::optional<double> parse_double(std::string_view text);

/// Units sorted by id; each unit's rows ordered by (cycle, file order).
std::vector<UnitSeries> load_csv(const std::filesystem::path& path, const DataSchema& schema = {});
void save_csv(const std::filesystem::path& path, const std::vector<UnitSeries>& fleet,
              const DataSchema& schema = {});

std::vector<GroundTruth> load_ground_truth(const std::filesystem::path& path);
void save_ground_truth(const std::filesystem::path& path, const std::vector<GroundTruth>& truth);

inline constexpr int kCheckpointVersion = 1;

struct TrainingMeta {
  std::uint64_t master_seed = 0;
  int realisation = 0;
  std::uint64_t split_seed = 0;
  std::uint64_t init_seed = 0;
  int healthy_cycles_per_unit = 16;
  double validation_fraction = 0.15;
  int epochs_run = 0;
  int best_epoch = 0;
  double final_train_loss = 0.0;
  double final_val_loss = 0.0;
  double best_val_loss = 0.0;
};

struct Checkpoint {
  ModelKind kind = ModelKind::OC;
  DenseNet net;
  Standardizer standardizer;
  std::vector<std::string> w_names;
  std::vector<std::string> x_names;
  TrainingMeta meta;

  AeModel ae() const;  // KindMismatch unless kind == AE
  OcModel oc() const;  // KindMismatch unless kind == OC
};

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
/// With `expected`, a checkpoint of the other kind raises KindMismatch.
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           std::optional<ModelKind> expected = std::nullopt);

}  // namespace resfault
