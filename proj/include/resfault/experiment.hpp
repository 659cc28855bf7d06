#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "resfault/config.hpp"
#include "resfault/detector.hpp"
#include "resfault/io_persistence.hpp"
#include "resfault/segmentation_eval.hpp"

namespace resfault {

/// Analysis rows of every unit plus the ground truth aligned with them.
struct PreparedData {
  std::vector<UnitSeries> units;  // dataset id = fault family when known
  std::vector<GroundTruth> truth;
  bool has_truth = false;
};

/// Without `truth`, every unit is treated as fault-free with family "unknown".
PreparedData prepare_data(const std::vector<UnitSeries>& raw,
                          const std::optional<std::vector<GroundTruth>>& truth,
                          const PreprocessConfig& config);

inline constexpr const char* kDataFile = "data.csv";
inline constexpr const char* kTruthFile = "ground_truth.csv";

/// Reads data.csv and, when present, ground_truth.csv from `data_dir`.
PreparedData load_data_dir(const std::filesystem::path& data_dir, const PreprocessConfig& config);

struct RealisationSeeds {
  std::uint64_t split = 0;
  std::uint64_t ae = 0;
  std::uint64_t oc = 0;
};

RealisationSeeds realisation_seeds(std::uint64_t master_seed, int realisation);

struct PreparedSplit {
  Split split;
  Standardizer standardizer;  // over z, fitted on the training rows
};

PreparedSplit prepare_split(const PreparedData& data, int healthy_cycles, double validation_fraction,
                            std::uint64_t split_seed, double epsilon);

struct TrainedModel {
  Checkpoint checkpoint;
  std::vector<EpochRecord> history;
};

TrainedModel train_model(const PreparedData& data, const RunConfig& config, ModelKind kind,
                         int realisation);

/// Standardizes the unit's rows with the checkpoint and returns its residuals.
MatrixXd unit_residuals(const Checkpoint& checkpoint, const UnitSeries& series);
/// Names of the residual channels: z names for AE, sensor names for OC.
std::vector<std::string> residual_channels(const Checkpoint& checkpoint);

struct DetectionRun {
  ModelKind model = ModelKind::OC;
  HiKind hi = HiKind::Aggregated;
  int realisation = 0;
  HealthyStats stats;
  std::vector<std::string> channel_names;
  std::vector<DetectionReport> reports;  // one per unit
  std::vector<CycleHi> cycle_hi;         // test cycles only, one per unit
  std::vector<std::string> labels;       // fault family per unit
};

/// Fits thresholds on the healthy validation rows of the checkpoint's split
/// and scans the test cycles of every unit.
DetectionRun run_detection(const PreparedData& data, const Checkpoint& checkpoint, HiKind hi,
                           const RunConfig& config);

struct TimelineRow {
  int unit_id = 0;
  std::string fault_label;
  std::vector<std::optional<int>> first_checkpoint;  // per channel
};

struct EmbeddingPoint {
  int unit_id = 0;
  std::string fault_label;
  VectorXd embedding;
};

struct SegmentationResult {
  ModelKind model = ModelKind::OC;
  int realisation = 0;
  std::vector<std::string> channel_names;
  std::vector<UnitSignature> signatures;  // at the configured snapshot offset
  std::optional<Pca2d> pca;
  std::optional<double> snapshot_silhouette;
  std::vector<SilhouettePoint> curve;
  std::vector<TimelineRow> timelines;
  /// AE bottleneck output averaged over the snapshot cycle (AE only).
  std::vector<EmbeddingPoint> embedding;
  std::optional<Pca2d> embedding_pca;
  std::optional<double> embedding_silhouette;
};

/// `sensorwise` must be a sensor-wise run. Only faulty units with an alarm
/// take part. Throws SingleCluster when fewer than two families alarm.
SegmentationResult run_segmentation(const PreparedData& data, const Checkpoint& checkpoint,
                                    const DetectionRun& sensorwise, const RunConfig& config);

/// Flat per-unit detection outcome, the unit of exchange between commands.
struct ReportRow {
  int unit_id = 0;
  std::string dataset_id;
  ModelKind model = ModelKind::OC;
  HiKind hi = HiKind::Aggregated;
  int realisation = 0;
  std::optional<int> n_true;
  std::optional<int> alarm_cycle;
  std::optional<int> delay;
  bool false_positive = false;
  std::vector<std::string> triggered_first;

  bool operator==(const ReportRow&) const = default;
};

std::vector<ReportRow> report_rows(const DetectionRun& run);
void save_reports(const std::filesystem::path& path, std::span<const ReportRow> rows);
std::vector<ReportRow> load_reports(const std::filesystem::path& path);

struct MethodSummary {
  ModelKind model = ModelKind::OC;
  HiKind hi = HiKind::Aggregated;
  int realisations = 0;
  /// Mean over realisations of the per-realisation mean delay of detected
  /// faulty units; realisations without any detection are skipped.
  std::optional<double> mean_delay;
  double fpr = 0.0;  // mean over realisations
  std::vector<std::optional<double>> per_realisation_delay;
  std::vector<double> per_realisation_fpr;
};

struct UnitSummary {
  int unit_id = 0;
  std::string dataset_id;
  ModelKind model = ModelKind::OC;
  HiKind hi = HiKind::Aggregated;
  std::optional<int> n_true;
  std::optional<double> mean_delay;  // over realisations with a delay
  int detected = 0;                  // realisations with a delay
  int realisations = 0;
};

struct EvaluationSummary {
  std::vector<MethodSummary> methods;  // ordered by (model, hi)
  std::vector<UnitSummary> units;      // ordered by (model, hi, unit)

  const MethodSummary* find(ModelKind model, HiKind hi) const;
};

EvaluationSummary evaluate_reports(std::span<const ReportRow> rows);

/// "-" for nullopt, shortest round-trip text otherwise.
std::string format_optional(const std::optional<double>& value);

struct RealisationResult {
  int realisation = 0;
  std::vector<DetectionRun> runs;  // (ae, oc) x (aggregated, sensorwise)
  std::vector<SegmentationResult> segmentation;  // ae, oc
  std::vector<TrainedModel> models;              // ae, oc
};

struct ExperimentResult {
  std::vector<RealisationResult> realisations;
  EvaluationSummary summary;
  /// Per model, silhouette-vs-k averaged over realisations.
  std::vector<std::vector<SilhouettePoint>> mean_curve;  // ae, oc

  const DetectionRun& run(int realisation, ModelKind model, HiKind hi) const;
};

/// The full protocol: for every realisation re-split, train both models,
/// detect with both HI kinds and segment.
ExperimentResult run_experiment(const PreparedData& data, const RunConfig& config);

}  // namespace resfault
