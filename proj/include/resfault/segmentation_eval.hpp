#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "resfault/detector.hpp"

namespace resfault {

enum class SignatureNorm { Max, ZScore };

std::string_view to_string(SignatureNorm norm) noexcept;
SignatureNorm parse_signature_norm(std::string_view text);

/// Normalized cycle-averaged sensor-wise HI of one unit at one cycle.
struct UnitSignature {
  int unit_id = 0;
  std::string fault_label;  // ground truth, evaluation only
  VectorXd vector;
};

/// Max-normalization divides by the row maximum (zero rows stay zero);
/// z-score subtracts the row mean and divides by the row standard deviation.
VectorXd normalize_signature(const VectorXd& row, SignatureNorm norm);

/// Signature at cycle n0 + k.
UnitSignature snapshot(const DetectionReport& report, const CycleHi& cycle_hi, int k = 10,
                       SignatureNorm norm = SignatureNorm::Max, std::string fault_label = {});

struct Pca2d {
  MatrixXd coords;      // n x 2 projections onto PC1, PC2
  MatrixXd components;  // d x 2, unit-norm columns
  Eigen::Vector2d eigenvalues;
  VectorXd mean;
};

/// Covariance eigendecomposition of mean-centered rows. Each component's
/// largest-magnitude entry is made positive.
Pca2d pca_2d(const MatrixXd& points);
Pca2d pca_2d(std::span<const UnitSignature> signatures);

MatrixXd stack_signatures(std::span<const UnitSignature> signatures);

/// Per-sample silhouette values with Euclidean distance; singleton clusters
/// score 0.
std::vector<double> silhouette_samples(const MatrixXd& points, std::span<const int> labels);
/// Mean silhouette value.
double silhouette(const MatrixXd& points, std::span<const int> labels);

/// Maps string labels to dense integer ids in order of first appearance.
std::vector<int> encode_labels(std::span<const std::string> labels);

struct SegmentationUnit {
  DetectionReport report;
  CycleHi cycle_hi;  // sensor-wise
  std::string fault_label;
};

struct SilhouettePoint {
  int k = 0;
  double score = 0.0;  // NaN when fewer than two labels survive at this k
  std::size_t units = 0;
};

/// Silhouette of snapshot signatures grouped by fault label for every k in
/// [k_min, k_max]. Units without an alarm, or ending before n0 + k, are left
/// out at that k.
std::vector<SilhouettePoint> silhouette_curve(std::span<const SegmentationUnit> fleet, int k_min,
                                              int k_max, SignatureNorm norm = SignatureNorm::Max);

inline const std::vector<int> kTimelineCheckpoints{10, 20, 30, 40};

/// Per channel, the first checkpoint c with cycle-averaged HI above tau at
/// cycle n0 + c; nullopt means not triggered by the last checkpoint.
std::vector<std::optional<int>> trigger_timeline(const DetectionReport& report,
                                                 const HealthyStats& stats,
                                                 const CycleHi& cycle_hi,
                                                 std::span<const int> checkpoints = kTimelineCheckpoints);

}  // namespace resfault
