#include "resfault/segmentation_eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <Eigen/Eigenvalues>

#include "resfault/error.hpp"

namespace resfault {

std::string_view to_string(SignatureNorm norm) noexcept {
  return norm == SignatureNorm::Max ? "max" : "zscore";
}

SignatureNorm parse_signature_norm(std::string_view text) {
  if (text == "max") return SignatureNorm::Max;
  if (text == "zscore") return SignatureNorm::ZScore;
  throw Error(Errc::ConfigInvalid, "unknown signature normalization '" + std::string(text) + "'");
}

VectorXd normalize_signature(const VectorXd& row, SignatureNorm norm) {
  if (row.size() == 0) return row;
  if (norm == SignatureNorm::Max) {
    const double peak = row.maxCoeff();
    return peak > 0.0 ? VectorXd(row / peak) : VectorXd(VectorXd::Zero(row.size()));
  }
  const double mean = row.mean();
  const double sd = std::sqrt((row.array() - mean).square().mean());
  if (!(sd > 0.0)) return VectorXd::Zero(row.size());
  return (row.array() - mean) / sd;
}

UnitSignature snapshot(const DetectionReport& report, const CycleHi& cycle_hi, int k,
                       SignatureNorm norm, std::string fault_label) {
  if (!report.alarm_cycle) {
    throw Error(Errc::NoAlarm, "unit " + std::to_string(report.unit_id) + " has no alarm");
  }
  const int target = *report.alarm_cycle + k;
  const auto pos = cycle_hi.position_of(target);
  if (!pos) {
    throw Error(Errc::CycleOutOfRange,
                "unit " + std::to_string(report.unit_id) + " has no cycle " + std::to_string(target));
  }
  return {report.unit_id, std::move(fault_label),
          normalize_signature(cycle_hi.values.row(*pos).transpose(), norm)};
}

MatrixXd stack_signatures(std::span<const UnitSignature> signatures) {
  if (signatures.empty()) return {};
  MatrixXd out(static_cast<Index>(signatures.size()), signatures.front().vector.size());
  for (std::size_t i = 0; i < signatures.size(); ++i) {
    if (signatures[i].vector.size() != out.cols()) {
      throw Error(Errc::ShapeMismatch, "signatures differ in length");
    }
    out.row(static_cast<Index>(i)) = signatures[i].vector.transpose();
  }
  return out;
}

Pca2d pca_2d(const MatrixXd& points) {
  if (points.rows() < 3) throw Error(Errc::InsufficientData, "PCA needs at least 3 points");
  if (points.cols() < 2) throw Error(Errc::InsufficientData, "PCA needs at least 2 dimensions");
  Pca2d out;
  out.mean = points.colwise().mean().transpose();
  const MatrixXd centered = points.rowwise() - out.mean.transpose();
  const MatrixXd cov = centered.transpose() * centered / static_cast<double>(points.rows() - 1);
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw Error(Errc::InsufficientData, "covariance eigendecomposition failed");
  }
  const Index d = cov.rows();
  out.components.resize(d, 2);
  for (Index c = 0; c < 2; ++c) {
    VectorXd v = solver.eigenvectors().col(d - 1 - c);
    Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    out.components.col(c) = v;
    out.eigenvalues(c) = solver.eigenvalues()(d - 1 - c);
  }
  out.coords = centered * out.components;
  return out;
}

Pca2d pca_2d(std::span<const UnitSignature> signatures) {
  return pca_2d(stack_signatures(signatures));
}

std::vector<double> silhouette_samples(const MatrixXd& points, std::span<const int> labels) {
  const Index n = points.rows();
  if (static_cast<Index>(labels.size()) != n) {
    throw Error(Errc::ShapeMismatch, "one label per point required");
  }
  std::map<int, int> sizes;
  for (int l : labels) ++sizes[l];
  if (sizes.size() < 2) throw Error(Errc::SingleCluster, "silhouette needs at least two clusters");

  std::vector<double> s(static_cast<std::size_t>(n), 0.0);
  std::map<int, double> sum;
  for (Index i = 0; i < n; ++i) {
    const int own = labels[static_cast<std::size_t>(i)];
    if (sizes[own] == 1) continue;
    for (const auto& [label, count] : sizes) sum[label] = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      sum[labels[static_cast<std::size_t>(j)]] += (points.row(i) - points.row(j)).norm();
    }
    const double intra = sum[own] / (sizes[own] - 1);
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& [label, total] : sum) {
      if (label != own) nearest = std::min(nearest, total / sizes[label]);
    }
    const double denom = std::max(intra, nearest);
    s[static_cast<std::size_t>(i)] = denom > 0.0 ? (nearest - intra) / denom : 0.0;
  }
  return s;
}

double silhouette(const MatrixXd& points, std::span<const int> labels) {
  const auto s = silhouette_samples(points, labels);
  double total = 0.0;
  for (double v : s) total += v;
  return total / static_cast<double>(s.size());
}

std::vector<int> encode_labels(std::span<const std::string> labels) {
  std::map<std::string, int> ids;
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    const auto [it, inserted] = ids.emplace(l, static_cast<int>(ids.size()));
    out.push_back(it->second);
  }
  return out;
}

std::vector<SilhouettePoint> silhouette_curve(std::span<const SegmentationUnit> fleet, int k_min,
                                              int k_max, SignatureNorm norm) {
  std::set<std::string> families;
  for (const auto& u : fleet) {
    if (u.report.alarm_cycle) families.insert(u.fault_label);
  }
  if (families.size() < 2) {
    throw Error(Errc::SingleCluster, "units with alarms span fewer than two fault labels");
  }
  std::vector<SilhouettePoint> curve;
  for (int k = k_min; k <= k_max; ++k) {
    std::vector<UnitSignature> sigs;
    std::vector<std::string> labels;
    for (const auto& u : fleet) {
      if (!u.report.alarm_cycle || !u.cycle_hi.position_of(*u.report.alarm_cycle + k)) continue;
      sigs.push_back(snapshot(u.report, u.cycle_hi, k, norm, u.fault_label));
      labels.push_back(u.fault_label);
    }
    const auto ids = encode_labels(labels);
    const std::set<int> distinct(ids.begin(), ids.end());
    double score = std::numeric_limits<double>::quiet_NaN();
    if (distinct.size() >= 2) score = silhouette(stack_signatures(sigs), ids);
    curve.push_back({k, score, sigs.size()});
  }
  return curve;
}

std::vector<std::optional<int>> trigger_timeline(const DetectionReport& report,
                                                 const HealthyStats& stats,
                                                 const CycleHi& cycle_hi,
                                                 std::span<const int> checkpoints) {
  if (!report.alarm_cycle) {
    throw Error(Errc::NoAlarm, "unit " + std::to_string(report.unit_id) + " has no alarm");
  }
  if (cycle_hi.values.cols() != stats.channels()) {
    throw Error(Errc::ShapeMismatch, "HI and statistics disagree on channel count");
  }
  std::vector<int> sorted(checkpoints.begin(), checkpoints.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::optional<int>> category(static_cast<std::size_t>(stats.channels()));
  for (int c : sorted) {
    const auto pos = cycle_hi.position_of(*report.alarm_cycle + c);
    if (!pos) continue;
    for (Index k = 0; k < stats.channels(); ++k) {
      auto& cat = category[static_cast<std::size_t>(k)];
      if (!cat && cycle_hi.values(*pos, k) > stats.tau(k)) cat = c;
    }
  }
  return category;
}

}  // namespace resfault
