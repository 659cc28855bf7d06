#include "resfault/detector.hpp"

#include <algorithm>

#include "resfault/error.hpp"

namespace resfault {

HealthyStats fit_stats(const MatrixXd& healthy_values) {
  if (healthy_values.rows() < 2) {
    throw Error(Errc::InsufficientData, "healthy statistics need at least 2 rows");
  }
  HealthyStats s;
  const double n = static_cast<double>(healthy_values.rows());
  s.mu = healthy_values.colwise().mean().transpose();
  const MatrixXd centered = healthy_values.rowwise() - s.mu.transpose();
  s.sigma = (centered.array().square().colwise().sum() / n).sqrt().transpose();
  s.tau = s.mu + kSigmaMultiplier * s.sigma;
  s.fitted_on = healthy_values.rows();
  return s;
}

std::optional<Index> CycleHi::position_of(int cycle) const {
  const auto it = std::lower_bound(cycles.begin(), cycles.end(), cycle);
  if (it == cycles.end() || *it != cycle) return std::nullopt;
  return static_cast<Index>(it - cycles.begin());
}

CycleHi CycleHi::from_cycle(int first_cycle) const {
  const auto it = std::lower_bound(cycles.begin(), cycles.end(), first_cycle);
  const auto start = static_cast<Index>(it - cycles.begin());
  CycleHi out;
  out.cycles.assign(it, cycles.end());
  out.values = values.bottomRows(values.rows() - start);
  return out;
}

CycleHi cycle_average(const MatrixXd& values, const std::vector<int>& cycle_of) {
  if (static_cast<Index>(cycle_of.size()) != values.rows()) {
    throw Error(Errc::ShapeMismatch, "cycle index count does not match HI rows");
  }
  CycleHi out;
  std::vector<std::pair<Index, Index>> spans;
  Index begin = 0;
  for (Index t = 1; t <= values.rows(); ++t) {
    if (t == values.rows() || cycle_of[static_cast<std::size_t>(t)] !=
                                  cycle_of[static_cast<std::size_t>(begin)]) {
      out.cycles.push_back(cycle_of[static_cast<std::size_t>(begin)]);
      spans.emplace_back(begin, t);
      begin = t;
    }
  }
  out.values.resize(static_cast<Index>(spans.size()), values.cols());
  for (std::size_t c = 0; c < spans.size(); ++c) {
    const auto [b, e] = spans[c];
    out.values.row(static_cast<Index>(c)) = values.middleRows(b, e - b).colwise().mean();
  }
  return out;
}

CycleHi cycle_average(const HiSeries& hi) { return cycle_average(hi.values, hi.cycle_of); }

Detection detect(const CycleHi& cycle_hi, const HealthyStats& stats, int n_wait) {
  if (n_wait < 1) throw Error(Errc::ConfigInvalid, "n_wait must be >= 1");
  if (cycle_hi.values.cols() != stats.channels()) {
    throw Error(Errc::ShapeMismatch, "HI has " + std::to_string(cycle_hi.values.cols()) +
                                         " channels, statistics have " +
                                         std::to_string(stats.channels()));
  }
  const Index n_cycles = cycle_hi.values.rows();
  const Index n_channels = cycle_hi.values.cols();
  Detection d;
  d.exceedance.resize(static_cast<std::size_t>(n_cycles));
  std::vector<int> run(static_cast<std::size_t>(n_channels), 0);
  for (Index c = 0; c < n_cycles; ++c) {
    auto& above = d.exceedance[static_cast<std::size_t>(c)];
    for (Index k = 0; k < n_channels; ++k) {
      auto& r = run[static_cast<std::size_t>(k)];
      if (cycle_hi.values(c, k) > stats.tau(k)) {
        above.push_back(k);
        ++r;
      } else {
        r = 0;
      }
    }
    if (!d.alarm_position) {
      for (Index k = 0; k < n_channels; ++k) {
        if (run[static_cast<std::size_t>(k)] >= n_wait) d.triggered_first.push_back(k);
      }
      if (!d.triggered_first.empty()) {
        d.alarm_position = c;
        d.alarm_cycle = cycle_hi.cycles[static_cast<std::size_t>(c)];
      }
    }
  }
  return d;
}

int detection_delay(int n0, int n_true) { return n0 - n_true; }

bool DetectionReport::false_positive() const noexcept {
  if (!alarm_cycle) return false;
  if (!n_true) return true;
  return *alarm_cycle < *n_true;
}

DetectionReport make_report(int unit_id, std::string dataset_id, std::optional<int> n_true,
                            const CycleHi& cycle_hi, const Detection& detection) {
  DetectionReport r;
  r.unit_id = unit_id;
  r.dataset_id = std::move(dataset_id);
  r.n_true = n_true;
  r.alarm_cycle = detection.alarm_cycle;
  if (r.alarm_cycle && r.n_true) r.delay = detection_delay(*r.alarm_cycle, *r.n_true);
  r.cycles = cycle_hi.cycles;
  r.per_cycle_exceedance = detection.exceedance;
  r.triggered_first = detection.triggered_first;
  return r;
}

double false_positive_rate(std::span<const DetectionReport> reports) {
  if (reports.empty()) throw Error(Errc::EmptyFleet, "false positive rate of an empty fleet");
  const auto fp = std::count_if(reports.begin(), reports.end(),
                                [](const DetectionReport& r) { return r.false_positive(); });
  return static_cast<double>(fp) / static_cast<double>(reports.size());
}

std::optional<double> mean_detection_delay(std::span<const DetectionReport> reports) {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : reports) {
    if (r.delay) {
      sum += *r.delay;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

}  // namespace resfault
