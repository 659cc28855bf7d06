#include "resfault/health_indicators.hpp"

#include "resfault/error.hpp"

namespace resfault {

std::string_view to_string(HiKind kind) noexcept {
  return kind == HiKind::Aggregated ? "aggregated" : "sensorwise";
}

HiKind parse_hi_kind(std::string_view text) {
  if (text == "aggregated") return HiKind::Aggregated;
  if (text == "sensorwise") return HiKind::Sensorwise;
  throw Error(Errc::ConfigInvalid, "unknown HI kind '" + std::string(text) + "'");
}

MatrixXd aggregated_hi(const MatrixXd& residuals) {
  return residuals.rowwise().norm();
}

MatrixXd sensorwise_hi(const MatrixXd& residuals) { return residuals.cwiseAbs(); }

HiSeries make_hi(const MatrixXd& residuals, HiKind kind, ModelKind source,
                 std::vector<std::string> channel_names, std::vector<int> cycle_of) {
  if (static_cast<Index>(cycle_of.size()) != residuals.rows()) {
    throw Error(Errc::ShapeMismatch, "cycle index count does not match residual rows");
  }
  HiSeries hi;
  hi.kind = kind;
  hi.source = source;
  hi.cycle_of = std::move(cycle_of);
  if (kind == HiKind::Aggregated) {
    hi.values = aggregated_hi(residuals);
    hi.channel_names = {"aggregated"};
  } else {
    if (static_cast<Index>(channel_names.size()) != residuals.cols()) {
      throw Error(Errc::ShapeMismatch, "channel name count does not match residual width");
    }
    hi.values = sensorwise_hi(residuals);
    hi.channel_names = std::move(channel_names);
  }
  return hi;
}

}  // namespace resfault
