#include "resfault/error.hpp"

namespace resfault {

ErrorCategory category_of(Errc code) noexcept {
  switch (code) {
    case Errc::ConfigInvalid:
    case Errc::UnknownKey:
    case Errc::ConfigType:
      return ErrorCategory::Config;
    case Errc::Io:
    case Errc::EmptyFile:
    case Errc::MissingColumn:
    case Errc::NonNumericCell:
    case Errc::UnitTooShort:
    case Errc::NonPositiveAltitude:
    case Errc::VersionMismatch:
    case Errc::CorruptCheckpoint:
    case Errc::KindMismatch:
    case Errc::MissingGroundTruth:
      return ErrorCategory::Data;
    default:
      return ErrorCategory::Computation;
  }
}

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::UnknownKey: return "UnknownKey";
    case Errc::ConfigType: return "ConfigType";
    case Errc::Io: return "Io";
    case Errc::EmptyFile: return "EmptyFile";
    case Errc::MissingColumn: return "MissingColumn";
    case Errc::NonNumericCell: return "NonNumericCell";
    case Errc::UnitTooShort: return "UnitTooShort";
    case Errc::NonPositiveAltitude: return "NonPositiveAltitude";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::CorruptCheckpoint: return "CorruptCheckpoint";
    case Errc::KindMismatch: return "KindMismatch";
    case Errc::MissingGroundTruth: return "MissingGroundTruth";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::EmptyFleet: return "EmptyFleet";
    case Errc::NoAlarm: return "NoAlarm";
    case Errc::CycleOutOfRange: return "CycleOutOfRange";
    case Errc::SingleCluster: return "SingleCluster";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace resfault
