#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace resfault {

/// Every failure the library reports carries one of these codes.
enum class Errc {
  // configuration
  ConfigInvalid,
  UnknownKey,
  ConfigType,
  // data / files
  Io,
  EmptyFile,
  MissingColumn,
  NonNumericCell,
  UnitTooShort,
  NonPositiveAltitude,
  VersionMismatch,
  CorruptCheckpoint,
  KindMismatch,
  MissingGroundTruth,
  // computation
  ShapeMismatch,
  InsufficientData,
  EmptyDataset,
  EmptyFleet,
  NoAlarm,
  CycleOutOfRange,
  SingleCluster,
};

/// Coarse grouping used for process exit codes.
enum class ErrorCategory { Config, Data, Computation };

ErrorCategory category_of(Errc code) noexcept;
std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  Errc code_;
};

}  // namespace resfault
