#pragma once

#include <stdexcept>
#include <string>

namespace wdmix {

enum class ErrorCode {
  NonRectangular,
  NaNInput,
  LengthMismatch,
  EmptyInput,
  DimensionMismatch,
  NotSymmetric,
  NotPositiveDefinite,
  InvalidProportions,
  NonPositiveWeight,
  NonPositiveShape,
  NonPositiveArgument,
  DegenerateRow,
  EmptyComponent,
  NoActiveComponents,
  AllAnnihilated,
  KTooLarge,
  QTooLarge,
  EmptyCluster,
  SingleCluster,
  MissingFlags,
  SingleModality,
  InvalidArgument,
  Io,
  Parse,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can dispatch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace wdmix
