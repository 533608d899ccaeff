#include "wdmix/error.hpp"

namespace wdmix {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonRectangular: return "NonRectangular";
    case ErrorCode::NaNInput: return "NaNInput";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::InvalidProportions: return "InvalidProportions";
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::NonPositiveShape: return "NonPositiveShape";
    case ErrorCode::NonPositiveArgument: return "NonPositiveArgument";
    case ErrorCode::DegenerateRow: return "DegenerateRow";
    case ErrorCode::EmptyComponent: return "EmptyComponent";
    case ErrorCode::NoActiveComponents: return "NoActiveComponents";
    case ErrorCode::AllAnnihilated: return "AllAnnihilated";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::QTooLarge: return "QTooLarge";
    case ErrorCode::EmptyCluster: return "EmptyCluster";
    case ErrorCode::SingleCluster: return "SingleCluster";
    case ErrorCode::MissingFlags: return "MissingFlags";
    case ErrorCode::SingleModality: return "SingleModality";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace wdmix
