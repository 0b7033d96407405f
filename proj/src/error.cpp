#include "hmlab/error.hpp"

namespace hmlab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutsideTubularNeighborhood: return "OutsideTubularNeighborhood";
    case ErrorCode::NotOnTarget: return "NotOnTarget";
    case ErrorCode::NonTangentInput: return "NonTangentInput";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::UnsupportedOrder: return "UnsupportedOrder";
    case ErrorCode::InvalidExponents: return "InvalidExponents";
    case ErrorCode::OffTarget: return "OffTarget";
    case ErrorCode::ChartRadiusExceeded: return "ChartRadiusExceeded";
    case ErrorCode::NewtonDivergence: return "NewtonDivergence";
    case ErrorCode::EigensolveFailure: return "EigensolveFailure";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::InsufficientDecades: return "InsufficientDecades";
    case ErrorCode::DegenerateWindow: return "DegenerateWindow";
    case ErrorCode::NotCritical: return "NotCritical";
    case ErrorCode::InsufficientTail: return "InsufficientTail";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::ConfigParse: return "ConfigParse";
    case ErrorCode::InadmissibleExponents: return "InadmissibleExponents";
    case ErrorCode::Io: return "Io";
    case ErrorCode::VersionError: return "VersionError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SpecMismatch: return "SpecMismatch";
  }
  return "Unknown";
}

}  // namespace hmlab
