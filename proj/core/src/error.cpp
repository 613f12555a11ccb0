#include "affseg/error.hpp"

namespace affseg {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::BadMagic: return "BadMagic";
    case Errc::BadHeader: return "BadHeader";
    case Errc::UnknownDtype: return "UnknownDtype";
    case Errc::TruncatedPayload: return "TruncatedPayload";
    case Errc::InvalidValue: return "InvalidValue";
    case Errc::IoFailure: return "IoFailure";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::OutOfBounds: return "OutOfBounds";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::MissingEdge: return "MissingEdge";
    case Errc::DegenerateTraining: return "DegenerateTraining";
    case Errc::TreeBaseMismatch: return "TreeBaseMismatch";
    case Errc::InvalidPartition: return "InvalidPartition";
    case Errc::CoverageGap: return "CoverageGap";
    case Errc::TooManySeeds: return "TooManySeeds";
    case Errc::EmptyOverlap: return "EmptyOverlap";
  }
  return "Unknown";
}

}  // namespace affseg
