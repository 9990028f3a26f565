#include "projlens/error.hpp"

namespace projlens {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::Io: return "Io";
    case Errc::BadMagic: return "BadMagic";
    case Errc::UnsupportedDtype: return "UnsupportedDtype";
    case Errc::BadShape: return "BadShape";
    case Errc::NonFinite: return "NonFinite";
    case Errc::EmptyMatrix: return "EmptyMatrix";
    case Errc::CountMismatch: return "CountMismatch";
    case Errc::DuplicateToken: return "DuplicateToken";
    case Errc::MissingField: return "MissingField";
    case Errc::ParseError: return "ParseError";
    case Errc::MalformedRle: return "MalformedRle";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::UntokenizableSegment: return "UntokenizableSegment";
    case Errc::ZeroNorm: return "ZeroNorm";
    case Errc::ZeroInput: return "ZeroInput";
    case Errc::NoEvaluableObjects: return "NoEvaluableObjects";
    case Errc::Diverged: return "Diverged";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code), detail_(message) {}

}  // namespace projlens
