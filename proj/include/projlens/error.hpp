#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace projlens {

enum class Errc {
  Io,
  BadMagic,
  UnsupportedDtype,
  BadShape,
  NonFinite,
  EmptyMatrix,
  CountMismatch,
  DuplicateToken,
  MissingField,
  ParseError,
  MalformedRle,
  LengthMismatch,
  DimensionMismatch,
  InvalidArgument,
  OutOfRange,
  UntokenizableSegment,
  ZeroNorm,
  ZeroInput,
  NoEvaluableObjects,
  Diverged,
};

std::string_view errc_name(Errc code) noexcept;

// Every failure surfaced by the library carries one of the codes above so the
// CLI can emit it as a machine-readable error line.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }
  // The message without the "Code: " prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace projlens
