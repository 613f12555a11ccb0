#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace affseg {

enum class Errc {
  BadMagic,
  BadHeader,
  UnknownDtype,
  TruncatedPayload,
  InvalidValue,
  IoFailure,
  ShapeMismatch,
  OutOfBounds,
  InvalidArgument,
  MissingEdge,
  DegenerateTraining,
  TreeBaseMismatch,
  InvalidPartition,
  CoverageGap,
  TooManySeeds,
  EmptyOverlap,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above so that
/// callers (the CLI in particular) can map it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace affseg
