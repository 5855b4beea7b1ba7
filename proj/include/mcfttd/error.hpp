#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mcfttd {

enum class ErrorKind {
  WavelengthOutOfRange,
  InvalidProfile,
  NoGuidedMode,
  ConvergenceFailure,
  StencilOutOfRange,
  OutsideValidityBand,
  NoSolutionInBox,
  SolverDivergence,
  DesignInfeasible,
  DegenerateCores,
  InvalidLayout,
  ChannelNotFound,
  CoreNotFound,
  EmptyTapSet,
  InvalidTapSet,
  EmptyOrSingleTap,
  NonUniformSpacing,
  InsufficientPeaks,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::WavelengthOutOfRange: return "WavelengthOutOfRange";
    case ErrorKind::InvalidProfile: return "InvalidProfile";
    case ErrorKind::NoGuidedMode: return "NoGuidedMode";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::StencilOutOfRange: return "StencilOutOfRange";
    case ErrorKind::OutsideValidityBand: return "OutsideValidityBand";
    case ErrorKind::NoSolutionInBox: return "NoSolutionInBox";
    case ErrorKind::SolverDivergence: return "SolverDivergence";
    case ErrorKind::DesignInfeasible: return "DesignInfeasible";
    case ErrorKind::DegenerateCores: return "DegenerateCores";
    case ErrorKind::InvalidLayout: return "InvalidLayout";
    case ErrorKind::ChannelNotFound: return "ChannelNotFound";
    case ErrorKind::CoreNotFound: return "CoreNotFound";
    case ErrorKind::EmptyTapSet: return "EmptyTapSet";
    case ErrorKind::InvalidTapSet: return "InvalidTapSet";
    case ErrorKind::EmptyOrSingleTap: return "EmptyOrSingleTap";
    case ErrorKind::NonUniformSpacing: return "NonUniformSpacing";
    case ErrorKind::InsufficientPeaks: return "InsufficientPeaks";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the ErrorKind tags so
/// callers (and the CLI exit-code mapping) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mcfttd
