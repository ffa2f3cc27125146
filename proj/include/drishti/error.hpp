#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace drishti {

enum class Errc {
  // media-io
  BadMagic,
  TruncatedData,
  MaxvalUnsupported,
  SizeMismatch,
  MissingBoardHeader,
  IncompleteView,
  NonFiniteCoordinate,
  UnknownLabel,
  BadBBox,
  BadConfidence,
  MalformedLine,
  DuplicateLabel,
  // calib
  BehindCamera,
  DegenerateConfiguration,
  IllConditioned,
  TooFewViews,
  NonConvergence,
  DivergedPose,
  ViewMismatch,
  DegenerateBaseline,
  // stereo
  NonPositiveDisparity,
  NoValidDepth,
  InvalidParams,
  // route
  DanglingEdge,
  BadCoordinate,
  DuplicateNodeId,
  DestinationNotFound,
  AmbiguousDestination,
  UnknownNode,
  NoRoute,
  // guide
  NegativeDistance,
  // wire
  PayloadTooLarge,
  BindFailure,
  ConnectFailure,
  // cli-sim
  ConfigError,
  IoFailure,
};

std::string_view to_string(Errc code) noexcept;

/// Typed error carried by every module. `line()` is 1-based for text parsers,
/// 0 when the error has no source position.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, std::size_t line = 0);

  Errc code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }

 private:
  Errc code_;
  std::size_t line_;
};

}  // namespace drishti
