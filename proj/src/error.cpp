#include "drishti/error.hpp"

namespace drishti {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::BadMagic: return "BadMagic";
    case Errc::TruncatedData: return "TruncatedData";
    case Errc::MaxvalUnsupported: return "MaxvalUnsupported";
    case Errc::SizeMismatch: return "SizeMismatch";
    case Errc::MissingBoardHeader: return "MissingBoardHeader";
    case Errc::IncompleteView: return "IncompleteView";
    case Errc::NonFiniteCoordinate: return "NonFiniteCoordinate";
    case Errc::UnknownLabel: return "UnknownLabel";
    case Errc::BadBBox: return "BadBBox";
    case Errc::BadConfidence: return "BadConfidence";
    case Errc::MalformedLine: return "MalformedLine";
    case Errc::DuplicateLabel: return "DuplicateLabel";
    case Errc::BehindCamera: return "BehindCamera";
    case Errc::DegenerateConfiguration: return "DegenerateConfiguration";
    case Errc::IllConditioned: return "IllConditioned";
    case Errc::TooFewViews: return "TooFewViews";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::DivergedPose: return "DivergedPose";
    case Errc::ViewMismatch: return "ViewMismatch";
    case Errc::DegenerateBaseline: return "DegenerateBaseline";
    case Errc::NonPositiveDisparity: return "NonPositiveDisparity";
    case Errc::NoValidDepth: return "NoValidDepth";
    case Errc::InvalidParams: return "InvalidParams";
    case Errc::DanglingEdge: return "DanglingEdge";
    case Errc::BadCoordinate: return "BadCoordinate";
    case Errc::DuplicateNodeId: return "DuplicateNodeId";
    case Errc::DestinationNotFound: return "DestinationNotFound";
    case Errc::AmbiguousDestination: return "AmbiguousDestination";
    case Errc::UnknownNode: return "UnknownNode";
    case Errc::NoRoute: return "NoRoute";
    case Errc::NegativeDistance: return "NegativeDistance";
    case Errc::PayloadTooLarge: return "PayloadTooLarge";
    case Errc::BindFailure: return "BindFailure";
    case Errc::ConnectFailure: return "ConnectFailure";
    case Errc::ConfigError: return "ConfigError";
    case Errc::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

static std::string format_message(Errc code, const std::string& message, std::size_t line) {
  std::string out(to_string(code));
  if (line != 0) out += " (line " + std::to_string(line) + ")";
  if (!message.empty()) out += ": " + message;
  return out;
}

Error::Error(Errc code, const std::string& message, std::size_t line)
    : std::runtime_error(format_message(code, message, line)), code_(code), line_(line) {}

}  // namespace drishti
