#pragma once

#include <span>
#include <string>

#include "drishti/report.hpp"
#include "drishti/route.hpp"

namespace drishti::guide {

constexpr double kFeetPerMeter = 3.28084;
constexpr double kDefaultSpeakingRate = 0.8;

struct GuidanceMessage {
  std::string text;
  double speaking_rate = kDefaultSpeakingRate;  // fraction of nominal speech rate, (0, 1]
};

/// Whole feet, rounded half away from zero. Throws NegativeDistance.
long meters_to_feet(double meters);

/// "Head <phrase>", followed when objects are present by
/// " but beware there is <label> is at <n> feet" with further objects appended
/// as " and <label> is at <n> feet", nearest first, unknown distances last.
GuidanceMessage compose_guidance(const route::RouteStep& step, std::span<const ObjectReport> reports);

/// Same, with the heading phrase given directly.
GuidanceMessage compose_guidance(std::string_view phrase, std::span<const ObjectReport> reports);

/// "SPEAK[rate=0.8]: <text>"
std::string speak_line(const GuidanceMessage& message);

}  // namespace drishti::guide
