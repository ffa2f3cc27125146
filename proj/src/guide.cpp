#include "drishti/guide.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <vector>

#include <fmt/format.h>

#include "drishti/error.hpp"

namespace drishti::guide {

long meters_to_feet(double meters) {
  if (!(meters >= 0.0)) throw Error(Errc::NegativeDistance, fmt::format("{} m", meters));
  return std::lround(meters * kFeetPerMeter);
}

GuidanceMessage compose_guidance(const route::RouteStep& step, std::span<const ObjectReport> reports) {
  return compose_guidance(step.phrase, reports);
}

GuidanceMessage compose_guidance(std::string_view phrase, std::span<const ObjectReport> reports) {
  std::vector<const ObjectReport*> ordered;
  for (const auto& r : reports) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(), [](const ObjectReport* a, const ObjectReport* b) {
    if (a->distance_m.has_value() != b->distance_m.has_value()) return a->distance_m.has_value();
    if (a->distance_m && *a->distance_m != *b->distance_m) return *a->distance_m < *b->distance_m;
    return std::tie(a->label, a->box) < std::tie(b->label, b->box);
  });

  GuidanceMessage msg;
  msg.text = fmt::format("Head {}", phrase);
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    const ObjectReport& r = *ordered[i];
    msg.text += i == 0 ? " but beware there is " : " and ";
    if (r.distance_m)
      msg.text += fmt::format("{} is at {} feet", r.label, meters_to_feet(*r.distance_m));
    else
      msg.text += fmt::format("{} is at unknown distance", r.label);
  }
  return msg;
}

std::string speak_line(const GuidanceMessage& message) {
  return fmt::format("SPEAK[rate={}]: {}", message.speaking_rate, message.text);
}

}  // namespace drishti::guide
