#include "drishti/detect.hpp"

#include <algorithm>
#include <tuple>

#include "drishti/error.hpp"
#include "drishti/stereo.hpp"

namespace drishti::detect {

std::vector<Detection> detect(std::string_view frame_id, const io::AnnotationSet& source, double min_confidence) {
  std::vector<Detection> out;
  const auto it = source.frames.find(frame_id);
  if (it == source.frames.end()) return out;
  for (const auto& a : it->second)
    if (a.confidence >= min_confidence) out.push_back(Detection{a.label, a.box, a.confidence});
  std::sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    return std::tie(a.label, a.box.x, a.box.y, a.box.w, a.box.h) < std::tie(b.label, b.box.x, b.box.y, b.box.w, b.box.h);
  });
  return out;
}

std::vector<ObjectReport> report_objects(std::span<const Detection> detections, const DepthMap& depth) {
  std::vector<ObjectReport> out;
  out.reserve(detections.size());
  for (const auto& d : detections) {
    ObjectReport r{d.label, std::nullopt, d.box};
    try {
      r.distance_m = stereo::object_distance(depth, d.box);
    } catch (const Error& e) {
      if (e.code() != Errc::NoValidDepth && e.code() != Errc::BadBBox) throw;
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace drishti::detect
