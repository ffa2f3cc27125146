#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drishti/image.hpp"
#include "drishti/media_io.hpp"
#include "drishti/report.hpp"

namespace drishti::detect {

struct Detection {
  std::string label;
  BBox box;
  double confidence = 0.0;

  bool operator==(const Detection&) const = default;
};

/// Anything that can localize labelled objects in a frame.
class Detector {
 public:
  virtual ~Detector() = default;
  virtual std::vector<Detection> detect(std::string_view frame_id) const = 0;
};

/// Detections for `frame_id` with confidence >= min_confidence, highest confidence
/// first, ties by (label, x, y). Unknown frames yield an empty list.
std::vector<Detection> detect(std::string_view frame_id, const io::AnnotationSet& source, double min_confidence = 0.5);

/// Replays recorded annotations in place of a neural detector.
class AnnotationDetector final : public Detector {
 public:
  explicit AnnotationDetector(io::AnnotationSet source, double min_confidence = 0.5)
      : source_(std::move(source)), min_confidence_(min_confidence) {}

  std::vector<Detection> detect(std::string_view frame_id) const override {
    return detect::detect(frame_id, source_, min_confidence_);
  }

 private:
  io::AnnotationSet source_;
  double min_confidence_;
};

/// One report per detection, in input order; boxes without valid depth keep an unknown distance.
std::vector<ObjectReport> report_objects(std::span<const Detection> detections, const DepthMap& depth);

}  // namespace drishti::detect
