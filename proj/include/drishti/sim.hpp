#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "drishti/calib.hpp"
#include "drishti/detect.hpp"
#include "drishti/media_io.hpp"
#include "drishti/report.hpp"
#include "drishti/route.hpp"
#include "drishti/stereo.hpp"

namespace drishti::sim {

struct FramePair {
  std::string id;
  std::string left;   // PGM path
  std::string right;  // PGM path
};

/// JSON document; relative paths resolve against the config file's directory.
struct SimulationConfig {
  std::string calibration;  // stereo calibration report
  std::vector<FramePair> frames;
  std::string annotations;
  std::string labels;  // empty: built-in 90-label map
  std::string route_graph;
  route::NodeId source = 0;
  std::string destination;  // stand-in for the spoken destination
  stereo::MatchParams match{};
  double min_confidence = 0.5;
};

/// Throws ConfigError when the document is malformed or a path does not exist.
SimulationConfig load_config(const std::string& path);

/// Calibrated rig -> row-aligned images -> disparity -> depth -> detections -> reports.
class Perception {
 public:
  Perception(const calib::StereoRig& rig, io::LabelMap labels, io::AnnotationSet annotations,
             stereo::MatchParams match = {}, double min_confidence = 0.5);

  struct Timings {
    double image_load = 0.0;
    double disparity_depth = 0.0;
    double detection = 0.0;
  };

  std::vector<ObjectReport> perceive(const FramePair& frame, Timings* timings = nullptr) const;
  std::vector<ObjectReport> perceive(const std::string& frame_id, const GrayImage& left, const GrayImage& right,
                                     Timings* timings = nullptr) const;

  const io::LabelMap& labels() const { return labels_; }
  const calib::StereoRig& working_rig() const { return working_rig_; }

 private:
  calib::StereoRig rig_;
  calib::Rectification rect_;
  calib::StereoRig working_rig_;
  bool needs_rectification_ = false;
  io::LabelMap labels_;
  detect::AnnotationDetector detector_;
  stereo::MatchParams match_;
};

struct TimingRow {
  std::string task;
  double seconds = 0.0;
};

/// Rows in fixed order: setup, disparity_depth, image_load, detection, cumulative.
struct TimingReport {
  std::vector<TimingRow> rows;

  std::string to_csv() const;  // "task,seconds" header, millisecond precision
};

struct SimulationResult {
  std::vector<std::string> transcript;  // "BEEP" and "SPEAK[rate=...]: ..." lines
  TimingReport timing;
  bool destination_found = false;

  int exit_code() const { return destination_found ? 0 : 1; }
};

SimulationResult run_simulation(const SimulationConfig& config);

}  // namespace drishti::sim
