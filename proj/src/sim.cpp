#include "drishti/sim.hpp"

#include <chrono>
#include <filesystem>

#include <fmt/format.h>
#include <json.hpp>

#include "drishti/error.hpp"
#include "drishti/guide.hpp"

namespace drishti::sim {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool is_row_aligned(const calib::StereoRig& rig) {
  const auto& t = rig.baseline_vector;
  return rig.relative_rotation.norm() < 1e-9 && std::abs(t.y()) < 1e-9 * rig.baseline() &&
         std::abs(t.z()) < 1e-9 * rig.baseline() && rig.left.fx == rig.right.fx && rig.left.fy == rig.right.fy &&
         rig.left.cy == rig.right.cy;
}

}  // namespace

SimulationConfig load_config(const std::string& path) {
  namespace fs = std::filesystem;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(io::read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ConfigError, fmt::format("{}: {}", path, e.what()));
  } catch (const Error& e) {
    throw Error(Errc::ConfigError, e.what());
  }
  const fs::path base = fs::path(path).parent_path();
  const auto resolve = [&](const std::string& p) {
    const fs::path full = fs::path(p).is_absolute() ? fs::path(p) : base / p;
    if (!fs::exists(full)) throw Error(Errc::ConfigError, "missing file " + full.string());
    return full.string();
  };

  SimulationConfig cfg;
  try {
    cfg.calibration = resolve(doc.at("calibration").get<std::string>());
    cfg.annotations = resolve(doc.at("annotations").get<std::string>());
    if (doc.contains("labels")) cfg.labels = resolve(doc.at("labels").get<std::string>());
    cfg.route_graph = resolve(doc.at("route_graph").get<std::string>());
    cfg.source = doc.at("source").get<route::NodeId>();
    cfg.destination = doc.at("destination").get<std::string>();
    for (const auto& f : doc.at("frames"))
      cfg.frames.push_back(FramePair{f.at("id").get<std::string>(), resolve(f.at("left").get<std::string>()),
                                     resolve(f.at("right").get<std::string>())});
    if (doc.contains("match")) {
      const auto& m = doc.at("match");
      cfg.match.window = m.value("window", cfg.match.window);
      cfg.match.d_min = m.value("d_min", cfg.match.d_min);
      cfg.match.d_max = m.value("d_max", cfg.match.d_max);
      cfg.match.uniqueness_ratio = m.value("uniqueness_ratio", cfg.match.uniqueness_ratio);
    }
    cfg.min_confidence = doc.value("min_confidence", cfg.min_confidence);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ConfigError, fmt::format("{}: {}", path, e.what()));
  }
  try {
    cfg.match.validate();
  } catch (const Error& e) {
    throw Error(Errc::ConfigError, e.what());
  }
  return cfg;
}

Perception::Perception(const calib::StereoRig& rig, io::LabelMap labels, io::AnnotationSet annotations,
                       stereo::MatchParams match, double min_confidence)
    : rig_(rig),
      rect_(calib::rectify_pair(rig)),
      needs_rectification_(!is_row_aligned(rig)),
      labels_(std::move(labels)),
      detector_(std::move(annotations), min_confidence),
      match_(match) {
  working_rig_ = needs_rectification_ ? calib::rectified_rig(rig_, rect_) : rig_;
}

std::vector<ObjectReport> Perception::perceive(const FramePair& frame, Timings* timings) const {
  const auto start = Clock::now();
  const GrayImage left = io::decode_pgm(io::read_file(frame.left));
  const GrayImage right = io::decode_pgm(io::read_file(frame.right));
  if (timings) timings->image_load = seconds_since(start);
  return perceive(frame.id, left, right, timings);
}

std::vector<ObjectReport> Perception::perceive(const std::string& frame_id, const GrayImage& left,
                                               const GrayImage& right, Timings* timings) const {
  auto start = Clock::now();
  DepthMap depth;
  if (needs_rectification_) {
    const GrayImage l = calib::rectify_image(left, rig_.left, rect_.left_rotation, rect_.left);
    const GrayImage r = calib::rectify_image(right, rig_.right, rect_.right_rotation, rect_.right);
    depth = stereo::depth_map(stereo::compute_disparity(l, r, match_), working_rig_);
  } else {
    depth = stereo::depth_map(stereo::compute_disparity(left, right, match_), working_rig_);
  }
  if (timings) timings->disparity_depth = seconds_since(start);

  start = Clock::now();
  const auto detections = detector_.detect(frame_id);
  auto reports = detect::report_objects(detections, depth);
  if (timings) timings->detection = seconds_since(start);
  return reports;
}

std::string TimingReport::to_csv() const {
  std::string out = "task,seconds\n";
  for (const auto& row : rows) out += fmt::format("{},{:.3f}\n", row.task, row.seconds);
  return out;
}

SimulationResult run_simulation(const SimulationConfig& cfg) {
  const auto run_start = Clock::now();
  SimulationResult result;

  // Setup: load every asset and resolve the route.
  const auto setup_start = Clock::now();
  const calib::StereoRig rig = calib::parse_stereo_rig(io::read_text_file(cfg.calibration));
  io::LabelMap labels = cfg.labels.empty() ? io::default_label_map() : io::load_label_map(io::read_text_file(cfg.labels));
  io::AnnotationSet annotations = io::parse_annotation_csv(io::read_text_file(cfg.annotations), labels);
  const route::RouteGraph graph = route::parse_route_graph(io::read_text_file(cfg.route_graph));
  const Perception perception(rig, std::move(labels), std::move(annotations), cfg.match, cfg.min_confidence);

  // Phase 1: destination.
  std::vector<route::RouteStep> steps;
  try {
    const route::NodeId dst = route::geocode(graph, cfg.destination);
    steps = route::generate_instructions(graph, route::shortest_path(graph, cfg.source, dst));
    result.destination_found = true;
  } catch (const Error& e) {
    if (e.code() != Errc::DestinationNotFound && e.code() != Errc::AmbiguousDestination && e.code() != Errc::NoRoute &&
        e.code() != Errc::UnknownNode)
      throw;
  }
  const double setup = seconds_since(setup_start);

  double load_sum = 0.0, disp_sum = 0.0, detect_sum = 0.0;
  std::size_t timed_frames = 0;
  if (!result.destination_found) {
    result.transcript.push_back("BEEP");
  } else {
    // Phase 2 and 3 per frame.
    for (std::size_t i = 0; i < cfg.frames.size(); ++i) {
      const route::RouteStep& step = steps[std::min(i, steps.size() - 1)];
      Perception::Timings t;
      try {
        const auto reports = perception.perceive(cfg.frames[i], &t);
        result.transcript.push_back(guide::speak_line(guide::compose_guidance(step, reports)));
        load_sum += t.image_load;
        disp_sum += t.disparity_depth;
        detect_sum += t.detection;
        ++timed_frames;
      } catch (const Error&) {
        result.transcript.push_back("BEEP");
      }
    }
  }

  const double n = timed_frames > 0 ? static_cast<double>(timed_frames) : 1.0;
  result.timing.rows = {{"setup", setup},
                        {"disparity_depth", disp_sum / n},
                        {"image_load", load_sum / n},
                        {"detection", detect_sum / n},
                        {"cumulative", seconds_since(run_start)}};
  return result;
}

}  // namespace drishti::sim
