// drishti: one subcommand per pipeline stage, plus the companion client and
// the end-to-end simulation.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "drishti/calib.hpp"
#include "drishti/detect.hpp"
#include "drishti/error.hpp"
#include "drishti/guide.hpp"
#include "drishti/media_io.hpp"
#include "drishti/route.hpp"
#include "drishti/sim.hpp"
#include "drishti/stereo.hpp"
#include "drishti/synthetic.hpp"
#include "drishti/transport.hpp"
#include "drishti/wire.hpp"

namespace fs = std::filesystem;
using namespace drishti;

namespace {

calib::ImageSize parse_size(const std::string& text) {
  unsigned w = 0, h = 0;
  if (std::sscanf(text.c_str(), "%ux%u", &w, &h) != 2 || w == 0 || h == 0)
    throw Error(Errc::InvalidParams, "image size must look like 640x480");
  return {w, h};
}

BBox parse_box(const std::string& text) {
  BBox b;
  if (std::sscanf(text.c_str(), "%d,%d,%d,%d", &b.x, &b.y, &b.w, &b.h) != 4 || b.w < 1 || b.h < 1)
    throw Error(Errc::BadBBox, "box must be x,y,w,h with w,h >= 1: " + text);
  return b;
}

void print_coverage_warnings(const calib::CoverageBuckets& c) {
  for (const auto& name : c.unfilled()) fmt::print(stderr, "warning: no view filled coverage bucket '{}'\n", name);
}

io::LabelMap labels_from(const std::string& path) {
  return path.empty() ? io::default_label_map() : io::load_label_map(io::read_text_file(path));
}

// Phase 1 shared by simulate-style commands: destination text -> route steps.
std::optional<std::vector<route::RouteStep>> plan(const route::RouteGraph& g, route::NodeId from, const std::string& to) {
  try {
    return route::generate_instructions(g, route::shortest_path(g, from, route::geocode(g, to)));
  } catch (const Error& e) {
    fmt::print(stderr, "{}\n", e.what());
    return std::nullopt;
  }
}

struct FixtureFrame {
  std::string id;
  std::vector<synth::SceneObject> objects;
  std::vector<std::pair<std::string, double>> extra_annotations;  // label, confidence (below threshold)
};

// Writes the three-frame simulation fixture into `dir`.
void write_fixture(const fs::path& dir) {
  constexpr int kInset = 4;
  fs::create_directories(dir);
  synth::Scene scene;
  const calib::StereoRig rig = scene.rig();

  calib::StereoCalibration cal;
  cal.rig = rig;
  io::write_text_file((dir / "calibration.txt").string(), calib::format_report(cal));

  const std::vector<FixtureFrame> frames{
      {"f1", {{"chair", {120, 80, 60, 90}, 1.524}}, {}},
      {"f2", {{"person", {40, 50, 70, 150}, 0.9144}, {"chair", {200, 100, 60, 80}, 2.4384}}, {}},
      {"f3", {{"dog", {150, 120, 70, 60}, 3.048}}, {{"cat", 0.3}}},
  };
  std::string annotations = "# frame_id,label,x,y,w,h,confidence\n";
  nlohmann::json cfg_frames = nlohmann::json::array();
  for (std::size_t i = 0; i < frames.size(); ++i) {
    scene.objects = frames[i].objects;
    scene.seed = 100 + i;
    const auto [left, right] = synth::render(scene);
    const std::string l = frames[i].id + "_left.pgm", r = frames[i].id + "_right.pgm";
    io::write_file((dir / l).string(), io::encode_pgm(left));
    io::write_file((dir / r).string(), io::encode_pgm(right));
    cfg_frames.push_back({{"id", frames[i].id}, {"left", l}, {"right", r}});
    // Boxes hug the object interior: inset by the half window so no match straddles the silhouette.
    for (const auto& o : frames[i].objects)
      annotations += fmt::format("{},{},{},{},{},{},0.9\n", frames[i].id, o.label, o.box.x + kInset, o.box.y + kInset,
                                 o.box.w - 2 * kInset, o.box.h - 2 * kInset);
    for (const auto& [label, conf] : frames[i].extra_annotations)
      annotations += fmt::format("{},{},10,10,20,20,{}\n", frames[i].id, label, conf);
  }
  io::write_text_file((dir / "annotations.csv").string(), annotations);
  io::write_text_file((dir / "labels.csv").string(), io::write_label_map(io::default_label_map()));
  io::write_text_file((dir / "campus.csv").string(),
                      "node,1,Quad,47.6000,-122.3000\n"
                      "node,2,-,47.6010,-122.3000\n"
                      "node,3,Gym,47.6010,-122.2985\n"
                      "node,4,Library,47.6010,-122.2970\n"
                      "node,5,Gate,47.5990,-122.3000\n"
                      "edge,1,2,Main Way\n"
                      "edge,2,3,Elm Street\n"
                      "edge,3,4,Elm Street\n"
                      "edge,1,5,Main Way\n");
  nlohmann::json cfg{{"calibration", "calibration.txt"},
                     {"frames", cfg_frames},
                     {"annotations", "annotations.csv"},
                     {"labels", "labels.csv"},
                     {"route_graph", "campus.csv"},
                     {"source", 1},
                     {"destination", "library"},
                     {"match", {{"window", 9}, {"d_min", 0}, {"d_max", 64}, {"uniqueness_ratio", 1.15}}},
                     {"min_confidence", 0.5}};
  io::write_text_file((dir / "sim.json").string(), cfg.dump(2) + "\n");

  // Corner observations for the calibration subcommands.
  const io::BoardModel board{5, 4, 0.03};
  calib::StereoRig corner_rig;
  corner_rig.left = calib::CameraIntrinsics::from_physical(2.0, 0.003, 320, 240);
  corner_rig.right = corner_rig.left;
  corner_rig.baseline_vector = calib::Vec3(-0.06, 0, 0);
  const auto poses = synth::calibration_poses(12, board);
  io::write_text_file((dir / "corners.csv").string(),
                      io::write_corner_csv(calib::generate_synthetic_observations(corner_rig.left, corner_rig, poses,
                                                                                 board, 0.5, 2024)));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stereo perception, routing and guidance pipeline"};
  app.require_subcommand(1);
  int exit_code = 0;

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Mono calibration from a corner CSV");
  std::string corners, out, camera = "L", image_size = "640x480";
  double pixel_size = 0.003;
  cal->add_option("--corners", corners)->required();
  cal->add_option("--pixel-size", pixel_size, "mm per pixel")->capture_default_str();
  cal->add_option("--camera", camera)->check(CLI::IsMember({"L", "R"}))->capture_default_str();
  cal->add_option("--image-size", image_size)->capture_default_str();
  cal->add_option("--out", out);
  cal->callback([&] {
    const auto all = io::parse_corner_csv(io::read_text_file(corners));
    calib::SolverOptions opts;
    opts.image_size = parse_size(image_size);
    const auto rep = calib::calibrate_camera(all.for_camera(static_cast<io::CameraSide>(camera[0])), pixel_size, opts);
    const auto text = calib::format_report(rep);
    out.empty() ? fmt::print("{}", text) : io::write_text_file(out, text);
    print_coverage_warnings(rep.coverage);
  });

  // stereo-calibrate
  auto* scal = app.add_subcommand("stereo-calibrate", "Stereo calibration from a corner CSV with L and R views");
  scal->add_option("--corners", corners)->required();
  scal->add_option("--pixel-size", pixel_size)->capture_default_str();
  scal->add_option("--image-size", image_size)->capture_default_str();
  scal->add_option("--out", out);
  scal->callback([&] {
    const auto all = io::parse_corner_csv(io::read_text_file(corners));
    calib::SolverOptions opts;
    opts.image_size = parse_size(image_size);
    const auto l = all.for_camera(io::CameraSide::Left), r = all.for_camera(io::CameraSide::Right);
    const auto c = calib::calibrate_stereo(l, r, calib::calibrate_camera(l, pixel_size, opts).intrinsics,
                                           calib::calibrate_camera(r, pixel_size, opts).intrinsics, opts);
    const auto text = calib::format_report(c);
    out.empty() ? fmt::print("{}", text) : io::write_text_file(out, text);
    print_coverage_warnings(c.coverage);
  });

  // disparity
  auto* disp = app.add_subcommand("disparity", "Block-matching disparity of a rectified PGM pair");
  std::string left, right;
  stereo::MatchParams match;
  disp->add_option("--left", left)->required();
  disp->add_option("--right", right)->required();
  disp->add_option("--out", out)->required();
  disp->add_option("--window", match.window)->capture_default_str();
  disp->add_option("--d-min", match.d_min)->capture_default_str();
  disp->add_option("--d-max", match.d_max)->capture_default_str();
  disp->add_option("--uniqueness", match.uniqueness_ratio)->capture_default_str();
  disp->callback([&] {
    const auto d = stereo::compute_disparity(io::decode_pgm(io::read_file(left)), io::decode_pgm(io::read_file(right)), match);
    io::write_file(out, io::encode_dispmap(d));
    fmt::print("valid_pixels,{}\n", d.valid_count());
  });

  // depth
  auto* depth = app.add_subcommand("depth", "Object distances from a disparity map and a stereo calibration");
  std::string disparity_path, calibration;
  std::vector<std::string> boxes;
  depth->add_option("--disparity", disparity_path)->required();
  depth->add_option("--calibration", calibration)->required();
  depth->add_option("--box", boxes, "x,y,w,h; repeatable");
  depth->callback([&] {
    const auto rig = calib::parse_stereo_rig(io::read_text_file(calibration));
    const auto dm = stereo::depth_map(io::decode_dispmap(io::read_file(disparity_path)), rig);
    fmt::print("valid_depth_pixels,{}\n", dm.valid_count());
    for (const auto& text : boxes) {
      const BBox b = parse_box(text);
      try {
        fmt::print("distance_m,{},{:.4f}\n", text, stereo::object_distance(dm, b));
      } catch (const Error& e) {
        if (e.code() != Errc::NoValidDepth) throw;
        fmt::print("distance_m,{},unknown\n", text);
      }
    }
  });

  // detect
  auto* det = app.add_subcommand("detect", "Detections for one frame from an annotation file");
  std::string annotations, labels, frame;
  double min_conf = 0.5;
  det->add_option("--annotations", annotations)->required();
  det->add_option("--frame", frame)->required();
  det->add_option("--labels", labels);
  det->add_option("--min-confidence", min_conf)->capture_default_str();
  det->callback([&] {
    const auto set = io::parse_annotation_csv(io::read_text_file(annotations), labels_from(labels));
    for (const auto& d : detect::detect(frame, set, min_conf))
      fmt::print("{},{},{},{},{},{}\n", d.label, d.box.x, d.box.y, d.box.w, d.box.h, d.confidence);
  });

  // route
  auto* rt = app.add_subcommand("route", "Turn-by-turn steps over an offline route graph");
  std::string graph, to;
  route::NodeId from = 0;
  rt->add_option("--graph", graph)->required();
  rt->add_option("--from", from)->required();
  rt->add_option("--to", to)->required();
  rt->callback([&] {
    const auto g = route::parse_route_graph(io::read_text_file(graph));
    const auto steps = plan(g, from, to);
    if (!steps) {
      fmt::print("BEEP\n");
      exit_code = 2;
      return;
    }
    for (const auto& s : *steps) fmt::print("{} ({:.0f} m)\n", s.text, s.distance_m);
  });

  // guide
  auto* gd = app.add_subcommand("guide", "Compose one guidance sentence");
  std::string phrase;
  std::vector<std::string> objects;
  gd->add_option("--phrase", phrase, "e.g. \"north on Main Way\"")->required();
  gd->add_option("--object", objects, "label:meters or label:unknown; repeatable");
  gd->callback([&] {
    std::vector<ObjectReport> reports;
    for (const auto& o : objects) {
      const auto colon = o.rfind(':');
      if (colon == std::string::npos) throw Error(Errc::MalformedLine, "object must be label:meters: " + o);
      ObjectReport r{o.substr(0, colon), std::nullopt, {}};
      if (o.substr(colon + 1) != "unknown") r.distance_m = std::stod(o.substr(colon + 1));
      reports.push_back(r);
    }
    fmt::print("{}\n", guide::speak_line(guide::compose_guidance(phrase, reports)));
  });

  // serve
  auto* srv = app.add_subcommand("serve", "Run perception over a simulation config and push reports to one client");
  std::string endpoint = "127.0.0.1:5321", config;
  int heartbeat_ms = 1000;
  srv->add_option("--endpoint", endpoint)->capture_default_str();
  srv->add_option("--config", config)->required();
  srv->add_option("--heartbeat-ms", heartbeat_ms)->capture_default_str();
  srv->callback([&] {
    const auto cfg = sim::load_config(config);
    auto lm = labels_from(cfg.labels);
    const sim::Perception perception(calib::parse_stereo_rig(io::read_text_file(cfg.calibration)), lm,
                                     io::parse_annotation_csv(io::read_text_file(cfg.annotations), lm), cfg.match,
                                     cfg.min_confidence);
    wire::FrameQueue queue;
    std::thread producer([&] {
      for (std::size_t i = 0; i < cfg.frames.size(); ++i) {
        try {
          wire::ReportBatch batch{static_cast<std::uint32_t>(i), {}};
          for (const auto& r : perception.perceive(cfg.frames[i])) batch.objects.push_back(wire::to_wire(r, lm));
          queue.push(wire::batch_frame(batch));
        } catch (const Error& e) {
          fmt::print(stderr, "frame {}: {}\n", cfg.frames[i].id, e.what());
          queue.push(wire::beep_frame());
        }
      }
      queue.close();
    });
    wire::ServeOptions opts;
    opts.heartbeat_interval = std::chrono::milliseconds(heartbeat_ms);
    opts.on_listening = [](std::uint16_t port) { fmt::print(stderr, "listening on port {}\n", port); };
    try {
      wire::serve(wire::Endpoint::parse(endpoint), queue, opts);
    } catch (...) {
      queue.close();
      producer.join();
      throw;
    }
    producer.join();
  });

  // client: the three buttons of the companion app
  auto* client = app.add_subcommand("client", "Companion client commands");
  client->require_subcommand(1);
  auto* speak = client->add_subcommand("speak-input", "Speak a line of text");
  std::string text;
  speak->add_option("--text", text)->required();
  speak->callback([&] { fmt::print("{}\n", guide::speak_line({text})); });

  auto* give = client->add_subcommand("give-input", "Accept a destination and check it against the map");
  std::string destination;
  give->add_option("--graph", graph)->required();
  give->add_option("--destination", destination, "read from stdin when omitted");
  give->callback([&] {
    if (destination.empty()) std::getline(std::cin, destination);
    const auto g = route::parse_route_graph(io::read_text_file(graph));
    try {
      const auto id = route::geocode(g, destination);
      fmt::print("{}\n", guide::speak_line({"Destination set to " + g.display_name(id)}));
    } catch (const Error& e) {
      if (e.code() != Errc::DestinationNotFound && e.code() != Errc::AmbiguousDestination) throw;
      fmt::print("BEEP\n");
      exit_code = 2;
    }
  });

  auto* nav = client->add_subcommand("navigate", "Receive reports and speak guidance along the route");
  int idle_ms = 3000;
  nav->add_option("--endpoint", endpoint)->capture_default_str();
  nav->add_option("--graph", graph)->required();
  nav->add_option("--from", from)->required();
  nav->add_option("--destination", destination)->required();
  nav->add_option("--labels", labels);
  nav->add_option("--idle-ms", idle_ms)->capture_default_str();
  nav->callback([&] {
    const auto g = route::parse_route_graph(io::read_text_file(graph));
    const auto steps = plan(g, from, destination);
    if (!steps) {
      fmt::print("BEEP\n");
      exit_code = 2;
      return;
    }
    const auto lm = labels_from(labels);
    std::size_t next_step = 0;
    wire::ReceiveOptions opts;
    opts.idle_timeout = std::chrono::milliseconds(idle_ms);
    wire::receive(wire::Endpoint::parse(endpoint), [&](const wire::ReceivedEvent& e) {
      switch (e.frame.kind) {
        case wire::FrameKind::Heartbeat: break;
        case wire::FrameKind::Beep: fmt::print("BEEP\n"); break;
        case wire::FrameKind::ObjectReportBatch: {
          std::vector<ObjectReport> reports;
          for (const auto& o : wire::decode_batch_payload(e.frame.payload).objects) reports.push_back(wire::from_wire(o, lm));
          const auto& step = (*steps)[std::min(next_step++, steps->size() - 1)];
          fmt::print("{}\n", guide::speak_line(guide::compose_guidance(step, reports)));
          break;
        }
      }
      std::fflush(stdout);
      return true;
    }, opts);
  });

  // simulate
  auto* simc = app.add_subcommand("simulate", "End-to-end run over recorded frames");
  std::string timing_csv;
  std::optional<std::string> dest_override;
  simc->add_option("--config", config)->required();
  simc->add_option("--destination", dest_override, "overrides the configured destination");
  simc->add_option("--timing-csv", timing_csv);
  simc->callback([&] {
    auto cfg = sim::load_config(config);
    if (dest_override) cfg.destination = *dest_override;
    const auto result = sim::run_simulation(cfg);
    for (const auto& line : result.transcript) fmt::print("{}\n", line);
    for (const auto& row : result.timing.rows) fmt::print("TIMING,{},{:.3f}\n", row.task, row.seconds);
    if (!timing_csv.empty()) io::write_text_file(timing_csv, result.timing.to_csv());
    exit_code = result.exit_code();
  });

  // synthetic data
  auto* syn = app.add_subcommand("synth", "Generate synthetic inputs");
  syn->require_subcommand(1);
  auto* syn_corners = syn->add_subcommand("corners", "Checkerboard observations for a known camera or rig");
  std::size_t views = 12;
  double noise = 0.5, focal_mm = 2.0, baseline = 0.0;
  std::uint64_t seed = 1;
  syn_corners->add_option("--out", out)->required();
  syn_corners->add_option("--views", views)->capture_default_str();
  syn_corners->add_option("--noise", noise)->capture_default_str();
  syn_corners->add_option("--focal-mm", focal_mm)->capture_default_str();
  syn_corners->add_option("--pixel-size", pixel_size)->capture_default_str();
  syn_corners->add_option("--baseline", baseline, "meters; 0 for a single camera")->capture_default_str();
  syn_corners->add_option("--seed", seed)->capture_default_str();
  syn_corners->callback([&] {
    const io::BoardModel board;
    const auto k = calib::CameraIntrinsics::from_physical(focal_mm, pixel_size, 320, 240);
    std::optional<calib::StereoRig> rig;
    if (baseline > 0) rig = calib::StereoRig{k, k, calib::Vec3::Zero(), calib::Vec3(-baseline, 0, 0)};
    const auto poses = synth::calibration_poses(views, board);
    io::write_text_file(out, io::write_corner_csv(calib::generate_synthetic_observations(k, rig, poses, board, noise, seed)));
  });
  auto* syn_fixture = syn->add_subcommand("fixture", "Write the three-frame simulation fixture");
  syn_fixture->add_option("--out", out)->required();
  syn_fixture->callback([&] { write_fixture(out); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return exit_code;
}
