// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <future>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "drishti/calib.hpp"
#include "drishti/guide.hpp"
#include "drishti/media_io.hpp"
#include "drishti/sim.hpp"
#include "drishti/stereo.hpp"
#include "drishti/synthetic.hpp"
#include "drishti/transport.hpp"
#include "drishti/wire.hpp"
#include "oracles.hpp"

using namespace drishti;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances and limits, fixed here.
constexpr double kFocalRelTol = 0.034;
constexpr double kFocalSeconds = 10.0;
constexpr double kDistanceTolM = 0.61;
constexpr double kDistanceSeconds = 30.0;
constexpr double kShiftFraction = 0.95;
constexpr double kZeroNoiseRms = 1e-6;
constexpr double kZeroNoiseRelTol = 1e-4;
constexpr int kRouteInstances = 100;
constexpr int kRoundTripFrames = 1000;
constexpr int kFuzzStreams = 10000;
constexpr double kSimulateSeconds = 60.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

const io::BoardModel kBoard{5, 4, 0.03};

Outcome focal_length_recovery() {
  const auto truth = calib::CameraIntrinsics::from_physical(2.0, 0.003, 320, 240);
  const auto poses = synth::calibration_poses(12, kBoard);
  const auto start = Clock::now();
  const auto obs = calib::generate_synthetic_observations(truth, std::nullopt, poses, kBoard, 0.5, 20240501);
  const auto rep = calib::calibrate_camera(obs, 0.003);
  const double secs = seconds_since(start);
  const double err = (rep.intrinsics.focal_mm() - 2.0) / 2.0;
  // Spread over other noise draws, for context only; the gate is the single seeded run above.
  int within = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto r = calib::calibrate_camera(
        calib::generate_synthetic_observations(truth, std::nullopt, poses, kBoard, 0.5, seed), 0.003);
    within += std::abs(r.intrinsics.focal_mm() - 2.0) / 2.0 <= kFocalRelTol;
  }
  return {std::abs(err) <= kFocalRelTol && secs < kFocalSeconds,
          fmt::format("f = {:.4f} mm vs 2.0 mm ({:+.3f}%, tol {:.1f}%), rms {:.3f} px, {:.2f} s; {}/50 other seeds within tol",
                      rep.intrinsics.focal_mm(), 100 * err, 100 * kFocalRelTol, rep.rms_px, secs, within)};
}

Outcome distance_accuracy() {
  synth::Scene scene;
  scene.width = 640;
  scene.height = 480;
  scene.fx = 2.0 / 0.003;
  scene.baseline_m = 0.1;
  const std::vector<double> feet{5, 8, 10, 12, 15};
  for (std::size_t i = 0; i < feet.size(); ++i)
    scene.objects.push_back({"box", BBox{40 + 120 * static_cast<int>(i), 160 + 20 * static_cast<int>(i % 2), 80, 120},
                             feet[i] * 0.3048});
  const auto start = Clock::now();
  const auto [left, right] = synth::render(scene);
  const auto depth = stereo::depth_map(stereo::compute_disparity(left, right), scene.rig());
  double worst = 0.0;
  std::string per;
  for (const auto& o : scene.objects) {
    const double got = stereo::object_distance(depth, o.box);
    worst = std::max(worst, std::abs(got - o.depth_m));
    per += fmt::format(" {:.2f}->{:.3f}", o.depth_m, got);
  }
  const double secs = seconds_since(start);
  return {worst <= kDistanceTolM && secs < kDistanceSeconds,
          fmt::format("worst error {:.3f} m (tol {:.2f} m);{}; {:.2f} s", worst, kDistanceTolM, per, secs)};
}

Outcome disparity_correctness() {
  const auto left = synth::textured_image(320, 240, 31);
  const auto right = synth::shift_left(left, 7, 32);
  const auto shifted = stereo::compute_disparity(left, right);
  std::size_t valid = 0, near = 0;
  for (std::size_t i = 0; i < shifted.values.size(); ++i)
    if (shifted.valid[i]) {
      ++valid;
      near += std::abs(shifted.values[i] - 7.0f) <= 1.0f;
    }
  const auto same = stereo::compute_disparity(left, left);
  std::size_t same_valid = 0, zero = 0;
  for (std::size_t i = 0; i < same.values.size(); ++i)
    if (same.valid[i]) {
      ++same_valid;
      zero += same.values[i] == 0.0f;
    }
  const double frac = valid ? static_cast<double>(near) / valid : 0.0;
  return {valid > 0 && frac >= kShiftFraction && same_valid > 0 && zero == same_valid,
          fmt::format("shift 7: {:.2f}% of {} valid within 1 px; identical: {}/{} at 0", 100 * frac, valid, zero, same_valid)};
}

Outcome optimizer_sanity() {
  const auto truth = calib::CameraIntrinsics::from_physical(2.0, 0.003, 320, 240);
  const auto poses = synth::calibration_poses(12, kBoard);
  const auto obs = calib::generate_synthetic_observations(truth, std::nullopt, poses, kBoard, 0.0, 1);

  // Full pipeline, then a refinement from a deliberately wrong start so the cost history has real steps.
  auto off = truth;
  off.fx *= 1.06;
  off.fy *= 0.95;
  off.cx += 12.0;
  off.cy -= 9.0;
  const std::vector<calib::CalibrationReport> runs{calib::calibrate_camera(obs, 0.003), calib::refine_calibration(obs, off)};

  double worst = 0.0, rms = 0.0;
  bool monotone = true;
  const auto rel = [&](double got, double want) { worst = std::max(worst, std::abs(got - want) / std::abs(want)); };
  for (const auto& rep : runs) {
    rms = std::max(rms, rep.rms_px);
    rel(rep.intrinsics.fx, truth.fx);
    rel(rep.intrinsics.fy, truth.fy);
    rel(rep.intrinsics.cx, truth.cx);
    rel(rep.intrinsics.cy, truth.cy);
    // Offset by one so near-zero pose components do not blow up the relative measure.
    for (std::size_t v = 0; v < poses.size(); ++v)
      for (int k = 0; k < 3; ++k) {
        rel(rep.poses[v].translation[k] + 1.0, poses[v].translation[k] + 1.0);
        rel(rep.poses[v].rotation[k] + 1.0, poses[v].rotation[k] + 1.0);
      }
    for (std::size_t i = 1; i < rep.cost_history.size(); ++i)
      monotone = monotone && rep.cost_history[i] <= rep.cost_history[i - 1];
  }
  const std::size_t steps = runs[1].cost_history.size() - 1;
  return {rms < kZeroNoiseRms && worst <= kZeroNoiseRelTol && monotone && steps > 0,
          fmt::format("rms {:.2e} px, worst relative parameter error {:.2e}, {} accepted steps from a perturbed start, "
                      "monotone {}",
                      rms, worst, steps, monotone)};
}

Outcome routing_oracle() {
  std::mt19937_64 rng(8080);
  int agree = 0, connected = 0;
  for (int i = 0; i < kRouteInstances; ++i) {
    const auto sg = oracle::random_graph(rng, 8);
    const auto g = oracle::to_route_graph(sg);
    const auto src = sg.nodes[rng() % sg.nodes.size()].id, dst = sg.nodes[rng() % sg.nodes.size()].id;
    const auto best = oracle::brute_force_shortest(g, src, dst);
    try {
      const auto p = route::shortest_path(g, src, dst);
      ++connected;
      agree += best && p.length_m == *best;
    } catch (const Error& e) {
      agree += !best && e.code() == Errc::NoRoute;
    }
  }
  return {agree == kRouteInstances, fmt::format("{}/{} instances equal the exhaustive optimum ({} connected)", agree,
                                                kRouteInstances, connected)};
}

Outcome protocol_safety() {
  std::mt19937_64 rng(6);
  int round_trips = 0;
  for (int i = 0; i < kRoundTripFrames; ++i) {
    const auto f = oracle::random_frame(rng);
    const auto bytes = wire::encode_frame(f);
    const auto r = wire::decode_frame(bytes);
    round_trips += r.is_frame() && r.frame == f && r.consumed == bytes.size();
  }
  int clean = 0;
  for (int i = 0; i < kFuzzStreams; ++i) clean += oracle::drain_stream(oracle::mutated_stream(rng));
  return {round_trips == kRoundTripFrames && clean == kFuzzStreams,
          fmt::format("{}/{} round trips, {}/{} fuzzed streams stayed in contract", round_trips, kRoundTripFrames, clean,
                      kFuzzStreams)};
}

Outcome template_fidelity() {
  const std::string golden = io::read_text_file((fs::path(DRISHTI_GOLDEN_DIR) / "guidance_one_object.txt").string());
  const std::vector<ObjectReport> chair{{"chair", 1.524, {120, 80, 60, 90}}};
  const std::string got = guide::compose_guidance("north on Main Way", chair).text + "\n";
  return {got == golden, fmt::format("\"{}\"", got.substr(0, got.size() - 1))};
}

Outcome end_to_end() {
  const auto start = Clock::now();
  const auto result = sim::run_simulation(sim::load_config((fs::path(DRISHTI_DATA_DIR) / "sim" / "sim.json").string()));
  const double secs = seconds_since(start);
  const auto golden = lines_of(io::read_text_file((fs::path(DRISHTI_GOLDEN_DIR) / "simulate_transcript.txt").string()));
  const bool shape = result.timing.rows.size() == 5 && result.timing.rows.back().task == "cumulative";
  return {result.transcript == golden && shape && secs < kSimulateSeconds,
          fmt::format("{} transcript lines, golden match {}, {} timing rows, {:.2f} s", result.transcript.size(),
                      result.transcript == golden, result.timing.rows.size(), secs)};
}

Outcome beep_semantics() {
  auto cfg = sim::load_config((fs::path(DRISHTI_DATA_DIR) / "sim" / "sim.json").string());
  cfg.destination = "Atlantis";
  const auto result = sim::run_simulation(cfg);
  const auto beeps = std::count(result.transcript.begin(), result.transcript.end(), "BEEP");
  const auto speaks = std::count_if(result.transcript.begin(), result.transcript.end(),
                                    [](const std::string& l) { return l.rfind("SPEAK", 0) == 0; });

  // Server vanishes after one report.
  wire::FrameQueue queue;
  std::atomic<bool> stop{false};
  std::promise<std::uint16_t> bound;
  auto port = bound.get_future();
  wire::ServeOptions opts;
  opts.stop = &stop;
  opts.heartbeat_interval = std::chrono::milliseconds(200);
  opts.on_listening = [&](std::uint16_t p) { bound.set_value(p); };
  std::thread server([&] { wire::serve({"127.0.0.1", 0}, queue, opts); });
  queue.push(wire::batch_frame({1, {}}));
  bool got_batch = false, local_beep = false;
  wire::receive({"127.0.0.1", port.get()}, [&](const wire::ReceivedEvent& e) {
    if (e.frame.kind == wire::FrameKind::ObjectReportBatch) {
      got_batch = true;
      stop = true;
    }
    if (e.local && e.frame.kind == wire::FrameKind::Beep) local_beep = true;
    return true;
  });
  server.join();
  return {beeps == 1 && speaks == 0 && got_batch && local_beep,
          fmt::format("unknown destination: {} BEEP, {} SPEAK; disconnect after a report: local beep {}", beeps, speaks,
                      local_beep)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"focal-length recovery", focal_length_recovery},
      {"distance accuracy", distance_accuracy},
      {"disparity correctness", disparity_correctness},
      {"calibration optimizer sanity", optimizer_sanity},
      {"routing oracle equivalence", routing_oracle},
      {"protocol roundtrip and fuzz", protocol_safety},
      {"template fidelity", template_fidelity},
      {"end-to-end simulation", end_to_end},
      {"beep semantics", beep_semantics},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    fmt::print("{} {}. {}: {}\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail);
  }
  fmt::print("{}/{} criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
