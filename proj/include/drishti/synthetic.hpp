#pragma once

// Deterministic synthetic imagery for tests, benchmarks and fixtures. All
// randomness comes from a counter-based hash, so output is identical across
// platforms and standard libraries.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "drishti/calib.hpp"
#include "drishti/image.hpp"

namespace drishti::synth {

/// SplitMix64 finalizer.
std::uint64_t mix(std::uint64_t x);

/// Multi-octave value noise in [0, 255] at continuous texture coordinates.
double value_noise(double s, double t, std::uint64_t seed);

/// Random texture suitable for block matching.
GrayImage textured_image(std::uint32_t width, std::uint32_t height, std::uint64_t seed);

/// out(u, v) = img(u + shift, v); columns that run off the edge get fresh texture.
GrayImage shift_left(const GrayImage& img, int shift, std::uint64_t seed);

/// Fronto-parallel rectangle occupying `box` in the left image at depth `depth_m`.
struct SceneObject {
  std::string label;
  BBox box;
  double depth_m = 1.0;
};

struct Scene {
  std::uint32_t width = 320;
  std::uint32_t height = 240;
  double fx = 400.0;
  double baseline_m = 0.1;
  double background_depth_m = 20.0;
  std::vector<SceneObject> objects;
  std::uint64_t seed = 1;

  /// Row-aligned rig with the right camera at +baseline along x.
  calib::StereoRig rig() const;
};

/// Renders the left and right views with correct occlusion; every surface is
/// textured in its own plane so disparities follow fx * b / Z exactly.
std::pair<GrayImage, GrayImage> render(const Scene& scene);

/// Board poses spread over the field of view with varied tilt, for calibration fixtures.
std::vector<calib::Pose> calibration_poses(std::size_t count, const io::BoardModel& board, double distance_m = 0.5);

}  // namespace drishti::synth
