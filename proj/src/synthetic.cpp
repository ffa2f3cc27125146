#include "drishti/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace drishti::synth {

namespace {

double lattice(std::int64_t i, std::int64_t j, std::uint64_t seed) {
  const std::uint64_t h = mix(seed ^ mix(static_cast<std::uint64_t>(i) * 0x9E3779B97F4A7C15ull ^
                                         static_cast<std::uint64_t>(j) * 0xC2B2AE3D27D4EB4Full));
  return static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
}

double smooth_noise(double s, double t, double spacing, std::uint64_t seed) {
  const double x = s / spacing, y = t / spacing;
  const double fx = std::floor(x), fy = std::floor(y);
  const auto i = static_cast<std::int64_t>(fx), j = static_cast<std::int64_t>(fy);
  const double ax = x - fx, ay = y - fy;
  const double a = lattice(i, j, seed), b = lattice(i + 1, j, seed);
  const double c = lattice(i, j + 1, seed), d = lattice(i + 1, j + 1, seed);
  return (1 - ay) * ((1 - ax) * a + ax * b) + ay * ((1 - ax) * c + ax * d);
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0))); }

}  // namespace

std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double value_noise(double s, double t, std::uint64_t seed) {
  const double fine = smooth_noise(s, t, 1.5, seed);
  const double mid = smooth_noise(s, t, 4.0, mix(seed + 1));
  const double coarse = smooth_noise(s, t, 11.0, mix(seed + 2));
  return 255.0 * (0.5 * fine + 0.3 * mid + 0.2 * coarse);
}

GrayImage textured_image(std::uint32_t width, std::uint32_t height, std::uint64_t seed) {
  GrayImage img(width, height);
  for (std::uint32_t y = 0; y < height; ++y)
    for (std::uint32_t x = 0; x < width; ++x) img.at(x, y) = to_byte(value_noise(x, y, seed));
  return img;
}

GrayImage shift_left(const GrayImage& img, int shift, std::uint64_t seed) {
  GrayImage out(img.width, img.height);
  for (std::uint32_t y = 0; y < img.height; ++y) {
    for (std::uint32_t x = 0; x < img.width; ++x) {
      const std::int64_t src = static_cast<std::int64_t>(x) + shift;
      out.at(x, y) = (src >= 0 && src < static_cast<std::int64_t>(img.width))
                         ? img.at(static_cast<std::uint32_t>(src), y)
                         : to_byte(value_noise(static_cast<double>(src), y, seed));
    }
  }
  return out;
}

calib::StereoRig Scene::rig() const {
  calib::StereoRig r;
  r.left = calib::CameraIntrinsics{fx, fx, 0.5 * (width - 1.0), 0.5 * (height - 1.0), 1.0};
  r.right = r.left;
  r.relative_rotation.setZero();
  r.baseline_vector = calib::Vec3(-baseline_m, 0.0, 0.0);
  return r;
}

std::pair<GrayImage, GrayImage> render(const Scene& scene) {
  const double cx = 0.5 * (scene.width - 1.0), cy = 0.5 * (scene.height - 1.0);
  struct Rect {
    double x0, x1, y0, y1, z;
    std::uint64_t seed;
  };
  std::vector<Rect> rects;
  for (std::size_t k = 0; k < scene.objects.size(); ++k) {
    const auto& o = scene.objects[k];
    const double s = o.depth_m / scene.fx;
    rects.push_back({(o.box.x - cx) * s, (o.box.x + o.box.w - cx) * s, (o.box.y - cy) * s, (o.box.y + o.box.h - cy) * s,
                     o.depth_m, mix(scene.seed + 101 * (k + 1))});
  }

  const auto shade = [&](double u, double v, double cam_x) {
    double z = scene.background_depth_m;
    std::uint64_t seed = mix(scene.seed);
    for (const auto& r : rects) {
      const double x = (u - cx) * r.z / scene.fx + cam_x;
      const double y = (v - cy) * r.z / scene.fx;
      if (r.z < z && x >= r.x0 && x < r.x1 && y >= r.y0 && y < r.y1) {
        z = r.z;
        seed = r.seed;
      }
    }
    // Texture coordinates in pixels-at-depth so both views sample the same surface pattern.
    const double x = (u - cx) * z / scene.fx + cam_x;
    const double y = (v - cy) * z / scene.fx;
    return to_byte(value_noise(x * scene.fx / z, y * scene.fx / z, seed));
  };

  GrayImage left(scene.width, scene.height), right(scene.width, scene.height);
  for (std::uint32_t v = 0; v < scene.height; ++v) {
    for (std::uint32_t u = 0; u < scene.width; ++u) {
      left.at(u, v) = shade(u, v, 0.0);
      right.at(u, v) = shade(u, v, scene.baseline_m);
    }
  }
  return {std::move(left), std::move(right)};
}

std::vector<calib::Pose> calibration_poses(std::size_t count, const io::BoardModel& board, double distance_m) {
  const double pi = std::numbers::pi;
  const calib::Vec3 center((board.cols - 1) * board.square_size * 0.5, (board.rows - 1) * board.square_size * 0.5, 0.0);
  std::vector<calib::Pose> poses;
  for (std::size_t i = 0; i < count; ++i) {
    const double phase = 2.0 * pi * static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(count, 1));
    const double tilt = (20.0 + 12.0 * std::fmod(0.61803398875 * static_cast<double>(i), 1.0)) * pi / 180.0;
    const Eigen::Matrix3d r = (Eigen::AngleAxisd(0.15 * std::sin(3.0 * phase), calib::Vec3::UnitZ()) *
                               Eigen::AngleAxisd(tilt * std::sin(phase), calib::Vec3::UnitX()) *
                               Eigen::AngleAxisd(tilt * std::cos(phase), calib::Vec3::UnitY()))
                                  .toRotationMatrix();
    const double z = distance_m * (0.85 + 0.3 * std::fmod(0.37 * static_cast<double>(i), 1.0));
    const calib::Vec3 target(0.25 * z * std::cos(2.399963 * static_cast<double>(i)),
                             0.18 * z * std::sin(2.399963 * static_cast<double>(i)), z);
    poses.push_back(calib::Pose::from_matrix(r, target - r * center));
  }
  return poses;
}

}  // namespace drishti::synth
