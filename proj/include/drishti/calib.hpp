#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "drishti/image.hpp"
#include "drishti/media_io.hpp"

namespace drishti::calib {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Pinhole intrinsics. fx, fy, cx, cy are in pixels; the physical focal length
/// follows from the pixel pitch so that f = fx * pixel_size.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  double pixel_size_mm = 1.0;

  double focal_mm() const { return fx * pixel_size_mm; }
  Mat3 matrix() const;

  static CameraIntrinsics from_physical(double focal_mm, double pixel_size_mm, double cx, double cy);
};

/// Board-to-camera rigid transform, rotation as an axis-angle vector.
struct Pose {
  Vec3 rotation = Vec3::Zero();
  Vec3 translation = Vec3::Zero();

  Mat3 rotation_matrix() const;
  Vec3 apply(const Vec3& p) const { return rotation_matrix() * p + translation; }

  static Pose from_matrix(const Mat3& r, const Vec3& t);
};

/// Two cameras with X_right = R(relative_rotation) * X_left + baseline_vector.
struct StereoRig {
  CameraIntrinsics left;
  CameraIntrinsics right;
  Vec3 relative_rotation = Vec3::Zero();
  Vec3 baseline_vector = Vec3::Zero();

  double baseline() const { return baseline_vector.norm(); }
};

struct ImageSize {
  std::uint32_t width = 640;
  std::uint32_t height = 480;
};

struct CoverageBuckets {
  bool x_left = false;
  bool x_right = false;
  bool y_top = false;
  bool y_bottom = false;
  bool skew = false;
  bool size_fill = false;
  bool size_far = false;
  bool overall_tilt = false;

  CoverageBuckets& operator|=(const CoverageBuckets& other);
  bool operator==(const CoverageBuckets&) const = default;

  /// (name, value) in a fixed order.
  std::vector<std::pair<std::string, bool>> entries() const;
  /// Names of buckets that are still false.
  std::vector<std::string> unfilled() const;
};

struct CalibrationReport {
  CameraIntrinsics intrinsics;
  std::vector<std::uint32_t> view_ids;
  std::vector<Pose> poses;
  double rms_px = 0.0;
  CoverageBuckets coverage;
  std::vector<double> cost_history;  // cost after each accepted step, starting with the initial cost
  int iterations = 0;
};

struct StereoCalibration {
  StereoRig rig;
  std::vector<std::uint32_t> view_ids;
  std::vector<Pose> left_poses;
  double rms_px = 0.0;
  CoverageBuckets coverage;
  std::vector<double> cost_history;
  int iterations = 0;
};

struct SolverOptions {
  double initial_lambda = 1e-3;
  double lambda_up = 10.0;
  double lambda_down = 10.0;
  double relative_tolerance = 1e-10;
  int max_iterations = 100;
  ImageSize image_size{};
};

/// Board-plane coordinates (z = 0) of every inner corner, in corner-index order.
std::vector<Vec3> board_points(const io::BoardModel& board);

/// u = fx X/Z + cx, v = fy Y/Z + cy after the rigid transform. Throws BehindCamera when Z <= 0.
Vec2 project_point(const CameraIntrinsics& intr, const Pose& pose, const Vec3& point);

/// Exact projections of the board in every pose plus isotropic Gaussian pixel noise.
/// `rig`, when given, also emits right-camera views; intrinsics for the left camera then come from the rig.
io::CornerObservationSet generate_synthetic_observations(const CameraIntrinsics& intr, const std::optional<StereoRig>& rig,
                                                         std::span<const Pose> poses, const io::BoardModel& board,
                                                         double noise_sigma_px, std::uint64_t seed);

/// Normalized DLT, scaled so H(2,2) == 1.
Mat3 estimate_homography(std::span<const Vec2> board_pts, std::span<const Vec2> img_pts);

/// Closed-form intrinsics from >= 3 plane homographies (absolute-conic constraints).
CameraIntrinsics init_intrinsics(std::span<const Mat3> homographies, double pixel_size_mm = 1.0);

/// Board pose from a homography and known intrinsics.
Pose pose_from_homography(const CameraIntrinsics& intr, const Mat3& homography);

/// Damped least-squares over {fx, fy, cx, cy} and every view pose.
/// `obs` must hold views of a single camera. Poses are initialized from per-view homographies.
CalibrationReport refine_calibration(const io::CornerObservationSet& obs, const CameraIntrinsics& init,
                                     const SolverOptions& options = {});

/// Homographies -> closed-form init -> refinement.
CalibrationReport calibrate_camera(const io::CornerObservationSet& obs, double pixel_size_mm,
                                   const SolverOptions& options = {});

/// Joint refinement of both intrinsics, the left view poses and the left-to-right transform.
StereoCalibration calibrate_stereo(const io::CornerObservationSet& left_obs, const io::CornerObservationSet& right_obs,
                                   const CameraIntrinsics& left_intr, const CameraIntrinsics& right_intr,
                                   const SolverOptions& options = {});

/// Coverage thresholds: outer 20% bands, 15 deg skew, 70% / 25% diagonal fill, 10 deg tilt.
CoverageBuckets classify_coverage(std::span<const io::Corner> view_corners, const Pose& pose, ImageSize image_size);

struct Rectification {
  Mat3 left_rotation = Mat3::Identity();   // applied to left-camera coordinates
  Mat3 right_rotation = Mat3::Identity();  // applied to right-camera coordinates
  CameraIntrinsics left;
  CameraIntrinsics right;
};

/// Splits the relative rotation between both cameras, then aligns the x-axis with the baseline.
Rectification rectify_pair(const StereoRig& rig);

/// The ideal row-aligned rig seen after applying `rect`.
StereoRig rectified_rig(const StereoRig& rig, const Rectification& rect);

/// Inverse-maps `src` through a rectifying rotation with bilinear sampling; unmapped pixels are 0.
GrayImage rectify_image(const GrayImage& src, const CameraIntrinsics& src_intr, const Mat3& rotation,
                        const CameraIntrinsics& dst_intr);

// Line-oriented report text: "param,<name>,<value>", "rms_px,<value>", "coverage,<bucket>,<true|false>".
std::string format_report(const CalibrationReport& report);
std::string format_report(const StereoCalibration& calibration);
CameraIntrinsics parse_intrinsics(std::string_view report_text);
StereoRig parse_stereo_rig(std::string_view report_text);

}  // namespace drishti::calib
