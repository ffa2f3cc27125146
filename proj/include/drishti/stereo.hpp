#pragma once

#include "drishti/calib.hpp"
#include "drishti/image.hpp"

namespace drishti::stereo {

struct MatchParams {
  int window = 9;  // odd, >= 3
  int d_min = 0;
  int d_max = 64;
  double uniqueness_ratio = 1.15;

  /// Throws InvalidParams.
  void validate() const;
};

/// Sum-of-absolute-differences block matching on a rectified pair.
///
/// A left pixel (u, v) is matched against right pixels (u - d, v) for every
/// d in [d_min, d_max]; the smallest cost wins, ties going to the smaller d.
/// The pixel is invalid when its window does not fit in both images for every
/// candidate, or when best * uniqueness_ratio >= the best cost at a disparity
/// more than one step away from the winner.
///
/// Rows are processed in parallel; the result is bit-identical to
/// compute_disparity_reference.
DisparityMap compute_disparity(const GrayImage& left, const GrayImage& right, const MatchParams& params = {});

/// Direct per-pixel evaluation of the same definition, single-threaded.
DisparityMap compute_disparity_reference(const GrayImage& left, const GrayImage& right, const MatchParams& params = {});

/// D = b * fx / d for the rig's left camera (equivalently b * f / (d * px)). Throws NonPositiveDisparity.
double depth_from_disparity(double disparity_px, const calib::StereoRig& rig);

/// Same relation in physical units: baseline in meters, focal length and pixel pitch in millimeters.
double depth_from_disparity(double disparity_px, double baseline_m, double focal_mm, double pixel_size_mm);

/// Element-wise depth; invalid or non-positive disparities become invalid depths.
DepthMap depth_map(const DisparityMap& disparity, const calib::StereoRig& rig);

/// Mean of the valid depths inside [x, x+w) x [y, y+h) clipped to the image.
/// Throws BadBBox when the box misses the image, NoValidDepth when nothing valid is inside.
double object_distance(const DepthMap& depth, const BBox& box);

}  // namespace drishti::stereo
