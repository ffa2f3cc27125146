#include "drishti/stereo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <vector>

#include <fmt/format.h>

#include "drishti/error.hpp"

namespace drishti::stereo {

namespace {

using Cost = std::uint32_t;
constexpr Cost kNoCost = std::numeric_limits<Cost>::max();

void check_pair(const GrayImage& left, const GrayImage& right) {
  if (left.width != right.width || left.height != right.height)
    throw Error(Errc::SizeMismatch,
                fmt::format("left {}x{} vs right {}x{}", left.width, left.height, right.width, right.height));
}

// Winner selection shared by both implementations; `costs[k]` belongs to d_min + k.
void select(const Cost* costs, int count, const MatchParams& p, DisparityMap& out, std::size_t index) {
  int best = 0;
  for (int k = 1; k < count; ++k)
    if (costs[k] < costs[best]) best = k;
  Cost second = kNoCost;
  for (int k = 0; k < count; ++k)
    if (std::abs(k - best) > 1 && costs[k] < second) second = costs[k];
  if (second != kNoCost && static_cast<double>(costs[best]) * p.uniqueness_ratio >= static_cast<double>(second)) return;
  out.values[index] = static_cast<float>(p.d_min + best);
  out.valid[index] = 1;
}

}  // namespace

void MatchParams::validate() const {
  if (window < 3 || window % 2 == 0) throw Error(Errc::InvalidParams, fmt::format("window {} must be odd and >= 3", window));
  if (d_min < 0 || d_min >= d_max) throw Error(Errc::InvalidParams, fmt::format("need 0 <= d_min < d_max, got [{}, {}]", d_min, d_max));
  if (!(uniqueness_ratio >= 1.0)) throw Error(Errc::InvalidParams, "uniqueness_ratio must be >= 1");
}

DisparityMap compute_disparity_reference(const GrayImage& left, const GrayImage& right, const MatchParams& p) {
  check_pair(left, right);
  p.validate();
  const int w = static_cast<int>(left.width), h = static_cast<int>(left.height);
  const int half = p.window / 2;
  const int count = p.d_max - p.d_min + 1;
  DisparityMap out(left.width, left.height);
  std::vector<Cost> costs(static_cast<std::size_t>(count));
  for (int v = half; v < h - half; ++v) {
    for (int u = half + p.d_max; u < w - half; ++u) {
      for (int k = 0; k < count; ++k) {
        const int d = p.d_min + k;
        Cost sad = 0;
        for (int dy = -half; dy <= half; ++dy)
          for (int dx = -half; dx <= half; ++dx)
            sad += static_cast<Cost>(std::abs(static_cast<int>(left.at(u + dx, v + dy)) -
                                              static_cast<int>(right.at(u + dx - d, v + dy))));
        costs[static_cast<std::size_t>(k)] = sad;
      }
      select(costs.data(), count, p, out, out.index(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v)));
    }
  }
  return out;
}

DisparityMap compute_disparity(const GrayImage& left, const GrayImage& right, const MatchParams& p) {
  check_pair(left, right);
  p.validate();
  const int w = static_cast<int>(left.width), h = static_cast<int>(left.height);
  const int half = p.window / 2;
  const int count = p.d_max - p.d_min + 1;
  const int u_begin = half + p.d_max;
  const int u_end = w - half;
  DisparityMap out(left.width, left.height);
  if (u_begin >= u_end || 2 * half >= h) return out;

  const std::uint8_t* lp = left.pixels.data();
  const std::uint8_t* rp = right.pixels.data();

#pragma omp parallel
  {
    // costs[k * w + u]: window SAD for disparity d_min + k at column u of the current row.
    std::vector<Cost> costs(static_cast<std::size_t>(count) * static_cast<std::size_t>(w));
    std::vector<Cost> column(static_cast<std::size_t>(w));
    std::vector<Cost> pixel_costs(static_cast<std::size_t>(count));

#pragma omp for schedule(static)
    for (int v = half; v < h - half; ++v) {
      for (int k = 0; k < count; ++k) {
        const int d = p.d_min + k;
        // Vertical window sums for every column where both windows exist.
        for (int u = d; u < w; ++u) {
          Cost s = 0;
          for (int dy = -half; dy <= half; ++dy) {
            const std::size_t row = static_cast<std::size_t>(v + dy) * static_cast<std::size_t>(w);
            s += static_cast<Cost>(std::abs(static_cast<int>(lp[row + u]) - static_cast<int>(rp[row + u - d])));
          }
          column[static_cast<std::size_t>(u)] = s;
        }
        // Horizontal running sum.
        Cost* row_costs = costs.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(w);
        Cost running = 0;
        for (int u = u_begin - half; u <= u_begin + half; ++u) running += column[static_cast<std::size_t>(u)];
        row_costs[u_begin] = running;
        for (int u = u_begin + 1; u < u_end; ++u) {
          running += column[static_cast<std::size_t>(u + half)];
          running -= column[static_cast<std::size_t>(u - half - 1)];
          row_costs[u] = running;
        }
      }
      for (int u = u_begin; u < u_end; ++u) {
        for (int k = 0; k < count; ++k)
          pixel_costs[static_cast<std::size_t>(k)] = costs[static_cast<std::size_t>(k) * static_cast<std::size_t>(w) + static_cast<std::size_t>(u)];
        select(pixel_costs.data(), count, p, out, out.index(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v)));
      }
    }
  }
  return out;
}

double depth_from_disparity(double disparity_px, const calib::StereoRig& rig) {
  if (!(disparity_px > 0.0)) throw Error(Errc::NonPositiveDisparity, fmt::format("d = {}", disparity_px));
  return rig.baseline() * rig.left.fx / disparity_px;
}

double depth_from_disparity(double disparity_px, double baseline_m, double focal_mm, double pixel_size_mm) {
  if (!(disparity_px > 0.0)) throw Error(Errc::NonPositiveDisparity, fmt::format("d = {}", disparity_px));
  return (baseline_m * focal_mm) / (disparity_px * pixel_size_mm);
}

DepthMap depth_map(const DisparityMap& disparity, const calib::StereoRig& rig) {
  DepthMap out(disparity.width, disparity.height);
  const double bf = rig.baseline() * rig.left.fx;
  for (std::size_t i = 0; i < disparity.values.size(); ++i) {
    const double d = disparity.values[i];
    if (disparity.valid[i] && d > 0.0 && std::isfinite(d)) {
      out.values[i] = bf / d;
      out.valid[i] = 1;
    }
  }
  return out;
}

double object_distance(const DepthMap& depth, const BBox& box) {
  if (!intersects(box, depth.width, depth.height))
    throw Error(Errc::BadBBox, fmt::format("box ({},{},{},{}) misses the {}x{} image", box.x, box.y, box.w, box.h,
                                           depth.width, depth.height));
  const BBox c = clip(box, depth.width, depth.height);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::int32_t y = c.y; y < c.y + c.h; ++y) {
    for (std::int32_t x = c.x; x < c.x + c.w; ++x) {
      const std::size_t i = depth.index(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y));
      if (depth.valid[i]) {
        sum += depth.values[i];
        ++n;
      }
    }
  }
  if (n == 0) throw Error(Errc::NoValidDepth, "no valid depth inside the box");
  return sum / static_cast<double>(n);
}

}  // namespace drishti::stereo
