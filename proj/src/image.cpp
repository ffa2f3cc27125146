#include "drishti/image.hpp"

#include <algorithm>

namespace drishti {

std::size_t DisparityMap::valid_count() const {
  return static_cast<std::size_t>(std::count_if(valid.begin(), valid.end(), [](std::uint8_t v) { return v != 0; }));
}

std::size_t DepthMap::valid_count() const {
  return static_cast<std::size_t>(std::count_if(valid.begin(), valid.end(), [](std::uint8_t v) { return v != 0; }));
}

bool intersects(const BBox& box, std::uint32_t width, std::uint32_t height) {
  if (box.w < 1 || box.h < 1) return false;
  const std::int64_t x0 = box.x, y0 = box.y;
  const std::int64_t x1 = x0 + box.w, y1 = y0 + box.h;
  return x1 > 0 && y1 > 0 && x0 < static_cast<std::int64_t>(width) && y0 < static_cast<std::int64_t>(height);
}

BBox clip(const BBox& box, std::uint32_t width, std::uint32_t height) {
  const std::int64_t x0 = std::max<std::int64_t>(box.x, 0);
  const std::int64_t y0 = std::max<std::int64_t>(box.y, 0);
  const std::int64_t x1 = std::min<std::int64_t>(static_cast<std::int64_t>(box.x) + box.w, width);
  const std::int64_t y1 = std::min<std::int64_t>(static_cast<std::int64_t>(box.y) + box.h, height);
  return BBox{static_cast<std::int32_t>(x0), static_cast<std::int32_t>(y0), static_cast<std::int32_t>(x1 - x0),
              static_cast<std::int32_t>(y1 - y0)};
}

}  // namespace drishti
