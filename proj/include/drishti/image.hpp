#pragma once

#include <cstdint>
#include <vector>

namespace drishti {

/// Row-major 8-bit grayscale frame.
struct GrayImage {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> pixels;

  GrayImage() = default;
  GrayImage(std::uint32_t w, std::uint32_t h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t at(std::uint32_t x, std::uint32_t y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(std::uint32_t x, std::uint32_t y) { return pixels[static_cast<std::size_t>(y) * width + x]; }

  bool operator==(const GrayImage&) const = default;
};

/// Per-pixel disparity in pixels. `valid[i] == 0` means the value carries no meaning.
struct DisparityMap {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<float> values;
  std::vector<std::uint8_t> valid;

  DisparityMap() = default;
  DisparityMap(std::uint32_t w, std::uint32_t h)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, 0.0f), valid(static_cast<std::size_t>(w) * h, 0) {}

  std::size_t index(std::uint32_t x, std::uint32_t y) const { return static_cast<std::size_t>(y) * width + x; }
  std::size_t valid_count() const;
};

/// Per-pixel metric depth; mask mirrors the disparity it was computed from.
struct DepthMap {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> valid;

  DepthMap() = default;
  DepthMap(std::uint32_t w, std::uint32_t h)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, 0.0), valid(static_cast<std::size_t>(w) * h, 0) {}

  std::size_t index(std::uint32_t x, std::uint32_t y) const { return static_cast<std::size_t>(y) * width + x; }
  std::size_t valid_count() const;
};

/// Axis-aligned box; covers columns [x, x+w) and rows [y, y+h).
struct BBox {
  std::int32_t x = 0;
  std::int32_t y = 0;
  std::int32_t w = 1;
  std::int32_t h = 1;

  bool operator==(const BBox&) const = default;
  auto operator<=>(const BBox&) const = default;
};

/// True when `box` shares at least one pixel with a width x height image.
bool intersects(const BBox& box, std::uint32_t width, std::uint32_t height);

/// Clips `box` to the image; the result is only meaningful when `intersects` holds.
BBox clip(const BBox& box, std::uint32_t width, std::uint32_t height);

}  // namespace drishti
