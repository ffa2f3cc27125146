#pragma once

#include <optional>
#include <string>

#include "drishti/image.hpp"

namespace drishti {

/// What the perception unit tells the companion device about one object.
/// An empty distance means no valid depth was available; the object is still reported.
struct ObjectReport {
  std::string label;
  std::optional<double> distance_m;
  BBox box;

  bool operator==(const ObjectReport&) const = default;
};

}  // namespace drishti
