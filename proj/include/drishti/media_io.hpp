#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drishti/image.hpp"

namespace drishti::io {

using Bytes = std::vector<std::uint8_t>;

// ---------------------------------------------------------------------------
// Images and disparity containers

/// Binary PGM (P5) with maxval <= 255. Header comments are tolerated.
GrayImage decode_pgm(std::span<const std::uint8_t> bytes);

/// Canonical form: "P5\n<w> <h>\n255\n" then row-major pixels.
Bytes encode_pgm(const GrayImage& img);

/// "DSP1", width u32-LE, height u32-LE, width*height float32-LE. NaN marks invalid pixels.
DisparityMap decode_dispmap(std::span<const std::uint8_t> bytes);
Bytes encode_dispmap(const DisparityMap& map);

Bytes read_file(const std::string& path);
std::string read_text_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);
void write_text_file(const std::string& path, std::string_view text);

// ---------------------------------------------------------------------------
// Checkerboard corner observations

/// Inner-corner grid; corner index k sits at board coordinates ((k % cols) * square, (k / cols) * square, 0).
struct BoardModel {
  std::uint32_t cols = 5;
  std::uint32_t rows = 4;
  double square_size = 0.03;

  std::uint32_t corner_count() const { return cols * rows; }
  bool operator==(const BoardModel&) const = default;
};

struct Corner {
  double u = 0.0;
  double v = 0.0;
  bool operator==(const Corner&) const = default;
};

enum class CameraSide : char { Left = 'L', Right = 'R' };

struct ViewObservation {
  std::uint32_t view_id = 0;
  CameraSide camera = CameraSide::Left;
  std::vector<Corner> corners;  // indexed by corner index
};

struct CornerObservationSet {
  BoardModel board;
  std::vector<ViewObservation> views;  // sorted by (view_id, camera)

  /// Views of one camera only, preserving view order.
  CornerObservationSet for_camera(CameraSide side) const;
};

CornerObservationSet parse_corner_csv(std::string_view text);
std::string write_corner_csv(const CornerObservationSet& set);

// ---------------------------------------------------------------------------
// Labels and detection annotations

/// Bijective id <-> label table.
class LabelMap {
 public:
  LabelMap() = default;

  /// Throws MalformedLine / DuplicateLabel.
  void add(std::uint16_t id, const std::string& label, std::size_t line = 0);

  std::optional<std::uint16_t> id_of(std::string_view label) const;
  std::optional<std::string> label_of(std::uint16_t id) const;
  bool contains(std::string_view label) const { return id_of(label).has_value(); }
  std::size_t size() const { return by_id_.size(); }
  const std::map<std::uint16_t, std::string>& entries() const { return by_id_; }

 private:
  std::map<std::uint16_t, std::string> by_id_;
  std::map<std::string, std::uint16_t, std::less<>> by_label_;
};

LabelMap load_label_map(std::string_view text);
std::string write_label_map(const LabelMap& map);

/// The 90-entry everyday-object vocabulary, ids 1..90.
const LabelMap& default_label_map();

struct Annotation {
  std::string label;
  BBox box;
  double confidence = 0.0;
};

struct AnnotationSet {
  std::map<std::string, std::vector<Annotation>, std::less<>> frames;
};

AnnotationSet parse_annotation_csv(std::string_view text, const LabelMap& labels);

}  // namespace drishti::io
