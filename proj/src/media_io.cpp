#include "drishti/media_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "drishti/error.hpp"
#include "text_util.hpp"

namespace drishti::io {

namespace {

constexpr char kDispMagic[4] = {'D', 'S', 'P', '1'};

bool is_pnm_space(std::uint8_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

// Reads one unsigned decimal header token, skipping whitespace and '#' comments.
std::optional<std::uint64_t> read_header_uint(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  for (;;) {
    while (pos < bytes.size() && is_pnm_space(bytes[pos])) ++pos;
    if (pos < bytes.size() && bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  if (pos >= bytes.size()) return std::nullopt;
  std::uint64_t value = 0;
  std::size_t digits = 0;
  while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
    value = value * 10 + (bytes[pos] - '0');
    if (value > std::numeric_limits<std::uint32_t>::max()) return std::nullopt;
    ++pos;
    ++digits;
  }
  if (digits == 0) return std::nullopt;
  return value;
}

void put_u32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

}  // namespace

GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw Error(Errc::BadMagic, "expected P5 header");
  std::size_t pos = 2;
  if (pos >= bytes.size() || !(is_pnm_space(bytes[pos]) || bytes[pos] == '#'))
    throw Error(Errc::BadMagic, "expected whitespace after P5");
  const auto w = read_header_uint(bytes, pos);
  const auto h = read_header_uint(bytes, pos);
  const auto maxval = read_header_uint(bytes, pos);
  if (!w || !h || !maxval) throw Error(Errc::TruncatedData, "incomplete PGM header");
  if (*maxval > 255 || *maxval == 0) throw Error(Errc::MaxvalUnsupported, fmt::format("maxval {}", *maxval));
  if (*w == 0 || *h == 0) throw Error(Errc::SizeMismatch, "PGM dimensions must be positive");
  if (pos >= bytes.size() || !is_pnm_space(bytes[pos])) throw Error(Errc::TruncatedData, "missing header terminator");
  ++pos;
  const std::size_t count = static_cast<std::size_t>(*w) * static_cast<std::size_t>(*h);
  if (bytes.size() - pos < count)
    throw Error(Errc::TruncatedData, fmt::format("need {} pixel bytes, have {}", count, bytes.size() - pos));
  GrayImage img;
  img.width = static_cast<std::uint32_t>(*w);
  img.height = static_cast<std::uint32_t>(*h);
  img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                    bytes.begin() + static_cast<std::ptrdiff_t>(pos + count));
  return img;
}

Bytes encode_pgm(const GrayImage& img) {
  const std::string header = fmt::format("P5\n{} {}\n255\n", img.width, img.height);
  Bytes out(header.begin(), header.end());
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

DisparityMap decode_dispmap(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kDispMagic, 4) != 0) throw Error(Errc::BadMagic, "expected DSP1");
  if (bytes.size() < 12) throw Error(Errc::SizeMismatch, "truncated DSP1 header");
  const std::uint32_t w = get_u32(bytes, 4);
  const std::uint32_t h = get_u32(bytes, 8);
  const std::uint64_t count = static_cast<std::uint64_t>(w) * h;
  if ((bytes.size() - 12) % 4 != 0 || (bytes.size() - 12) / 4 != count)
    throw Error(Errc::SizeMismatch, fmt::format("header claims {}x{}, payload has {} bytes", w, h, bytes.size() - 12));
  DisparityMap map(w, h);
  for (std::size_t i = 0; i < count; ++i) {
    const float value = std::bit_cast<float>(get_u32(bytes, 12 + 4 * i));
    if (std::isnan(value)) {
      map.values[i] = 0.0f;
      map.valid[i] = 0;
    } else {
      map.values[i] = value;
      map.valid[i] = 1;
    }
  }
  return map;
}

Bytes encode_dispmap(const DisparityMap& map) {
  Bytes out(kDispMagic, kDispMagic + 4);
  out.reserve(12 + map.values.size() * 4);
  put_u32(out, map.width);
  put_u32(out, map.height);
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    const float value = map.valid[i] ? map.values[i] : std::numeric_limits<float>::quiet_NaN();
    put_u32(out, std::bit_cast<std::uint32_t>(value));
  }
  return out;
}

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path);
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoFailure, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoFailure, "short write to " + path);
}

void write_text_file(const std::string& path, std::string_view text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// ---------------------------------------------------------------------------

CornerObservationSet CornerObservationSet::for_camera(CameraSide side) const {
  CornerObservationSet out;
  out.board = board;
  for (const auto& v : views)
    if (v.camera == side) out.views.push_back(v);
  return out;
}

CornerObservationSet parse_corner_csv(std::string_view text) {
  using text::Line;
  const std::vector<Line> lines = text::data_lines(text);
  if (lines.empty()) throw Error(Errc::MissingBoardHeader, "empty corner file", 1);

  CornerObservationSet set;
  {
    const auto& first = lines.front();
    if (first.fields.size() != 4 || first.fields[0] != "board")
      throw Error(Errc::MissingBoardHeader, "first line must be board,<cols>,<rows>,<square_size_m>", first.number);
    const auto cols = text::parse_uint(first.fields[1], first.number);
    const auto rows = text::parse_uint(first.fields[2], first.number);
    const double square = text::parse_double(first.fields[3], first.number);
    if (cols < 2 || rows < 2 || cols > 4096 || rows > 4096 || !(square > 0.0) || !std::isfinite(square))
      throw Error(Errc::MalformedLine, "board needs 2 <= cols,rows <= 4096 and square_size > 0", first.number);
    set.board = BoardModel{static_cast<std::uint32_t>(cols), static_cast<std::uint32_t>(rows), square};
  }
  const std::uint32_t n = set.board.corner_count();

  struct Pending {
    ViewObservation view;
    std::vector<std::uint8_t> seen;
    std::size_t count = 0;
    std::size_t first_line = 0;
  };
  std::map<std::pair<std::uint32_t, char>, Pending> pending;

  for (std::size_t i = 1; i < lines.size(); ++i) {
    const Line& line = lines[i];
    if (line.fields.size() != 6 || line.fields[0] != "view")
      throw Error(Errc::MalformedLine, "expected view,<view_id>,<L|R>,<corner_index>,<u_px>,<v_px>", line.number);
    const auto view_id = text::parse_uint(line.fields[1], line.number);
    if (line.fields[2] != "L" && line.fields[2] != "R")
      throw Error(Errc::MalformedLine, "camera must be L or R", line.number);
    const char cam = line.fields[2][0];
    const auto index = text::parse_uint(line.fields[3], line.number);
    const double u = text::parse_double(line.fields[4], line.number);
    const double v = text::parse_double(line.fields[5], line.number);
    if (!std::isfinite(u) || !std::isfinite(v)) throw Error(Errc::NonFiniteCoordinate, "corner coordinate", line.number);
    if (index >= n) throw Error(Errc::MalformedLine, fmt::format("corner index {} outside board of {}", index, n), line.number);
    if (view_id > std::numeric_limits<std::uint32_t>::max()) throw Error(Errc::MalformedLine, "view id", line.number);

    auto [it, inserted] = pending.try_emplace({static_cast<std::uint32_t>(view_id), cam});
    Pending& p = it->second;
    if (inserted) {
      p.view.view_id = static_cast<std::uint32_t>(view_id);
      p.view.camera = static_cast<CameraSide>(cam);
      p.view.corners.assign(n, Corner{});
      p.seen.assign(n, 0);
      p.first_line = line.number;
    }
    if (p.seen[index]) throw Error(Errc::MalformedLine, fmt::format("duplicate corner {}", index), line.number);
    p.seen[index] = 1;
    p.view.corners[index] = Corner{u, v};
    ++p.count;
  }

  for (auto& [key, p] : pending) {
    if (p.count != n)
      throw Error(Errc::IncompleteView,
                  fmt::format("view {} camera {} has {} of {} corners", key.first, key.second, p.count, n), p.first_line);
    set.views.push_back(std::move(p.view));
  }
  return set;
}

std::string write_corner_csv(const CornerObservationSet& set) {
  std::string out = fmt::format("board,{},{},{}\n", set.board.cols, set.board.rows, set.board.square_size);
  for (const auto& view : set.views)
    for (std::size_t k = 0; k < view.corners.size(); ++k)
      out += fmt::format("view,{},{},{},{},{}\n", view.view_id, static_cast<char>(view.camera), k, view.corners[k].u,
                         view.corners[k].v);
  return out;
}

// ---------------------------------------------------------------------------

void LabelMap::add(std::uint16_t id, const std::string& label, std::size_t line) {
  if (label.empty()) throw Error(Errc::MalformedLine, "empty label", line);
  if (by_id_.count(id)) throw Error(Errc::DuplicateLabel, fmt::format("id {} repeated", id), line);
  if (by_label_.count(label)) throw Error(Errc::DuplicateLabel, "label '" + label + "' repeated", line);
  by_id_.emplace(id, label);
  by_label_.emplace(label, id);
}

std::optional<std::uint16_t> LabelMap::id_of(std::string_view label) const {
  const auto it = by_label_.find(label);
  if (it == by_label_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> LabelMap::label_of(std::uint16_t id) const {
  const auto it = by_id_.find(id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

LabelMap load_label_map(std::string_view text) {
  LabelMap map;
  for (const auto& line : text::data_lines(text)) {
    if (line.fields.size() != 2) throw Error(Errc::MalformedLine, "expected id,label", line.number);
    const auto id = text::parse_uint(line.fields[0], line.number);
    if (id > std::numeric_limits<std::uint16_t>::max()) throw Error(Errc::MalformedLine, "label id exceeds u16", line.number);
    map.add(static_cast<std::uint16_t>(id), std::string(line.fields[1]), line.number);
  }
  return map;
}

std::string write_label_map(const LabelMap& map) {
  std::string out;
  for (const auto& [id, label] : map.entries()) out += fmt::format("{},{}\n", id, label);
  return out;
}

const LabelMap& default_label_map() {
  static const LabelMap map = [] {
    static constexpr const char* kLabels[90] = {
        "person",        "bicycle",      "car",           "motorcycle",    "airplane",     "bus",
        "train",         "truck",        "boat",          "traffic light", "fire hydrant", "street sign",
        "stop sign",     "parking meter", "bench",        "bird",          "cat",          "dog",
        "horse",         "sheep",        "cow",           "elephant",      "bear",         "zebra",
        "giraffe",       "hat",          "backpack",      "umbrella",      "shoe",         "eye glasses",
        "handbag",       "tie",          "suitcase",      "frisbee",       "skis",         "snowboard",
        "sports ball",   "kite",         "baseball bat",  "baseball glove", "skateboard",  "surfboard",
        "tennis racket", "bottle",       "plate",         "wine glass",    "cup",          "fork",
        "knife",         "spoon",        "bowl",          "banana",        "apple",        "sandwich",
        "orange",        "broccoli",     "carrot",        "hot dog",       "pizza",        "donut",
        "cake",          "chair",        "couch",         "potted plant",  "bed",          "mirror",
        "dining table",  "window",       "desk",          "toilet",        "door",         "tv",
        "laptop",        "mouse",        "remote",        "keyboard",      "cell phone",   "microwave",
        "oven",          "toaster",      "sink",          "refrigerator",  "blender",      "book",
        "clock",         "vase",         "scissors",      "teddy bear",    "hair drier",   "toothbrush"};
    LabelMap m;
    for (std::uint16_t i = 0; i < 90; ++i) m.add(static_cast<std::uint16_t>(i + 1), kLabels[i]);
    return m;
  }();
  return map;
}

AnnotationSet parse_annotation_csv(std::string_view text, const LabelMap& labels) {
  AnnotationSet set;
  for (const auto& line : text::data_lines(text)) {
    if (line.fields.size() != 7) throw Error(Errc::MalformedLine, "expected frame_id,label,x,y,w,h,confidence", line.number);
    if (line.fields[0].empty()) throw Error(Errc::MalformedLine, "empty frame id", line.number);
    Annotation a;
    a.label = std::string(line.fields[1]);
    if (!labels.contains(a.label)) throw Error(Errc::UnknownLabel, "'" + a.label + "'", line.number);
    a.box.x = text::parse_int32(line.fields[2], line.number);
    a.box.y = text::parse_int32(line.fields[3], line.number);
    a.box.w = text::parse_int32(line.fields[4], line.number);
    a.box.h = text::parse_int32(line.fields[5], line.number);
    if (a.box.w < 1 || a.box.h < 1) throw Error(Errc::BadBBox, "w and h must be >= 1", line.number);
    a.confidence = text::parse_double(line.fields[6], line.number);
    if (!(a.confidence >= 0.0 && a.confidence <= 1.0)) throw Error(Errc::BadConfidence, "must lie in [0,1]", line.number);
    set.frames[std::string(line.fields[0])].push_back(std::move(a));
  }
  return set;
}

}  // namespace drishti::io
