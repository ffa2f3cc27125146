#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "drishti/media_io.hpp"
#include "drishti/report.hpp"

namespace drishti::wire {

using Bytes = std::vector<std::uint8_t>;

// Frame layout: "DRSH" | version u8 | kind u8 | payload length u16-LE | payload.
inline constexpr std::uint8_t kMagic[4] = {'D', 'R', 'S', 'H'};
inline constexpr std::uint8_t kVersion = 0x01;
inline constexpr std::size_t kHeaderSize = 8;
inline constexpr std::size_t kMaxPayload = 65535;
inline constexpr std::uint16_t kDefaultPort = 5321;

enum class FrameKind : std::uint8_t { ObjectReportBatch = 0x01, Heartbeat = 0x02, Beep = 0x03 };

struct WireFrame {
  FrameKind kind = FrameKind::Heartbeat;
  Bytes payload;

  bool operator==(const WireFrame&) const = default;
};

// Batch payload: frame_id u32 | count u16 | count * (label_id u16, distance_mm u32, x u16, y u16, w u16, h u16).
inline constexpr std::size_t kBatchHeaderSize = 6;
inline constexpr std::size_t kBatchObjectSize = 14;
inline constexpr std::uint32_t kUnknownDistance = 0xFFFFFFFF;

struct WireObject {
  std::uint16_t label_id = 0;
  std::uint32_t distance_mm = kUnknownDistance;
  std::uint16_t x = 0, y = 0, w = 1, h = 1;

  bool operator==(const WireObject&) const = default;
};

struct ReportBatch {
  std::uint32_t frame_id = 0;
  std::vector<WireObject> objects;

  bool operator==(const ReportBatch&) const = default;
};

Bytes encode_batch_payload(const ReportBatch& batch);
/// Throws SizeMismatch when the length disagrees with the object count.
ReportBatch decode_batch_payload(std::span<const std::uint8_t> payload);

WireFrame batch_frame(const ReportBatch& batch);
WireFrame heartbeat_frame();
WireFrame beep_frame();

/// Throws PayloadTooLarge.
Bytes encode_frame(const WireFrame& frame);

enum class DecodeStatus { Frame, NeedMoreBytes, BadMagic, UnknownVersion, UnknownKind, PayloadLengthMismatch };

std::string_view to_string(DecodeStatus status);

struct DecodeResult {
  DecodeStatus status = DecodeStatus::NeedMoreBytes;
  WireFrame frame;           // set when status == Frame
  std::size_t consumed = 0;  // bytes used by the frame

  bool is_frame() const { return status == DecodeStatus::Frame; }
  bool is_error() const { return status != DecodeStatus::Frame && status != DecodeStatus::NeedMoreBytes; }
};

/// Decodes the first frame in `stream`. Never throws; errors are fatal for the connection.
DecodeResult decode_frame(std::span<const std::uint8_t> stream) noexcept;

/// Meters -> whole millimeters; unknown <-> 0xFFFFFFFF. Throws UnknownLabel.
WireObject to_wire(const ObjectReport& report, const io::LabelMap& labels);
/// Throws UnknownLabel.
ObjectReport from_wire(const WireObject& object, const io::LabelMap& labels);

}  // namespace drishti::wire
