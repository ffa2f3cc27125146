#include "drishti/wire.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include <fmt/format.h>

#include "drishti/error.hpp"

namespace drishti::wire {

namespace {

void put_u16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

bool known_kind(std::uint8_t k) { return k >= 0x01 && k <= 0x03; }

bool payload_consistent(FrameKind kind, std::span<const std::uint8_t> payload) {
  if (kind != FrameKind::ObjectReportBatch) return payload.empty();
  if (payload.size() < kBatchHeaderSize) return false;
  const std::size_t count = get_u16(payload, 4);
  return payload.size() == kBatchHeaderSize + kBatchObjectSize * count;
}

std::uint16_t clamp_u16(std::int64_t v) { return static_cast<std::uint16_t>(std::clamp<std::int64_t>(v, 0, 65535)); }

}  // namespace

Bytes encode_batch_payload(const ReportBatch& batch) {
  if (batch.objects.size() > (kMaxPayload - kBatchHeaderSize) / kBatchObjectSize)
    throw Error(Errc::PayloadTooLarge, fmt::format("{} objects in one batch", batch.objects.size()));
  Bytes out;
  out.reserve(kBatchHeaderSize + kBatchObjectSize * batch.objects.size());
  put_u32(out, batch.frame_id);
  put_u16(out, static_cast<std::uint16_t>(batch.objects.size()));
  for (const auto& o : batch.objects) {
    put_u16(out, o.label_id);
    put_u32(out, o.distance_mm);
    put_u16(out, o.x);
    put_u16(out, o.y);
    put_u16(out, o.w);
    put_u16(out, o.h);
  }
  return out;
}

ReportBatch decode_batch_payload(std::span<const std::uint8_t> payload) {
  if (!payload_consistent(FrameKind::ObjectReportBatch, payload))
    throw Error(Errc::SizeMismatch, "batch payload length disagrees with its object count");
  ReportBatch batch;
  batch.frame_id = get_u32(payload, 0);
  const std::size_t count = get_u16(payload, 4);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t at = kBatchHeaderSize + kBatchObjectSize * i;
    batch.objects.push_back(WireObject{get_u16(payload, at), get_u32(payload, at + 2), get_u16(payload, at + 6),
                                       get_u16(payload, at + 8), get_u16(payload, at + 10), get_u16(payload, at + 12)});
  }
  return batch;
}

WireFrame batch_frame(const ReportBatch& batch) { return WireFrame{FrameKind::ObjectReportBatch, encode_batch_payload(batch)}; }
WireFrame heartbeat_frame() { return WireFrame{FrameKind::Heartbeat, {}}; }
WireFrame beep_frame() { return WireFrame{FrameKind::Beep, {}}; }

Bytes encode_frame(const WireFrame& frame) {
  if (frame.payload.size() > kMaxPayload)
    throw Error(Errc::PayloadTooLarge, fmt::format("{} payload bytes", frame.payload.size()));
  if (!known_kind(static_cast<std::uint8_t>(frame.kind))) throw Error(Errc::MalformedLine, "undefined frame kind");
  if (!payload_consistent(frame.kind, frame.payload))
    throw Error(Errc::SizeMismatch, "payload does not match the frame kind's layout");
  Bytes out(kMagic, kMagic + 4);
  out.push_back(kVersion);
  out.push_back(static_cast<std::uint8_t>(frame.kind));
  put_u16(out, static_cast<std::uint16_t>(frame.payload.size()));
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
  return out;
}

std::string_view to_string(DecodeStatus status) {
  switch (status) {
    case DecodeStatus::Frame: return "Frame";
    case DecodeStatus::NeedMoreBytes: return "NeedMoreBytes";
    case DecodeStatus::BadMagic: return "BadMagic";
    case DecodeStatus::UnknownVersion: return "UnknownVersion";
    case DecodeStatus::UnknownKind: return "UnknownKind";
    case DecodeStatus::PayloadLengthMismatch: return "PayloadLengthMismatch";
  }
  return "Unknown";
}

DecodeResult decode_frame(std::span<const std::uint8_t> stream) noexcept {
  DecodeResult r;
  // Reject a corrupt prefix as soon as it is visible.
  const std::size_t magic_bytes = std::min<std::size_t>(stream.size(), 4);
  if (magic_bytes > 0 && std::memcmp(stream.data(), kMagic, magic_bytes) != 0) {
    r.status = DecodeStatus::BadMagic;
    return r;
  }
  if (stream.size() > 4 && stream[4] != kVersion) {
    r.status = DecodeStatus::UnknownVersion;
    return r;
  }
  if (stream.size() > 5 && !known_kind(stream[5])) {
    r.status = DecodeStatus::UnknownKind;
    return r;
  }
  if (stream.size() < kHeaderSize) return r;
  const std::size_t length = get_u16(stream, 6);
  if (stream.size() < kHeaderSize + length) return r;

  const auto kind = static_cast<FrameKind>(stream[5]);
  const auto payload = stream.subspan(kHeaderSize, length);
  if (!payload_consistent(kind, payload)) {
    r.status = DecodeStatus::PayloadLengthMismatch;
    return r;
  }
  try {
    r.frame.kind = kind;
    r.frame.payload.assign(payload.begin(), payload.end());
  } catch (...) {
    r.status = DecodeStatus::NeedMoreBytes;
    return r;
  }
  r.status = DecodeStatus::Frame;
  r.consumed = kHeaderSize + length;
  return r;
}

WireObject to_wire(const ObjectReport& report, const io::LabelMap& labels) {
  const auto id = labels.id_of(report.label);
  if (!id) throw Error(Errc::UnknownLabel, "'" + report.label + "'");
  WireObject o;
  o.label_id = *id;
  if (report.distance_m) {
    const double mm = std::round(*report.distance_m * 1000.0);
    o.distance_mm = static_cast<std::uint32_t>(std::clamp(mm, 1.0, static_cast<double>(kUnknownDistance - 1)));
  } else {
    o.distance_mm = kUnknownDistance;
  }
  o.x = clamp_u16(report.box.x);
  o.y = clamp_u16(report.box.y);
  o.w = clamp_u16(std::max(report.box.w, 1));
  o.h = clamp_u16(std::max(report.box.h, 1));
  return o;
}

ObjectReport from_wire(const WireObject& object, const io::LabelMap& labels) {
  const auto label = labels.label_of(object.label_id);
  if (!label) throw Error(Errc::UnknownLabel, fmt::format("label id {}", object.label_id));
  ObjectReport r;
  r.label = *label;
  if (object.distance_mm != kUnknownDistance) r.distance_m = object.distance_mm / 1000.0;
  r.box = BBox{object.x, object.y, std::max<std::int32_t>(object.w, 1), std::max<std::int32_t>(object.h, 1)};
  return r;
}

}  // namespace drishti::wire
