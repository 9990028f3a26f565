#pragma once

#include "projlens/mask.hpp"

#include <json.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace projlens {

// One object of a PAD record: a tag, a pixel bbox and (usually) a COCO RLE
// mask at the image's resolution.
struct MaskAnnotation {
  std::string tag;
  BBox bbox;
  std::optional<std::string> rle;
  std::size_t mask_h = 0;
  std::size_t mask_w = 0;

  // Decoded mask, or the filled bbox when the annotation carries no mask.
  BinaryMask mask() const;

  bool operator==(const MaskAnnotation&) const = default;
};

struct PadRecord {
  std::string image_id;
  std::size_t width = 0;
  std::size_t height = 0;
  std::string caption;
  std::vector<MaskAnnotation> labels;

  bool operator==(const PadRecord&) const = default;
};

// Accepts either a JSON array of records or a single record object. `size`
// is [width, height]; bboxes are clamped into the image. Throws on the first
// invalid record.
std::vector<PadRecord> parse_pad(std::string_view json_text);
PadRecord pad_record_from_json(const nlohmann::json& j);

nlohmann::ordered_json pad_record_to_json(const PadRecord& record);
std::string emit_pad(const std::vector<PadRecord>& records);

struct PadIssue {
  std::size_t index = 0;
  std::string image_id;
  std::string code;
  std::string message;
};

struct PadValidation {
  std::vector<PadRecord> records;  // only the records that validated
  std::vector<PadIssue> issues;
  std::size_t total = 0;
};

// Like parse_pad, but collects per-record failures instead of stopping at
// the first one. A top-level syntax error still throws.
PadValidation validate_pad(std::string_view json_text);

struct PadStats {
  std::size_t records = 0;
  std::size_t regions = 0;
  std::size_t unique_tags = 0;
  std::size_t masked_regions = 0;
};

PadStats pad_stats(const std::vector<PadRecord>& records);

}  // namespace projlens
