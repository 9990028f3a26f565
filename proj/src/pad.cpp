#include "projlens/pad.hpp"

#include "projlens/error.hpp"

#include <algorithm>
#include <unordered_set>

namespace projlens {
namespace {

using nlohmann::json;

const json& require(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(Errc::MissingField, std::string("missing field '") + key + "'");
  return *it;
}

std::size_t as_pixels(const json& v, const char* what) {
  if (!v.is_number()) throw Error(Errc::ParseError, std::string(what) + " must be a number");
  const double x = v.get<double>();
  if (!(x >= 1.0) || x != static_cast<double>(static_cast<std::size_t>(x))) {
    throw Error(Errc::ParseError, std::string(what) + " must be a positive integer");
  }
  return static_cast<std::size_t>(x);
}

BBox clamp_box(BBox b, double w, double h) {
  b.x1 = std::clamp(b.x1, 0.0, w);
  b.x2 = std::clamp(b.x2, 0.0, w);
  b.y1 = std::clamp(b.y1, 0.0, h);
  b.y2 = std::clamp(b.y2, 0.0, h);
  if (b.x2 < b.x1) std::swap(b.x1, b.x2);
  if (b.y2 < b.y1) std::swap(b.y1, b.y2);
  return b;
}

MaskAnnotation annotation_from_json(const json& j, std::size_t width, std::size_t height) {
  if (!j.is_object()) throw Error(Errc::ParseError, "label entry must be an object");
  MaskAnnotation a;
  const auto& tag = require(j, "tag");
  if (!tag.is_string()) throw Error(Errc::ParseError, "tag must be a string");
  a.tag = tag.get<std::string>();
  const auto& bbox = require(j, "bbox");
  if (!bbox.is_array() || bbox.size() != 4 || !std::all_of(bbox.begin(), bbox.end(), [](const json& v) { return v.is_number(); })) {
    throw Error(Errc::ParseError, "bbox of '" + a.tag + "' must be four numbers");
  }
  a.bbox = clamp_box({bbox[0].get<double>(), bbox[1].get<double>(), bbox[2].get<double>(), bbox[3].get<double>()},
                     static_cast<double>(width), static_cast<double>(height));
  a.mask_h = height;
  a.mask_w = width;
  if (auto it = j.find("rle_mask"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw Error(Errc::ParseError, "rle_mask of '" + a.tag + "' must be a string");
    a.rle = it->get<std::string>();
    try {
      (void)rle_decode(*a.rle, height, width);
    } catch (const Error& e) {
      throw Error(e.code(), "rle_mask of '" + a.tag + "': " + e.detail());
    }
  }
  return a;
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::ParseError, std::string("invalid JSON: ") + e.what());
  }
}

std::vector<const json*> record_list(const json& doc) {
  std::vector<const json*> out;
  if (doc.is_array()) {
    for (const auto& r : doc) out.push_back(&r);
  } else if (doc.is_object()) {
    out.push_back(&doc);
  } else {
    throw Error(Errc::ParseError, "PAD document must be a record or an array of records");
  }
  return out;
}

}  // namespace

BinaryMask MaskAnnotation::mask() const {
  if (rle) return rle_decode(*rle, mask_h, mask_w);
  return rasterize_bbox(bbox, mask_h, mask_w);
}

PadRecord pad_record_from_json(const json& j) {
  if (!j.is_object()) throw Error(Errc::ParseError, "record must be an object");
  PadRecord r;
  const auto& id = require(j, "image_id");
  if (!id.is_string()) throw Error(Errc::ParseError, "image_id must be a string");
  r.image_id = id.get<std::string>();
  const auto& size = require(j, "size");
  if (!size.is_array() || size.size() != 2) throw Error(Errc::ParseError, "size must be [width, height]");
  r.width = as_pixels(size[0], "width");
  r.height = as_pixels(size[1], "height");
  const auto& caption = require(j, "caption");
  if (!caption.is_string()) throw Error(Errc::ParseError, "caption must be a string");
  r.caption = caption.get<std::string>();
  const auto& labels = require(j, "labels");
  if (!labels.is_array()) throw Error(Errc::ParseError, "labels must be an array");
  r.labels.reserve(labels.size());
  for (const auto& l : labels) r.labels.push_back(annotation_from_json(l, r.width, r.height));
  return r;
}

std::vector<PadRecord> parse_pad(std::string_view json_text) {
  const json doc = parse_json(json_text);
  std::vector<PadRecord> out;
  const auto list = record_list(doc);
  out.reserve(list.size());
  for (std::size_t i = 0; i < list.size(); ++i) {
    try {
      out.push_back(pad_record_from_json(*list[i]));
    } catch (const Error& e) {
      throw Error(e.code(), "record " + std::to_string(i) + ": " + e.detail());
    }
  }
  return out;
}

nlohmann::ordered_json pad_record_to_json(const PadRecord& record) {
  nlohmann::ordered_json j;
  j["image_id"] = record.image_id;
  j["size"] = {record.width, record.height};
  j["caption"] = record.caption;
  auto labels = nlohmann::ordered_json::array();
  for (const auto& a : record.labels) {
    nlohmann::ordered_json l;
    l["tag"] = a.tag;
    l["bbox"] = {a.bbox.x1, a.bbox.y1, a.bbox.x2, a.bbox.y2};
    if (a.rle) l["rle_mask"] = *a.rle;
    labels.push_back(std::move(l));
  }
  j["labels"] = std::move(labels);
  return j;
}

std::string emit_pad(const std::vector<PadRecord>& records) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : records) arr.push_back(pad_record_to_json(r));
  return arr.dump(2) + "\n";
}

PadValidation validate_pad(std::string_view json_text) {
  const json doc = parse_json(json_text);
  const auto list = record_list(doc);
  PadValidation v;
  v.total = list.size();
  for (std::size_t i = 0; i < list.size(); ++i) {
    try {
      v.records.push_back(pad_record_from_json(*list[i]));
    } catch (const Error& e) {
      PadIssue issue;
      issue.index = i;
      if (list[i]->is_object()) {
        if (auto it = list[i]->find("image_id"); it != list[i]->end() && it->is_string()) issue.image_id = it->get<std::string>();
      }
      issue.code = std::string(errc_name(e.code()));
      issue.message = e.detail();
      v.issues.push_back(std::move(issue));
    }
  }
  return v;
}

PadStats pad_stats(const std::vector<PadRecord>& records) {
  PadStats s;
  s.records = records.size();
  std::unordered_set<std::string> tags;
  for (const auto& r : records) {
    s.regions += r.labels.size();
    for (const auto& a : r.labels) {
      tags.insert(a.tag);
      if (a.rle) ++s.masked_regions;
    }
  }
  s.unique_tags = tags.size();
  return s;
}

}  // namespace projlens
