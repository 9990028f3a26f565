#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace projlens {

// Row-major binary mask.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(std::size_t height, std::size_t width, bool fill = false)
      : height_(height), width_(width), bits_(height * width, fill ? 1 : 0) {}

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return bits_.size(); }

  bool at(std::size_t r, std::size_t c) const { return bits_[r * width_ + c] != 0; }
  void set(std::size_t r, std::size_t c, bool v = true) { bits_[r * width_ + c] = v ? 1 : 0; }

  std::size_t count() const;
  bool empty_foreground() const { return count() == 0; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  bool operator==(const BinaryMask&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<std::uint8_t> bits_;
};

// Square-patch tiling of the encoder input, e.g. 24x24 patches of 14 px for a
// 336 px ViT. Patch index i is row-major: row i / grid_w, column i % grid_w.
struct PatchGrid {
  std::size_t grid_h = 24;
  std::size_t grid_w = 24;
  std::size_t patch_px = 14;

  std::size_t size() const { return grid_h * grid_w; }
  std::size_t input_h() const { return grid_h * patch_px; }
  std::size_t input_w() const { return grid_w * patch_px; }

  // "24x24x14" -> {24, 24, 14}.
  static PatchGrid parse(std::string_view text);
  std::string to_string() const;

  bool operator==(const PatchGrid&) const = default;
};

struct BBox {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
  double area() const;
  bool operator==(const BBox&) const = default;
};

struct BBoxScored {
  BBox box;
  double score = 0;
};

// COCO compressed RLE. Runs are column-major and alternate starting with a
// zeros run (possibly empty). Each count from the third onward is stored as
// the difference to the count two positions back; values are written as
// little-endian 5-bit groups with 0x20 as the continuation flag and 0x10 as
// the sign bit of the last group, each group offset by 48 into ASCII.
std::vector<std::uint32_t> rle_counts(const BinaryMask& mask);
BinaryMask mask_from_counts(std::span<const std::uint32_t> counts, std::size_t h, std::size_t w);
std::string counts_to_string(std::span<const std::uint32_t> counts);
std::vector<std::int64_t> string_to_counts(std::string_view rle);

std::string rle_encode(const BinaryMask& mask);
BinaryMask rle_decode(std::string_view rle, std::size_t h, std::size_t w);

// |a & b| / |a | b|, 0 when both are empty.
double mask_iou(const BinaryMask& a, const BinaryMask& b);
double box_iou(const BBox& a, const BBox& b);

// Greedy NMS: visit boxes by descending score (ties by input index) and keep
// a box unless its IoU with an already kept box exceeds iou_thresh.
std::vector<std::size_t> nms(std::span<const BBoxScored> boxes, double iou_thresh = 0.5);

// Patches with at least min_frac of their pixels covered. The mask must
// already be at the grid's input resolution.
std::vector<std::size_t> patches_covered(const BinaryMask& mask, const PatchGrid& grid, double min_frac = 0.5);

// Bilinear interpolation (half-pixel centres, edge clamped) of the {0,1}
// field, thresholded at >= 0.5.
BinaryMask resample_mask(const BinaryMask& mask, std::size_t out_h, std::size_t out_w);

enum class ResizeMode {
  squash,  // direct resize, aspect ratio distorted
  pad,     // zero-pad to a centred square first, then resize
};

BinaryMask fit_mask_to_grid(const BinaryMask& mask, const PatchGrid& grid, ResizeMode mode = ResizeMode::squash);

BinaryMask patch_set_to_mask(std::span<const std::size_t> indices, const PatchGrid& grid);

// Pixels whose centres fall inside the box.
BinaryMask rasterize_bbox(const BBox& box, std::size_t h, std::size_t w);

}  // namespace projlens
