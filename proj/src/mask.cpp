#include "projlens/mask.hpp"

#include "projlens/error.hpp"
#include "projlens/kernels.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

namespace projlens {

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

PatchGrid PatchGrid::parse(std::string_view text) {
  std::size_t parts[3] = {0, 0, 0};
  std::size_t k = 0;
  const char* p = text.data();
  const char* end = text.data() + text.size();
  while (k < 3) {
    auto [next, ec] = std::from_chars(p, end, parts[k]);
    if (ec != std::errc{} || parts[k] == 0) throw Error(Errc::InvalidArgument, "grid must look like 24x24x14, got '" + std::string(text) + "'");
    ++k;
    p = next;
    if (k < 3) {
      if (p == end || (*p != 'x' && *p != 'X')) throw Error(Errc::InvalidArgument, "grid must look like 24x24x14, got '" + std::string(text) + "'");
      ++p;
    }
  }
  if (p != end) throw Error(Errc::InvalidArgument, "trailing characters in grid '" + std::string(text) + "'");
  return PatchGrid{parts[0], parts[1], parts[2]};
}

std::string PatchGrid::to_string() const {
  return std::to_string(grid_h) + "x" + std::to_string(grid_w) + "x" + std::to_string(patch_px);
}

double BBox::area() const { return std::max(0.0, x2 - x1) * std::max(0.0, y2 - y1); }

std::vector<std::uint32_t> rle_counts(const BinaryMask& mask) {
  std::vector<std::uint32_t> counts;
  std::uint8_t current = 0;
  std::uint32_t run = 0;
  for (std::size_t c = 0; c < mask.width(); ++c) {
    for (std::size_t r = 0; r < mask.height(); ++r) {
      const std::uint8_t bit = mask.at(r, c) ? 1 : 0;
      if (bit != current) {
        counts.push_back(run);
        run = 0;
        current = bit;
      }
      ++run;
    }
  }
  counts.push_back(run);
  return counts;
}

BinaryMask mask_from_counts(std::span<const std::uint32_t> counts, std::size_t h, std::size_t w) {
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  if (total != static_cast<std::uint64_t>(h) * w) {
    throw Error(Errc::LengthMismatch, "RLE covers " + std::to_string(total) + " pixels, mask has " + std::to_string(h * w));
  }
  BinaryMask mask(h, w);
  std::size_t pos = 0;
  bool value = false;
  for (auto c : counts) {
    for (std::uint32_t k = 0; k < c; ++k, ++pos) {
      if (value) mask.set(pos % h, pos / h);
    }
    value = !value;
  }
  return mask;
}

std::string counts_to_string(std::span<const std::uint32_t> counts) {
  std::string out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    std::int64_t x = counts[i];
    if (i > 1) x -= counts[i - 2];
    bool more = true;
    while (more) {
      std::int64_t c = x & 0x1f;
      x >>= 5;  // arithmetic shift keeps the sign
      more = (c & 0x10) ? x != -1 : x != 0;
      if (more) c |= 0x20;
      out.push_back(static_cast<char>(c + 48));
    }
  }
  return out;
}

std::vector<std::int64_t> string_to_counts(std::string_view rle) {
  std::vector<std::int64_t> counts;
  std::size_t p = 0;
  while (p < rle.size()) {
    std::int64_t x = 0;
    int k = 0;
    bool more = true;
    while (more) {
      if (p >= rle.size()) throw Error(Errc::MalformedRle, "RLE string ends inside a continued value");
      const int ch = static_cast<unsigned char>(rle[p]);
      if (ch < 48 || ch > 111) {
        throw Error(Errc::MalformedRle, "character code " + std::to_string(ch) + " at offset " + std::to_string(p) +
                                            " is outside [48, 111]");
      }
      if (k >= 12) throw Error(Errc::MalformedRle, "RLE value too long at offset " + std::to_string(p));
      const std::int64_t c = ch - 48;
      x |= (c & 0x1f) << (5 * k);
      more = (c & 0x20) != 0;
      ++p;
      ++k;
      if (!more && (c & 0x10)) x |= static_cast<std::int64_t>(-1) * (std::int64_t{1} << (5 * k));
    }
    if (counts.size() > 1) x += counts[counts.size() - 2];
    counts.push_back(x);
  }
  return counts;
}

std::string rle_encode(const BinaryMask& mask) { return counts_to_string(rle_counts(mask)); }

BinaryMask rle_decode(std::string_view rle, std::size_t h, std::size_t w) {
  const auto raw = string_to_counts(rle);
  std::vector<std::uint32_t> counts;
  counts.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] < 0 || raw[i] > static_cast<std::int64_t>(UINT32_MAX)) {
      throw Error(Errc::MalformedRle, "run " + std::to_string(i) + " decodes to " + std::to_string(raw[i]));
    }
    counts.push_back(static_cast<std::uint32_t>(raw[i]));
  }
  return mask_from_counts(counts, h, w);
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw Error(Errc::DimensionMismatch, "mask_iou on " + std::to_string(a.height()) + "x" + std::to_string(a.width()) +
                                             " vs " + std::to_string(b.height()) + "x" + std::to_string(b.width()));
  }
  std::size_t inter = 0;
  std::size_t uni = 0;
  const auto& x = a.bits();
  const auto& y = b.bits();
  for (std::size_t i = 0; i < x.size(); ++i) {
    inter += x[i] & y[i];
    uni += x[i] | y[i];
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double box_iou(const BBox& a, const BBox& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<std::size_t> nms(std::span<const BBoxScored> boxes, double iou_thresh) {
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return boxes[a].score > boxes[b].score; });
  std::vector<std::size_t> kept;
  for (auto i : order) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
      return box_iou(boxes[i].box, boxes[k].box) > iou_thresh;
    });
    if (!suppressed) kept.push_back(i);
  }
  return kept;
}

std::vector<std::size_t> patches_covered(const BinaryMask& mask, const PatchGrid& grid, double min_frac) {
  if (mask.height() != grid.input_h() || mask.width() != grid.input_w()) {
    throw Error(Errc::DimensionMismatch, "mask is " + std::to_string(mask.height()) + "x" + std::to_string(mask.width()) +
                                             ", grid input is " + std::to_string(grid.input_h()) + "x" +
                                             std::to_string(grid.input_w()));
  }
  const auto counts = kernels::coverage_counts(mask, grid);
  const double needed = min_frac * static_cast<double>(grid.patch_px * grid.patch_px);
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p < counts.size(); ++p) {
    if (static_cast<double>(counts[p]) >= needed) out.push_back(p);
  }
  return out;
}

BinaryMask resample_mask(const BinaryMask& mask, std::size_t out_h, std::size_t out_w) {
  if (out_h == 0 || out_w == 0) throw Error(Errc::InvalidArgument, "resample target must be non-empty");
  if (mask.height() == 0 || mask.width() == 0) throw Error(Errc::InvalidArgument, "cannot resample an empty mask");
  if (out_h == mask.height() && out_w == mask.width()) return mask;

  const double sy = static_cast<double>(mask.height()) / static_cast<double>(out_h);
  const double sx = static_cast<double>(mask.width()) / static_cast<double>(out_w);
  const auto max_r = static_cast<double>(mask.height() - 1);
  const auto max_c = static_cast<double>(mask.width() - 1);
  BinaryMask out(out_h, out_w);
  for (std::size_t i = 0; i < out_h; ++i) {
    const double y = std::clamp((static_cast<double>(i) + 0.5) * sy - 0.5, 0.0, max_r);
    const auto r0 = static_cast<std::size_t>(std::floor(y));
    const std::size_t r1 = std::min(r0 + 1, mask.height() - 1);
    const double fy = y - static_cast<double>(r0);
    for (std::size_t j = 0; j < out_w; ++j) {
      const double x = std::clamp((static_cast<double>(j) + 0.5) * sx - 0.5, 0.0, max_c);
      const auto c0 = static_cast<std::size_t>(std::floor(x));
      const std::size_t c1 = std::min(c0 + 1, mask.width() - 1);
      const double fx = x - static_cast<double>(c0);
      const double top = (1 - fx) * mask.at(r0, c0) + fx * mask.at(r0, c1);
      const double bottom = (1 - fx) * mask.at(r1, c0) + fx * mask.at(r1, c1);
      if ((1 - fy) * top + fy * bottom >= 0.5) out.set(i, j);
    }
  }
  return out;
}

BinaryMask fit_mask_to_grid(const BinaryMask& mask, const PatchGrid& grid, ResizeMode mode) {
  if (mode == ResizeMode::squash) return resample_mask(mask, grid.input_h(), grid.input_w());
  const std::size_t side = std::max(mask.height(), mask.width());
  BinaryMask square(side, side);
  const std::size_t off_r = (side - mask.height()) / 2;
  const std::size_t off_c = (side - mask.width()) / 2;
  for (std::size_t r = 0; r < mask.height(); ++r) {
    for (std::size_t c = 0; c < mask.width(); ++c) {
      if (mask.at(r, c)) square.set(r + off_r, c + off_c);
    }
  }
  return resample_mask(square, grid.input_h(), grid.input_w());
}

BinaryMask patch_set_to_mask(std::span<const std::size_t> indices, const PatchGrid& grid) {
  BinaryMask out(grid.input_h(), grid.input_w());
  for (auto p : indices) {
    if (p >= grid.size()) {
      throw Error(Errc::OutOfRange, "patch index " + std::to_string(p) + " >= " + std::to_string(grid.size()));
    }
    const std::size_t r0 = (p / grid.grid_w) * grid.patch_px;
    const std::size_t c0 = (p % grid.grid_w) * grid.patch_px;
    for (std::size_t r = r0; r < r0 + grid.patch_px; ++r) {
      for (std::size_t c = c0; c < c0 + grid.patch_px; ++c) out.set(r, c);
    }
  }
  return out;
}

BinaryMask rasterize_bbox(const BBox& box, std::size_t h, std::size_t w) {
  BinaryMask out(h, w);
  for (std::size_t r = 0; r < h; ++r) {
    const double cy = static_cast<double>(r) + 0.5;
    if (cy < box.y1 || cy >= box.y2) continue;
    for (std::size_t c = 0; c < w; ++c) {
      const double cx = static_cast<double>(c) + 0.5;
      if (cx >= box.x1 && cx < box.x2) out.set(r, c);
    }
  }
  return out;
}

}  // namespace projlens
