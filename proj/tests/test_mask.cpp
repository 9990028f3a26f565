#include "projlens/error.hpp"
#include "projlens/mask.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

using namespace projlens;
using namespace projlens::testing;

namespace {

BinaryMask random_mask(Rng& rng, std::size_t h, std::size_t w) {
  // Mix of noise and blobs so runs of every length appear.
  BinaryMask m(h, w);
  const double p = rng.uniform();
  if (rng.below(2)) {
    for (std::size_t r = 0; r < h; ++r)
      for (std::size_t c = 0; c < w; ++c) m.set(r, c, rng.uniform() < p);
  } else {
    const auto blobs = rng.below(4);
    for (std::size_t b = 0; b < blobs; ++b) {
      const auto r0 = rng.below(h), c0 = rng.below(w);
      const auto r1 = r0 + rng.below(h - r0 + 1), c1 = c0 + rng.below(w - c0 + 1);
      for (auto r = r0; r < r1; ++r)
        for (auto c = c0; c < c1; ++c) m.set(r, c);
    }
  }
  return m;
}

// Column-major runs starting with zeros, written out directly.
std::vector<std::uint32_t> naive_counts(const BinaryMask& m) {
  std::vector<std::uint32_t> counts;
  bool cur = false;
  std::uint32_t run = 0;
  for (std::size_t c = 0; c < m.width(); ++c)
    for (std::size_t r = 0; r < m.height(); ++r) {
      if (m.at(r, c) != cur) {
        counts.push_back(run);
        cur = !cur;
        run = 0;
      }
      ++run;
    }
  counts.push_back(run);
  return counts;
}

std::vector<std::size_t> brute_nms(const std::vector<BBoxScored>& boxes, double thresh) {
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return boxes[a].score > boxes[b].score; });
  std::vector<bool> dead(boxes.size(), false);
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (dead[order[i]]) continue;
    keep.push_back(order[i]);
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const BBox& a = boxes[order[i]].box;
      const BBox& b = boxes[order[j]].box;
      const double iw = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
      const double ih = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
      const double inter = iw * ih;
      const double uni = (a.x2 - a.x1) * (a.y2 - a.y1) + (b.x2 - b.x1) * (b.y2 - b.y1) - inter;
      if (uni > 0 && inter / uni > thresh) dead[order[j]] = true;
    }
  }
  return keep;
}

std::vector<std::size_t> pixel_coverage_oracle(const BinaryMask& m, const PatchGrid& g, double min_frac) {
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p < g.size(); ++p) {
    const auto pr = p / g.grid_w, pc = p % g.grid_w;
    std::size_t n = 0;
    for (std::size_t r = pr * g.patch_px; r < (pr + 1) * g.patch_px; ++r)
      for (std::size_t c = pc * g.patch_px; c < (pc + 1) * g.patch_px; ++c) n += m.at(r, c);
    if (static_cast<double>(n) >= min_frac * static_cast<double>(g.patch_px * g.patch_px)) out.push_back(p);
  }
  return out;
}

BBox random_box(Rng& rng) {
  const double x = rng.uniform(0, 100), y = rng.uniform(0, 100);
  return {x, y, x + rng.uniform(0, 40), y + rng.uniform(0, 40)};
}

}  // namespace

TEST(Rle, ColumnMajorRuns) {
  const std::uint32_t counts[] = {2, 2};
  const BinaryMask m = mask_from_counts(counts, 2, 2);
  EXPECT_FALSE(m.at(0, 0));
  EXPECT_FALSE(m.at(1, 0));
  EXPECT_TRUE(m.at(0, 1));
  EXPECT_TRUE(m.at(1, 1));
}

TEST(Rle, LengthMismatch) {
  const std::uint32_t counts[] = {2, 1};
  try {
    mask_from_counts(counts, 2, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::LengthMismatch);
  }
  try {
    rle_decode(counts_to_string(std::vector<std::uint32_t>{3}), 2, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::LengthMismatch);
  }
}

TEST(Rle, AllZeroAndAllOne) {
  EXPECT_EQ(rle_counts(BinaryMask(3, 3)), (std::vector<std::uint32_t>{9}));
  EXPECT_EQ(rle_encode(BinaryMask(3, 3)), counts_to_string(std::vector<std::uint32_t>{9}));
  EXPECT_EQ(rle_encode(BinaryMask(3, 3)), "9");
  EXPECT_EQ(rle_counts(BinaryMask(3, 3, true)), (std::vector<std::uint32_t>{0, 9}));
}

TEST(Rle, KnownStrings) {
  // Delta coding starts at the third count; 187/148/183/153 is the prefix of
  // a real annotation string.
  EXPECT_EQ(counts_to_string(std::vector<std::uint32_t>{187, 148, 183, 153}), "k5d4L5");
  EXPECT_EQ(string_to_counts("k5d4L5"), (std::vector<std::int64_t>{187, 148, 183, 153}));
  EXPECT_EQ(counts_to_string(std::vector<std::uint32_t>{0, 9}), "09");
  EXPECT_EQ(counts_to_string(std::vector<std::uint32_t>{5, 3, 2}), "53M");
}

TEST(Rle, MalformedCharacters) {
  for (const char* bad : {"5/", "5p", "5\x7f", "U"}) {
    try {
      string_to_counts(bad);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::MalformedRle) << bad;
    }
  }
}

TEST(RleProperty, MatchesNaiveEncoderAndRoundtrips) {
  Rng rng(1);
  for (int trial = 0; trial < 10000; ++trial) {
    const auto h = 1 + rng.below(64), w = 1 + rng.below(64);
    const BinaryMask m = random_mask(rng, h, w);
    ASSERT_EQ(rle_counts(m), naive_counts(m)) << trial;
    const std::string s = rle_encode(m);
    ASSERT_TRUE(std::all_of(s.begin(), s.end(), [](char c) { return c >= 48 && c <= 111; }));
    const BinaryMask back = rle_decode(s, h, w);
    ASSERT_EQ(back, m) << trial;
    ASSERT_EQ(rle_encode(back), s) << trial;
  }
}

TEST(MaskIou, Examples) {
  BinaryMask full(4, 4, true), left(4, 4), right(4, 4);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) (c < 2 ? left : right).set(r, c);
  EXPECT_EQ(mask_iou(full, full), 1.0);
  EXPECT_EQ(mask_iou(left, right), 0.0);
  EXPECT_EQ(mask_iou(left, full), 0.5);
  EXPECT_EQ(mask_iou(BinaryMask(2, 2), BinaryMask(2, 2)), 0.0);
  try {
    mask_iou(BinaryMask(2, 2), BinaryMask(2, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DimensionMismatch);
  }
}

TEST(MaskIouProperty, SymmetricAndMonotone) {
  Rng rng(2);
  for (int trial = 0; trial < 500; ++trial) {
    const auto h = 1 + rng.below(20), w = 1 + rng.below(20);
    const BinaryMask a = random_mask(rng, h, w), b = random_mask(rng, h, w);
    ASSERT_EQ(mask_iou(a, b), mask_iou(b, a));
    if (a.count()) ASSERT_EQ(mask_iou(a, a), 1.0);
    // Moving one of b's pixels outside a into a raises intersection.
    BinaryMask grown = b;
    for (std::size_t r = 0; r < h; ++r)
      for (std::size_t c = 0; c < w; ++c)
        if (a.at(r, c) && !b.at(r, c)) grown.set(r, c);
    ASSERT_GE(mask_iou(a, grown), mask_iou(a, b));
  }
}

TEST(Nms, Examples) {
  const std::vector<BBoxScored> same = {{{0, 0, 10, 10}, 0.9}, {{0, 0, 10, 10}, 0.8}};
  EXPECT_EQ(nms(same, 0.5), (std::vector<std::size_t>{0}));
  const std::vector<BBoxScored> disjoint = {{{0, 0, 1, 1}, 0.3}, {{5, 5, 6, 6}, 0.8}};
  EXPECT_EQ(nms(disjoint, 0.5), (std::vector<std::size_t>{1, 0}));
  EXPECT_TRUE(nms({}, 0.5).empty());
}

TEST(NmsProperty, EqualsExhaustiveOracle) {
  Rng rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<BBoxScored> boxes(rng.below(51));
    for (auto& b : boxes) b = {random_box(rng), std::round(rng.uniform() * 20) / 20};
    const double thresh = rng.uniform(0.1, 0.9);
    const auto keep = nms(boxes, thresh);
    ASSERT_EQ(keep, brute_nms(boxes, thresh)) << trial;
    for (std::size_t i = 1; i < keep.size(); ++i) ASSERT_GE(boxes[keep[i - 1]].score, boxes[keep[i]].score);
    for (std::size_t i = 0; i < keep.size(); ++i)
      for (std::size_t j = i + 1; j < keep.size(); ++j) ASSERT_LE(box_iou(boxes[keep[i]].box, boxes[keep[j]].box), thresh);
  }
}

TEST(PatchesCovered, Examples) {
  const PatchGrid g{3, 4, 5};
  EXPECT_EQ(patches_covered(BinaryMask(15, 20, true), g).size(), 12u);
  BinaryMask tl(15, 20);
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 5; ++c) tl.set(r, c);
  EXPECT_EQ(patches_covered(tl, g), (std::vector<std::size_t>{0}));
}

TEST(PatchesCovered, ExactlyHalfCounts) {
  const PatchGrid g{1, 1, 4};
  BinaryMask half(4, 4);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 4; ++c) half.set(r, c);
  EXPECT_EQ(patches_covered(half, g).size(), 1u);
  half.set(0, 0, false);
  EXPECT_TRUE(patches_covered(half, g).empty());
}

TEST(PatchesCoveredProperty, EqualsPixelCountOracle) {
  Rng rng(4);
  for (int trial = 0; trial < 1000; ++trial) {
    const PatchGrid g{1 + rng.below(8), 1 + rng.below(8), 1 + rng.below(8)};
    const BinaryMask m = random_mask(rng, g.input_h(), g.input_w());
    const double f = rng.below(3) ? 0.5 : rng.uniform(0.01, 1.0);
    ASSERT_EQ(patches_covered(m, g, f), pixel_coverage_oracle(m, g, f)) << trial;
  }
}

TEST(PatchesCoveredProperty, MaskOrComplementCoversEveryPatch) {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const PatchGrid g{1 + rng.below(6), 1 + rng.below(6), 1 + rng.below(6)};
    const BinaryMask m = random_mask(rng, g.input_h(), g.input_w());
    BinaryMask comp(m.height(), m.width());
    for (std::size_t r = 0; r < m.height(); ++r)
      for (std::size_t c = 0; c < m.width(); ++c) comp.set(r, c, !m.at(r, c));
    auto a = patches_covered(m, g), b = patches_covered(comp, g);
    std::vector<std::size_t> all;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(all));
    ASSERT_EQ(all.size(), g.size());
  }
}

TEST(Resample, Examples) {
  Rng rng(6);
  const BinaryMask m = random_mask(rng, 7, 9);
  EXPECT_EQ(resample_mask(m, 7, 9), m);
  EXPECT_EQ(resample_mask(BinaryMask(5, 3, true), 11, 17), BinaryMask(11, 17, true));
  BinaryMask checker(2, 2);
  checker.set(0, 0);
  checker.set(1, 1);
  const BinaryMask up = resample_mask(checker, 4, 4);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(up.at(r, c), checker.at(r / 2, c / 2)) << r << c;
  EXPECT_EQ(resample_mask(up, 2, 2), checker);
}

TEST(PatchSetToMask, Examples) {
  const PatchGrid g{3, 4, 2};
  EXPECT_EQ(patch_set_to_mask({}, g), BinaryMask(6, 8));
  std::vector<std::size_t> all(12);
  std::iota(all.begin(), all.end(), 0);
  EXPECT_EQ(patch_set_to_mask(all, g), BinaryMask(6, 8, true));
  const std::vector<std::size_t> corners = {0, 11};
  const BinaryMask m = patch_set_to_mask(corners, g);
  BinaryMask expect(6, 8);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 2; ++c) {
      expect.set(r, c);
      expect.set(4 + r, 6 + c);
    }
  EXPECT_EQ(m, expect);
  try {
    const std::vector<std::size_t> bad = {12};
    patch_set_to_mask(bad, g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::OutOfRange);
  }
}

TEST(PatchGridParse, Examples) {
  EXPECT_EQ(PatchGrid::parse("24x24x14"), (PatchGrid{24, 24, 14}));
  EXPECT_EQ(PatchGrid::parse("3x5x2").to_string(), "3x5x2");
  for (const char* bad : {"24x24", "0x1x1", "axbxc", "1x1x1x"}) {
    EXPECT_THROW(PatchGrid::parse(bad), Error) << bad;
  }
}

TEST(FitMask, PadModeKeepsAspect) {
  // A 2x4 all-ones mask padded to 4x4 fills only the middle rows.
  const BinaryMask m(2, 4, true);
  const PatchGrid g{2, 2, 2};
  const BinaryMask fitted = fit_mask_to_grid(m, g, ResizeMode::pad);
  EXPECT_EQ(fitted.count(), 8u);
  EXPECT_FALSE(fitted.at(0, 0));
  EXPECT_TRUE(fitted.at(1, 0));
  EXPECT_EQ(fit_mask_to_grid(m, g, ResizeMode::squash), BinaryMask(4, 4, true));
}

TEST(RasterizeBbox, PixelCentres) {
  const BinaryMask m = rasterize_bbox({0.4, 0.6, 2.5, 1.4}, 3, 4);
  EXPECT_EQ(m.count(), 0u);
  // half-open on the far edge: the centre at x = 2.5 is out
  const BinaryMask n = rasterize_bbox({0.4, 0.4, 2.5, 1.6}, 3, 4);
  EXPECT_EQ(n.count(), 4u);
  EXPECT_TRUE(n.at(1, 1));
  EXPECT_FALSE(n.at(1, 2));
}
