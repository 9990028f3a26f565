#include "projlens/alignment.hpp"
#include "projlens/error.hpp"
#include "projlens/mask.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace projlens;
using namespace projlens::testing;

namespace {

DenseMatrix dm(RowMatrix m) { return DenseMatrix(std::move(m)); }

// Orthonormal 4-token vocab in d' = 6.
VocabTable basis_vocab() {
  RowMatrix rows = RowMatrix::Zero(4, 6);
  for (Eigen::Index i = 0; i < 4; ++i) rows(i, i) = 1.0;
  return VocabTable({"cat", "dog", "tv", "sky"}, dm(rows));
}

// Record whose masks tile whole patches; image is the grid's input size.
PadRecord tiled_record(const PatchGrid& g, const std::vector<std::pair<std::string, std::vector<std::size_t>>>& objects) {
  PadRecord r;
  r.image_id = "planted.jpg";
  r.width = g.input_w();
  r.height = g.input_h();
  for (const auto& [tag, patches] : objects) {
    MaskAnnotation a;
    a.tag = tag;
    a.mask_h = r.height;
    a.mask_w = r.width;
    a.rle = rle_encode(patch_set_to_mask(patches, g));
    a.bbox = {0, 0, static_cast<double>(r.width), static_cast<double>(r.height)};
    r.labels.push_back(a);
  }
  return r;
}

}  // namespace

TEST(SimilarityMap, Examples) {
  const PatchGrid g{2, 2, 1};
  Vector t(3);
  t << 1, 2, -1;
  RowMatrix same(4, 3);
  for (int i = 0; i < 4; ++i) same.row(i) = t.transpose() * (i + 1);
  for (double x : similarity_map(dm(same), t, g).values) EXPECT_NEAR(x, 1.0, 1e-15);
  RowMatrix orth(4, 3);
  for (int i = 0; i < 4; ++i) orth.row(i) << 2, -1, 0;
  for (double x : similarity_map(dm(orth), t, g).values) EXPECT_EQ(x, 0.0);
}

TEST(SimilarityMap, MatchesDirectFormula) {
  Rng rng(1);
  const PatchGrid g{3, 5, 2};
  const RowMatrix v = random_matrix(rng, 15, 8);
  const Vector t = random_vector(rng, 8);
  const auto map = similarity_map(dm(v), t, g);
  for (Eigen::Index i = 0; i < 15; ++i) {
    double dot = 0, nv = 0, nt = 0;
    for (Eigen::Index j = 0; j < 8; ++j) {
      dot += v(i, j) * t(j);
      nv += v(i, j) * v(i, j);
      nt += t(j) * t(j);
    }
    ASSERT_NEAR(map.values[static_cast<std::size_t>(i)], dot / std::sqrt(nv * nt), 1e-12);
    ASSERT_LE(std::abs(map.values[static_cast<std::size_t>(i)]), 1.0 + 1e-6);
  }
}

TEST(SimilarityMap, Errors) {
  const PatchGrid g{2, 2, 1};
  Rng rng(2);
  try {
    similarity_map(dm(random_matrix(rng, 3, 4)), random_vector(rng, 4), g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DimensionMismatch);
  }
  try {
    similarity_map(dm(random_matrix(rng, 4, 4)), Vector::Zero(4), g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ZeroNorm);
  }
  RowMatrix v = random_matrix(rng, 4, 4);
  v.row(2).setZero();
  EXPECT_EQ(similarity_map(dm(v), random_vector(rng, 4), g).values[2], 0.0);
}

TEST(Threshold, Examples) {
  SimilarityMap flat{"x", std::vector<double>(9, 0.3), PatchGrid{3, 3, 1}};
  EXPECT_EQ(adaptive_threshold(flat, ThresholdStrategy::mean_plus_std(1.0)), 0.3);
  SimilarityMap two{"x", {0.0, 1.0}, PatchGrid{1, 2, 1}};
  EXPECT_EQ(adaptive_threshold(two, ThresholdStrategy::quantile(0.5)), 0.0);
  EXPECT_EQ(adaptive_threshold(two, ThresholdStrategy::fixed(0.25)), 0.25);
  EXPECT_EQ(adaptive_threshold(two, ThresholdStrategy::mean_plus_std(1.0)), 1.0);
  EXPECT_THROW(adaptive_threshold(two, ThresholdStrategy::quantile(0.0)), Error);
}

TEST(Threshold, QuantileNearestRankOracle) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> vals(1 + rng.below(40));
    for (auto& x : vals) x = rng.uniform(-1, 1);
    const double q = std::max(1e-6, rng.uniform());
    SimilarityMap m{"x", vals, PatchGrid{1, vals.size(), 1}};
    auto sorted = vals;
    std::sort(sorted.begin(), sorted.end());
    const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(vals.size())));
    ASSERT_EQ(adaptive_threshold(m, ThresholdStrategy::quantile(q)), sorted[std::max<std::size_t>(rank, 1) - 1]);
  }
}

TEST(Threshold, ParseAndPrint) {
  EXPECT_EQ(ThresholdStrategy::parse("mean_std:1.0").kind, ThresholdStrategy::Kind::mean_plus_std);
  EXPECT_EQ(ThresholdStrategy::parse("quantile:0.9").param, 0.9);
  EXPECT_EQ(ThresholdStrategy::parse("fixed:-0.3").param, -0.3);
  EXPECT_EQ(ThresholdStrategy::parse("fixed:0.3").to_string(), "fixed:0.3");
  for (const char* bad : {"fixed", "bogus:1", "fixed:x", "fixed:nan", "quantile:1.5"}) {
    EXPECT_THROW(
        {
          auto s = ThresholdStrategy::parse(bad);
          adaptive_threshold(SimilarityMap{"x", {0.1}, PatchGrid{1, 1, 1}}, s);
        },
        Error)
        << bad;
  }
}

TEST(Localize, Examples) {
  const PatchGrid g{2, 3, 2};
  Rng rng(4);
  const RowMatrix v = random_matrix(rng, 6, 5);
  const Vector t = random_vector(rng, 5);
  const auto none = localize(dm(v), t, g, ThresholdStrategy::fixed(1.5));
  EXPECT_TRUE(none.indices.empty());
  EXPECT_EQ(none.mask.count(), 0u);

  RowMatrix w = RowMatrix::Zero(6, 5);
  w.row(4) = t.transpose();
  for (int i : {0, 1, 2, 3, 5}) {
    Vector o = random_vector(rng, 5);
    o -= o.dot(t) / t.squaredNorm() * t;
    w.row(i) = o.transpose();
  }
  EXPECT_EQ(localize(dm(w), t, g, ThresholdStrategy::fixed(0.5)).indices, (std::vector<std::size_t>{4}));
}

TEST(LocalizeProperty, ExhaustivePerPatchCheck) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const PatchGrid g{1 + rng.below(6), 1 + rng.below(6), 1 + rng.below(3)};
    const RowMatrix v = random_matrix(rng, g.size(), 4);
    const Vector t = random_vector(rng, 4);
    const auto loc = localize(dm(v), t, g, ThresholdStrategy::mean_plus_std(rng.uniform(-1, 2)));
    std::vector<std::size_t> oracle;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Vector row = v.row(static_cast<Eigen::Index>(i)).transpose();
      ASSERT_NEAR(loc.map.values[i], row.dot(t) / (row.norm() * t.norm()), 1e-14);
      if (loc.map.values[i] > loc.threshold) oracle.push_back(i);
    }
    ASSERT_EQ(loc.indices, oracle);
    ASSERT_EQ(loc.mask, patch_set_to_mask(oracle, g));
  }
}

TEST(LocalizeProperty, ZeroRowScoresZeroAndPassesNegativeThreshold) {
  Rng rng(6);
  const PatchGrid g{3, 3, 1};
  RowMatrix v = random_matrix(rng, 9, 4);
  v.row(3).setZero();
  const auto loc = localize(dm(v), random_vector(rng, 4), g, ThresholdStrategy::fixed(-1.01));
  EXPECT_EQ(loc.map.values[3], 0.0);
  EXPECT_EQ(loc.indices, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8}));
}

TEST(AlignScore, PlantedPerfection) {
  const PatchGrid g{4, 4, 3};
  const VocabTable vocab = basis_vocab();
  const PadRecord r = tiled_record(g, {{"cat", {0, 1, 4, 5}}, {"tv", {10, 11, 14, 15}}});
  RowMatrix v = RowMatrix::Zero(16, 6);
  for (auto p : {0, 1, 4, 5}) v.row(p) = vocab.row(0);
  for (auto p : {10, 11, 14, 15}) v.row(p) = vocab.row(2);
  for (auto p : {2, 3, 6, 7, 8, 9, 12, 13}) v(p, 5) = 1.0;
  const auto rep = align_score(dm(v), r, vocab, g);
  ASSERT_EQ(rep.per_object.size(), 2u);
  EXPECT_EQ(rep.mean_iou, 1.0);
  EXPECT_EQ(rep.per_object[0].predicted_patches, (std::vector<std::size_t>{0, 1, 4, 5}));
  EXPECT_EQ(rep.per_object[0].gt_patches, (std::vector<std::size_t>{0, 1, 4, 5}));
  EXPECT_NEAR(rep.mean_cosine, 1.0, 1e-15);
  EXPECT_FALSE(rep.nonpositive_threshold);

  AlignOptions above;
  above.strategy = ThresholdStrategy::fixed(2.0);
  const auto empty = align_score(dm(v), r, vocab, g, above);
  EXPECT_EQ(empty.mean_iou, 0.0);
  for (const auto& o : empty.per_object) EXPECT_TRUE(o.predicted_patches.empty());
}

TEST(AlignScore, SkipsUnembeddableAndReports) {
  const PatchGrid g{2, 2, 2};
  const VocabTable vocab = basis_vocab();
  const PadRecord r = tiled_record(g, {{"cat", {0}}, {"zebra", {1}}});
  Rng rng(7);
  const auto rep = align_score(dm(random_matrix(rng, 4, 6)), r, vocab, g);
  EXPECT_EQ(rep.per_object.size(), 1u);
  ASSERT_EQ(rep.skipped.size(), 1u);
  EXPECT_EQ(rep.skipped[0].tag, "zebra");

  PadRecord none = r;
  none.labels.clear();
  try {
    align_score(dm(random_matrix(rng, 4, 6)), none, vocab, g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NoEvaluableObjects);
  }
}

TEST(AlignScore, FlagsNonpositiveThreshold) {
  const PatchGrid g{2, 2, 2};
  const VocabTable vocab = basis_vocab();
  const PadRecord r = tiled_record(g, {{"cat", {0}}});
  RowMatrix v = RowMatrix::Zero(4, 6);
  for (int i = 0; i < 4; ++i) v(i, 0) = -1.0;
  EXPECT_TRUE(align_score(dm(v), r, vocab, g).nonpositive_threshold);
}

TEST(AlignScoreProperty, BoundsScaleAndOrder) {
  Rng rng(8);
  const VocabTable vocab = basis_vocab();
  const std::vector<std::string> tags = {"cat", "dog", "tv", "sky"};
  for (int trial = 0; trial < 100; ++trial) {
    const PatchGrid g{2 + rng.below(4), 2 + rng.below(4), 1 + rng.below(3)};
    std::vector<std::pair<std::string, std::vector<std::size_t>>> objs;
    const auto n = 1 + rng.below(3);
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<std::size_t> ps;
      for (std::size_t p = 0; p < g.size(); ++p)
        if (rng.uniform() < 0.3) ps.push_back(p);
      if (ps.empty()) ps.push_back(rng.below(g.size()));
      objs.emplace_back(tags[rng.below(4)], ps);
    }
    const PadRecord r = tiled_record(g, objs);
    const RowMatrix v = random_matrix(rng, g.size(), 6);
    const auto rep = align_score(dm(v), r, vocab, g);
    ASSERT_GE(rep.mean_iou, 0.0);
    ASSERT_LE(rep.mean_iou, 1.0);
    double sum = 0;
    for (const auto& o : rep.per_object) sum += o.iou;
    ASSERT_DOUBLE_EQ(rep.mean_iou, sum / static_cast<double>(rep.per_object.size()));

    const double c = std::exp(rng.uniform(-3, 3));
    const auto scaled = align_score(dm(c * v), r, vocab, g);
    for (std::size_t k = 0; k < rep.per_object.size(); ++k) {
      ASSERT_EQ(scaled.per_object[k].predicted_patches, rep.per_object[k].predicted_patches);
      ASSERT_EQ(scaled.per_object[k].iou, rep.per_object[k].iou);
    }

    PadRecord reversed = r;
    std::reverse(reversed.labels.begin(), reversed.labels.end());
    ASSERT_NEAR(align_score(dm(v), reversed, vocab, g).mean_iou, rep.mean_iou, 1e-15);
  }
}
