#pragma once

#include "projlens/mask.hpp"
#include "projlens/matrix.hpp"
#include "projlens/pad.hpp"
#include "projlens/text_embed.hpp"
#include "projlens/vocab.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace projlens {

struct SimilarityMap {
  std::string label;
  std::vector<double> values;  // cosine per patch, row-major
  PatchGrid grid;
};

// How the localisation threshold c is picked from a similarity map.
struct ThresholdStrategy {
  enum class Kind { mean_plus_std, quantile, fixed };
  Kind kind = Kind::mean_plus_std;
  double param = 1.0;

  static ThresholdStrategy mean_plus_std(double alpha) { return {Kind::mean_plus_std, alpha}; }
  static ThresholdStrategy quantile(double q) { return {Kind::quantile, q}; }
  static ThresholdStrategy fixed(double c) { return {Kind::fixed, c}; }

  // "mean_std:1.0", "quantile:0.9" or "fixed:0.3".
  static ThresholdStrategy parse(std::string_view text);
  std::string to_string() const;
};

SimilarityMap similarity_map(const DenseMatrix& v, const Vector& t, const PatchGrid& grid, std::string label = {});

// mean_plus_std uses the population standard deviation; quantile uses the
// nearest-rank rule (the ceil(q * n)-th smallest value).
double adaptive_threshold(const SimilarityMap& map, const ThresholdStrategy& strategy);

struct Localization {
  std::vector<std::size_t> indices;  // patches with cosine strictly above the threshold
  BinaryMask mask;
  double threshold = 0.0;
  SimilarityMap map;
};

Localization localize(const DenseMatrix& v, const Vector& t, const PatchGrid& grid, const ThresholdStrategy& strategy);

struct ObjectAlignment {
  std::string tag;
  double iou = 0.0;
  double threshold_used = 0.0;
  std::vector<std::size_t> predicted_patches;
  std::vector<std::size_t> gt_patches;
  std::optional<double> cosine;  // COS(mean of gt patches, t); absent when no patch is half covered
  std::vector<double> similarity;
};

struct SkippedObject {
  std::string tag;
  std::string reason;
};

struct AlignmentReport {
  std::string image_id;
  std::vector<ObjectAlignment> per_object;
  std::vector<SkippedObject> skipped;
  double mean_iou = 0.0;
  double mean_cosine = 0.0;
  std::size_t cosine_objects = 0;
  bool nonpositive_threshold = false;
};

struct AlignOptions {
  TokenizerSpec tokenizer;
  ThresholdStrategy strategy;
  ResizeMode resize = ResizeMode::squash;
  double min_frac = 0.5;
  const TokenOverrides* overrides = nullptr;
};

// Align(V, W) for one record: per-object IoU between the rasterised
// predicted patch set and the ground-truth mask (both at the grid's input
// resolution), averaged over the objects whose labels could be embedded.
// Throws NoEvaluableObjects when none could.
AlignmentReport align_score(const DenseMatrix& v, const PadRecord& record, const VocabTable& vocab,
                            const PatchGrid& grid, const AlignOptions& options = {});

nlohmann::ordered_json to_json(const AlignmentReport& report);

}  // namespace projlens
