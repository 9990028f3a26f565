#include "projlens/alignment.hpp"

#include "projlens/error.hpp"
#include "projlens/kernels.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace projlens {

ThresholdStrategy ThresholdStrategy::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw Error(Errc::InvalidArgument, "threshold must be kind:value, got '" + std::string(text) + "'");
  const std::string_view kind = text.substr(0, colon);
  const std::string value_text(text.substr(colon + 1));
  double value = 0.0;
  try {
    std::size_t used = 0;
    value = std::stod(value_text, &used);
    if (used != value_text.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw Error(Errc::InvalidArgument, "bad threshold value '" + value_text + "'");
  }
  ThresholdStrategy s;
  if (kind == "mean_std") {
    s = mean_plus_std(value);
  } else if (kind == "quantile") {
    s = quantile(value);
  } else if (kind == "fixed") {
    s = fixed(value);
  } else {
    throw Error(Errc::InvalidArgument, "unknown threshold kind '" + std::string(kind) + "'");
  }
  return s;
}

std::string ThresholdStrategy::to_string() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::mean_plus_std: os << "mean_std:"; break;
    case Kind::quantile: os << "quantile:"; break;
    case Kind::fixed: os << "fixed:"; break;
  }
  os << param;
  return os.str();
}

SimilarityMap similarity_map(const DenseMatrix& v, const Vector& t, const PatchGrid& grid, std::string label) {
  if (v.rows() != grid.size()) {
    throw Error(Errc::DimensionMismatch, std::to_string(v.rows()) + " patch embeddings for a " + grid.to_string() +
                                             " grid of " + std::to_string(grid.size()) + " patches");
  }
  if (static_cast<std::size_t>(t.size()) != v.cols()) {
    throw Error(Errc::DimensionMismatch, "text embedding has dim " + std::to_string(t.size()) + ", patches have " +
                                             std::to_string(v.cols()));
  }
  if (!(t.norm() > 0.0)) throw Error(Errc::ZeroNorm, "text embedding for '" + label + "' has zero norm");
  return SimilarityMap{std::move(label), kernels::cosine_rows(v.values, t), grid};
}

double adaptive_threshold(const SimilarityMap& map, const ThresholdStrategy& strategy) {
  if (map.values.empty()) throw Error(Errc::InvalidArgument, "empty similarity map");
  if (!std::isfinite(strategy.param)) throw Error(Errc::InvalidArgument, "threshold parameter must be finite");
  switch (strategy.kind) {
    case ThresholdStrategy::Kind::fixed:
      return strategy.param;
    case ThresholdStrategy::Kind::mean_plus_std: {
      const auto n = static_cast<double>(map.values.size());
      double mean = 0.0;
      for (double x : map.values) mean += x;
      mean /= n;
      double var = 0.0;
      for (double x : map.values) var += (x - mean) * (x - mean);
      return mean + strategy.param * std::sqrt(var / n);
    }
    case ThresholdStrategy::Kind::quantile: {
      const double q = strategy.param;
      if (!(q > 0.0 && q <= 1.0)) throw Error(Errc::InvalidArgument, "quantile must lie in (0, 1]");
      std::vector<double> sorted = map.values;
      std::sort(sorted.begin(), sorted.end());
      auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
      rank = std::clamp<std::size_t>(rank, 1, sorted.size());
      return sorted[rank - 1];
    }
  }
  return strategy.param;
}

Localization localize(const DenseMatrix& v, const Vector& t, const PatchGrid& grid, const ThresholdStrategy& strategy) {
  Localization out;
  out.map = similarity_map(v, t, grid);
  out.threshold = adaptive_threshold(out.map, strategy);
  for (std::size_t i = 0; i < out.map.values.size(); ++i) {
    if (out.map.values[i] > out.threshold) out.indices.push_back(i);
  }
  out.mask = patch_set_to_mask(out.indices, grid);
  return out;
}

AlignmentReport align_score(const DenseMatrix& v, const PadRecord& record, const VocabTable& vocab,
                            const PatchGrid& grid, const AlignOptions& options) {
  if (v.rows() != grid.size()) {
    throw Error(Errc::DimensionMismatch, record.image_id + ": " + std::to_string(v.rows()) + " embeddings for " +
                                             std::to_string(grid.size()) + " patches");
  }
  const Tokenizer tokenizer(vocab, options.tokenizer);
  AlignmentReport report;
  report.image_id = record.image_id;
  double iou_sum = 0.0;
  double cos_sum = 0.0;
  for (const auto& object : record.labels) {
    TextEmbedding text;
    try {
      text = label_embedding(object.tag, vocab, tokenizer, options.overrides);
    } catch (const Error& e) {
      report.skipped.push_back({object.tag, e.what()});
      continue;
    }
    if (!(text.vector.norm() > 0.0)) {
      report.skipped.push_back({object.tag, "label embedding has zero norm"});
      continue;
    }
    const BinaryMask gt = fit_mask_to_grid(object.mask(), grid, options.resize);
    const Localization loc = localize(v, text.vector, grid, options.strategy);

    ObjectAlignment o;
    o.tag = object.tag;
    o.threshold_used = loc.threshold;
    o.predicted_patches = loc.indices;
    o.iou = mask_iou(loc.mask, gt);
    o.gt_patches = patches_covered(gt, grid, options.min_frac);
    o.similarity = loc.map.values;
    if (!o.gt_patches.empty()) {
      Vector mean = Vector::Zero(static_cast<Eigen::Index>(v.cols()));
      for (auto p : o.gt_patches) mean += v.values.row(static_cast<Eigen::Index>(p)).transpose();
      mean /= static_cast<double>(o.gt_patches.size());
      const double denom = mean.norm() * text.vector.norm();
      o.cosine = denom > 0.0 ? mean.dot(text.vector) / denom : 0.0;
      cos_sum += *o.cosine;
      ++report.cosine_objects;
    }
    if (loc.threshold <= 0.0) report.nonpositive_threshold = true;
    iou_sum += o.iou;
    report.per_object.push_back(std::move(o));
  }
  if (report.per_object.empty()) {
    throw Error(Errc::NoEvaluableObjects, "record '" + record.image_id + "' has no object with an embeddable label");
  }
  report.mean_iou = iou_sum / static_cast<double>(report.per_object.size());
  report.mean_cosine = report.cosine_objects ? cos_sum / static_cast<double>(report.cosine_objects) : 0.0;
  return report;
}

nlohmann::ordered_json to_json(const AlignmentReport& report) {
  nlohmann::ordered_json j;
  j["image_id"] = report.image_id;
  j["mean_iou"] = report.mean_iou;
  j["mean_cosine"] = report.mean_cosine;
  j["cosine_objects"] = report.cosine_objects;
  j["nonpositive_threshold"] = report.nonpositive_threshold;
  auto objects = nlohmann::ordered_json::array();
  for (const auto& o : report.per_object) {
    nlohmann::ordered_json oj;
    oj["tag"] = o.tag;
    oj["iou"] = o.iou;
    oj["threshold_used"] = o.threshold_used;
    oj["predicted_patches"] = o.predicted_patches;
    oj["gt_patches"] = o.gt_patches;
    oj["cosine"] = o.cosine ? nlohmann::ordered_json(*o.cosine) : nlohmann::ordered_json(nullptr);
    objects.push_back(std::move(oj));
  }
  j["per_object"] = std::move(objects);
  auto skipped = nlohmann::ordered_json::array();
  for (const auto& s : report.skipped) skipped.push_back({{"tag", s.tag}, {"reason", s.reason}});
  j["skipped"] = std::move(skipped);
  return j;
}

}  // namespace projlens
