#pragma once

#include "projlens/alignment.hpp"
#include "projlens/error.hpp"
#include "projlens/mask.hpp"
#include "projlens/matrix.hpp"
#include "projlens/pad.hpp"
#include "projlens/projector.hpp"
#include "projlens/text_embed.hpp"
#include "projlens/vocab.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace projlens {

struct TrainObject {
  std::vector<std::size_t> patch_indices;  // half-area selection, non-empty
  std::vector<std::size_t> token_ids;      // label tokens, averaged into t
};

struct TrainSample {
  std::string image_id;
  DenseMatrix patches;  // S x d, encoder output before the projector
  std::vector<TrainObject> objects;
};

// L_patch = 1 - (1/P) sum_p cos(mean_{i in Idx_p} v_i, t_p).
struct PatchLossEval {
  double loss = 0.0;
  double mean_cosine = 0.0;
  RowMatrix grad;  // dL/dV, S x d'; only filled when requested
};

PatchLossEval evaluate_patch_loss(const RowMatrix& v_after, std::span<const TrainObject> objects, const VocabTable& vocab,
                                  bool with_grad);
double patch_loss(const RowMatrix& v_after, std::span<const TrainObject> objects, const VocabTable& vocab);

// Exact gradient of patch_loss(project(params, sample.patches)).
ProjectorParams patch_loss_grad(const ProjectorParams& params, const TrainSample& sample, const VocabTable& vocab);

struct BetaSchedule {
  double start = 0.0;
  double end = 5.0;
};

// Linear from start at step 0 to end at step total - 1.
double beta_at(std::size_t step, std::size_t total, const BetaSchedule& schedule = {});

// Externally computed caption loss for one sample, with its gradient w.r.t.
// the projector output.
struct CaptionTerm {
  double value = 0.0;
  RowMatrix grad;  // S x d'; may be left empty for a value-only hook
};
using CaptionHook = std::function<CaptionTerm(const RowMatrix& v_after, const TrainSample& sample)>;

struct TrainConfig {
  std::size_t steps = 500;
  double lr = 1e-3;
  double weight_decay = 0.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double warmup = 0.0;  // fraction of steps
  BetaSchedule beta;
  std::size_t batch_size = 8;
  std::uint64_t seed = 0;
  ProjectorKind kind = ProjectorKind::mlp2;
  std::size_t hidden = 0;  // 0 -> output width
  CaptionHook caption_hook;
};

// Cosine decay from lr towards 0, after an optional linear warmup.
double lr_at(std::size_t step, const TrainConfig& config);

struct LossBreakdown {
  double total = 0.0;
  double l_patch = 0.0;
  double l_caption = 0.0;
  double beta = 0.0;
};

LossBreakdown combined_loss(const ProjectorParams& params, const TrainSample& sample, const VocabTable& vocab,
                            std::size_t step, const TrainConfig& config);

struct HistoryRow {
  std::size_t step = 0;
  double loss = 0.0;
  double l_patch = 0.0;
  double l_caption = 0.0;
  double beta = 0.0;
  double lr = 0.0;
  double mean_cosine = 0.0;
};

struct TrainResult {
  ProjectorParams params;
  ProjectorParams initial;
  std::vector<HistoryRow> history;
};

// Thrown when a step produces a non-finite loss; carries the parameters from
// before that step.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t step, ProjectorParams last_good, std::vector<HistoryRow> history);
  const ProjectorParams& last_good() const { return last_good_; }
  const std::vector<HistoryRow>& history() const { return history_; }

 private:
  ProjectorParams last_good_;
  std::vector<HistoryRow> history_;
};

TrainResult train_projector(const TrainConfig& config, std::span<const TrainSample> dataset, const VocabTable& vocab,
                            std::optional<ProjectorParams> initial = std::nullopt);

// Mean over all objects in the dataset of cos(mean selected patch, t).
double dataset_mean_cosine(const ProjectorParams& params, std::span<const TrainSample> dataset, const VocabTable& vocab);

std::string history_csv(std::span<const HistoryRow> history);

// On-disk dataset: manifest.json maps image_id -> [{patch_indices, token_ids}]
// and embeddings/<image_id with .npy extension> holds the S x d patches.
std::filesystem::path embedding_path(const std::filesystem::path& root, const std::string& image_id);
void save_train_dataset(std::span<const TrainSample> dataset, const std::filesystem::path& dir);
std::vector<TrainSample> load_train_dataset(const std::filesystem::path& dir);

struct DatasetBuildReport {
  std::vector<TrainSample> samples;
  std::vector<std::string> skipped;  // "image_id/tag: reason"
};

// Builds training samples from PAD records: each mask is fitted to the grid,
// its half-covered patches become Idx and its tag is tokenized.
DatasetBuildReport dataset_from_pad(std::span<const PadRecord> records,
                                    const std::function<DenseMatrix(const PadRecord&)>& patches_for,
                                    const VocabTable& vocab, const PatchGrid& grid, const AlignOptions& options = {});

}  // namespace projlens
