#include "projlens/trainer.hpp"

#include "projlens/error.hpp"
#include "projlens/npy.hpp"

#include <json.hpp>

#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace projlens {
namespace {

// Eigen may parallelise large products; training pins it to one thread so
// every reduction runs in a fixed order.
class EigenThreadsGuard {
 public:
  EigenThreadsGuard() : saved_(Eigen::nbThreads()) { Eigen::setNbThreads(1); }
  ~EigenThreadsGuard() { Eigen::setNbThreads(saved_); }
  EigenThreadsGuard(const EigenThreadsGuard&) = delete;
  EigenThreadsGuard& operator=(const EigenThreadsGuard&) = delete;

 private:
  int saved_;
};

void add_scaled(ProjectorParams& acc, const ProjectorParams& g, double scale) {
  auto dst = acc.tensors();
  const auto src = g.tensors();
  for (std::size_t t = 0; t < dst.size(); ++t) {
    for (std::size_t k = 0; k < dst[t].size(); ++k) dst[t][k] += scale * src[t][k];
  }
}

struct AdamState {
  ProjectorParams m;
  ProjectorParams v;
  std::size_t t = 0;
};

void adamw_step(ProjectorParams& params, const ProjectorParams& grad, AdamState& state, double lr, const TrainConfig& c) {
  ++state.t;
  const double bc1 = 1.0 - std::pow(c.adam_beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(c.adam_beta2, static_cast<double>(state.t));
  auto p = params.tensors();
  auto m = state.m.tensors();
  auto v = state.v.tensors();
  const auto g = grad.tensors();
  for (std::size_t t = 0; t < p.size(); ++t) {
    for (std::size_t k = 0; k < p[t].size(); ++k) {
      m[t][k] = c.adam_beta1 * m[t][k] + (1.0 - c.adam_beta1) * g[t][k];
      v[t][k] = c.adam_beta2 * v[t][k] + (1.0 - c.adam_beta2) * g[t][k] * g[t][k];
      const double m_hat = m[t][k] / bc1;
      const double v_hat = v[t][k] / bc2;
      p[t][k] -= lr * (m_hat / (std::sqrt(v_hat) + c.adam_eps) + c.weight_decay * p[t][k]);
    }
  }
}

void validate_config(const TrainConfig& c) {
  if (c.steps == 0) throw Error(Errc::InvalidArgument, "steps must be >= 1");
  if (!(c.warmup >= 0.0 && c.warmup < 1.0)) throw Error(Errc::InvalidArgument, "warmup fraction must lie in [0, 1)");
  if (!(c.lr >= 0.0) || !std::isfinite(c.lr)) throw Error(Errc::InvalidArgument, "lr must be finite and >= 0");
  if (c.batch_size == 0) throw Error(Errc::InvalidArgument, "batch size must be >= 1");
  if (!(c.adam_beta1 >= 0.0 && c.adam_beta1 < 1.0 && c.adam_beta2 >= 0.0 && c.adam_beta2 < 1.0)) {
    throw Error(Errc::InvalidArgument, "Adam betas must lie in [0, 1)");
  }
}

}  // namespace

PatchLossEval evaluate_patch_loss(const RowMatrix& v_after, std::span<const TrainObject> objects, const VocabTable& vocab,
                                  bool with_grad) {
  if (objects.empty()) throw Error(Errc::InvalidArgument, "patch loss needs at least one object");
  if (static_cast<std::size_t>(v_after.cols()) != vocab.dim()) {
    throw Error(Errc::DimensionMismatch, "projected dim " + std::to_string(v_after.cols()) + " vs vocab dim " +
                                             std::to_string(vocab.dim()));
  }
  const auto s = static_cast<std::size_t>(v_after.rows());
  const double inv_p = 1.0 / static_cast<double>(objects.size());
  PatchLossEval out;
  if (with_grad) out.grad = RowMatrix::Zero(v_after.rows(), v_after.cols());
  double cos_sum = 0.0;
  for (const auto& object : objects) {
    if (object.patch_indices.empty()) throw Error(Errc::InvalidArgument, "object with an empty patch set");
    Vector mean = Vector::Zero(v_after.cols());
    for (auto i : object.patch_indices) {
      if (i >= s) throw Error(Errc::OutOfRange, "patch index " + std::to_string(i) + " >= " + std::to_string(s));
      mean += v_after.row(static_cast<Eigen::Index>(i)).transpose();
    }
    mean /= static_cast<double>(object.patch_indices.size());
    const Vector t = mean_embedding(object.token_ids, vocab);
    const double mean_norm = mean.norm();
    const double t_norm = t.norm();
    if (mean_norm == 0.0) throw Error(Errc::ZeroNorm, "mean patch embedding has zero norm");
    if (t_norm == 0.0) throw Error(Errc::ZeroNorm, "text embedding has zero norm");
    const double cos = mean.dot(t) / (mean_norm * t_norm);
    cos_sum += cos;
    if (with_grad) {
      // d cos / d mean = t / (|m||t|) - cos * m / |m|^2
      const Vector d_mean = -inv_p * (t / (mean_norm * t_norm) - cos * mean / (mean_norm * mean_norm));
      const Vector d_row = d_mean / static_cast<double>(object.patch_indices.size());
      for (auto i : object.patch_indices) out.grad.row(static_cast<Eigen::Index>(i)) += d_row.transpose();
    }
  }
  out.mean_cosine = cos_sum * inv_p;
  out.loss = 1.0 - out.mean_cosine;
  return out;
}

double patch_loss(const RowMatrix& v_after, std::span<const TrainObject> objects, const VocabTable& vocab) {
  return evaluate_patch_loss(v_after, objects, vocab, false).loss;
}

ProjectorParams patch_loss_grad(const ProjectorParams& params, const TrainSample& sample, const VocabTable& vocab) {
  ForwardCache cache;
  const RowMatrix out = project(params, sample.patches.values, &cache);
  const auto eval = evaluate_patch_loss(out, sample.objects, vocab, true);
  return projector_backward(params, sample.patches.values, cache, eval.grad);
}

double beta_at(std::size_t step, std::size_t total, const BetaSchedule& schedule) {
  if (total == 0 || step >= total) {
    throw Error(Errc::OutOfRange, "step " + std::to_string(step) + " outside [0, " + std::to_string(total) + ")");
  }
  if (total == 1) return schedule.end;
  return schedule.start + (schedule.end - schedule.start) * static_cast<double>(step) / static_cast<double>(total - 1);
}

double lr_at(std::size_t step, const TrainConfig& config) {
  const std::size_t total = config.steps;
  if (step >= total) throw Error(Errc::OutOfRange, "step outside schedule");
  const auto warm = static_cast<std::size_t>(std::floor(config.warmup * static_cast<double>(total)));
  if (step < warm) return config.lr * static_cast<double>(step + 1) / static_cast<double>(warm);
  const double progress = static_cast<double>(step - warm) / static_cast<double>(total - warm);
  return config.lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

LossBreakdown combined_loss(const ProjectorParams& params, const TrainSample& sample, const VocabTable& vocab,
                            std::size_t step, const TrainConfig& config) {
  LossBreakdown out;
  const RowMatrix v_after = project(params, sample.patches.values);
  out.l_patch = patch_loss(v_after, sample.objects, vocab);
  out.beta = beta_at(step, config.steps, config.beta);
  if (config.caption_hook) out.l_caption = config.caption_hook(v_after, sample).value;
  out.total = out.l_caption + out.beta * out.l_patch;
  return out;
}

DivergenceError::DivergenceError(std::size_t step, ProjectorParams last_good, std::vector<HistoryRow> history)
    : Error(Errc::Diverged, "non-finite loss at step " + std::to_string(step)),
      last_good_(std::move(last_good)),
      history_(std::move(history)) {}

TrainResult train_projector(const TrainConfig& config, std::span<const TrainSample> dataset, const VocabTable& vocab,
                            std::optional<ProjectorParams> initial) {
  validate_config(config);
  if (dataset.empty()) throw Error(Errc::InvalidArgument, "empty training set");
  const std::size_t in_dim = dataset.front().patches.cols();
  for (const auto& s : dataset) {
    if (s.patches.cols() != in_dim) throw Error(Errc::DimensionMismatch, "samples disagree on embedding dim");
    if (s.objects.empty()) throw Error(Errc::InvalidArgument, "sample '" + s.image_id + "' has no objects");
  }
  const EigenThreadsGuard guard;

  Rng rng(config.seed);
  TrainResult result;
  result.params = initial ? std::move(*initial)
                          : init_projector(config.kind, in_dim, config.hidden ? config.hidden : vocab.dim(), vocab.dim(), rng);
  if (result.params.in_dim() != in_dim || result.params.out_dim() != vocab.dim()) {
    throw Error(Errc::DimensionMismatch, "projector shape does not match data and vocab");
  }
  result.initial = result.params;
  result.history.reserve(config.steps);

  AdamState adam{result.params.zeros_like(), result.params.zeros_like(), 0};
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = order.size();

  for (std::size_t step = 0; step < config.steps; ++step) {
    const double beta = beta_at(step, config.steps, config.beta);
    const double lr = lr_at(step, config);
    const std::size_t batch = std::min(config.batch_size, dataset.size());

    ProjectorParams grad = result.params.zeros_like();
    HistoryRow row;
    row.step = step;
    row.beta = beta;
    row.lr = lr;
    const double inv_b = 1.0 / static_cast<double>(batch);
    for (std::size_t b = 0; b < batch; ++b) {
      if (cursor == order.size()) {
        rng.shuffle(std::span<std::size_t>(order));
        cursor = 0;
      }
      const TrainSample& sample = dataset[order[cursor++]];
      ForwardCache cache;
      const RowMatrix v_after = project(result.params, sample.patches.values, &cache);
      auto eval = evaluate_patch_loss(v_after, sample.objects, vocab, true);
      RowMatrix grad_out = beta * eval.grad;
      double l_caption = 0.0;
      if (config.caption_hook) {
        CaptionTerm term = config.caption_hook(v_after, sample);
        l_caption = term.value;
        if (term.grad.size() != 0) {
          if (term.grad.rows() != v_after.rows() || term.grad.cols() != v_after.cols()) {
            throw Error(Errc::DimensionMismatch, "caption hook gradient has the wrong shape");
          }
          grad_out += term.grad;
        }
      }
      add_scaled(grad, projector_backward(result.params, sample.patches.values, cache, grad_out), inv_b);
      row.l_patch += inv_b * eval.loss;
      row.l_caption += inv_b * l_caption;
      row.mean_cosine += inv_b * eval.mean_cosine;
    }
    row.loss = row.l_caption + beta * row.l_patch;
    if (!std::isfinite(row.loss)) throw DivergenceError(step, result.params, result.history);
    result.history.push_back(row);
    adamw_step(result.params, grad, adam, lr, config);
  }
  return result;
}

double dataset_mean_cosine(const ProjectorParams& params, std::span<const TrainSample> dataset, const VocabTable& vocab) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& sample : dataset) {
    const RowMatrix v_after = project(params, sample.patches.values);
    const auto eval = evaluate_patch_loss(v_after, sample.objects, vocab, false);
    sum += eval.mean_cosine * static_cast<double>(sample.objects.size());
    count += sample.objects.size();
  }
  if (count == 0) throw Error(Errc::InvalidArgument, "dataset has no objects");
  return sum / static_cast<double>(count);
}

std::string history_csv(std::span<const HistoryRow> history) {
  std::ostringstream os;
  os.precision(17);
  os << "step,loss,l_patch,l_caption,beta,lr,mean_cosine\n";
  for (const auto& r : history) {
    os << r.step << ',' << r.loss << ',' << r.l_patch << ',' << r.l_caption << ',' << r.beta << ',' << r.lr << ','
       << r.mean_cosine << '\n';
  }
  return os.str();
}

std::filesystem::path embedding_path(const std::filesystem::path& root, const std::string& image_id) {
  std::filesystem::path rel(image_id);
  if (rel.is_absolute() || image_id.find("..") != std::string::npos) {
    throw Error(Errc::InvalidArgument, "image_id '" + image_id + "' cannot be mapped to a relative path");
  }
  rel.replace_extension(".npy");
  return root / rel;
}

void save_train_dataset(std::span<const TrainSample> dataset, const std::filesystem::path& dir) {
  nlohmann::ordered_json manifest = nlohmann::ordered_json::object();
  for (const auto& s : dataset) {
    const auto path = embedding_path(dir / "embeddings", s.image_id);
    std::filesystem::create_directories(path.parent_path());
    save_matrix(s.patches, path);
    auto objects = nlohmann::ordered_json::array();
    for (const auto& o : s.objects) objects.push_back({{"patch_indices", o.patch_indices}, {"token_ids", o.token_ids}});
    manifest[s.image_id] = std::move(objects);
  }
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

std::vector<TrainSample> load_train_dataset(const std::filesystem::path& dir) {
  nlohmann::ordered_json manifest;
  try {
    manifest = nlohmann::ordered_json::parse(read_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, "dataset manifest: " + std::string(e.what()));
  }
  if (!manifest.is_object()) throw Error(Errc::ParseError, "dataset manifest must map image_id -> objects");
  std::vector<TrainSample> out;
  out.reserve(manifest.size());
  for (const auto& [image_id, objects] : manifest.items()) {
    TrainSample s;
    s.image_id = image_id;
    s.patches = load_matrix(embedding_path(dir / "embeddings", image_id));
    if (!objects.is_array()) throw Error(Errc::ParseError, "objects of '" + image_id + "' must be an array");
    for (const auto& o : objects) {
      if (!o.contains("patch_indices") || !o.contains("token_ids")) {
        throw Error(Errc::MissingField, "object of '" + image_id + "' needs patch_indices and token_ids");
      }
      TrainObject obj;
      obj.patch_indices = o["patch_indices"].get<std::vector<std::size_t>>();
      obj.token_ids = o["token_ids"].get<std::vector<std::size_t>>();
      if (obj.patch_indices.empty() || obj.token_ids.empty()) {
        throw Error(Errc::InvalidArgument, "object of '" + image_id + "' has an empty index or token list");
      }
      for (auto p : obj.patch_indices) {
        if (p >= s.patches.rows()) throw Error(Errc::OutOfRange, "patch index out of range in '" + image_id + "'");
      }
      s.objects.push_back(std::move(obj));
    }
    out.push_back(std::move(s));
  }
  return out;
}

DatasetBuildReport dataset_from_pad(std::span<const PadRecord> records,
                                    const std::function<DenseMatrix(const PadRecord&)>& patches_for,
                                    const VocabTable& vocab, const PatchGrid& grid, const AlignOptions& options) {
  const Tokenizer tokenizer(vocab, options.tokenizer);
  DatasetBuildReport report;
  for (const auto& record : records) {
    TrainSample sample;
    sample.image_id = record.image_id;
    for (const auto& label : record.labels) {
      TrainObject obj;
      try {
        obj.token_ids = label_embedding(label.tag, vocab, tokenizer, options.overrides).token_ids;
      } catch (const Error& e) {
        report.skipped.push_back(record.image_id + "/" + label.tag + ": " + e.what());
        continue;
      }
      obj.patch_indices = patches_covered(fit_mask_to_grid(label.mask(), grid, options.resize), grid, options.min_frac);
      if (obj.patch_indices.empty()) {
        report.skipped.push_back(record.image_id + "/" + label.tag + ": mask covers no patch by half");
        continue;
      }
      sample.objects.push_back(std::move(obj));
    }
    if (sample.objects.empty()) {
      report.skipped.push_back(record.image_id + ": no usable objects");
      continue;
    }
    sample.patches = patches_for(record);
    if (sample.patches.rows() != grid.size()) {
      throw Error(Errc::DimensionMismatch, record.image_id + ": embeddings have " + std::to_string(sample.patches.rows()) +
                                               " rows for " + std::to_string(grid.size()) + " patches");
    }
    report.samples.push_back(std::move(sample));
  }
  return report;
}

}  // namespace projlens
