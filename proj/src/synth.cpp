#include "projlens/synth.hpp"

#include "projlens/error.hpp"
#include "projlens/rng.hpp"
#include "projlens/text_embed.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <cstdio>

namespace projlens {
namespace {

RowMatrix gaussian(Rng& rng, std::size_t rows, std::size_t cols) {
  RowMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.normal();
  }
  return m;
}

// n x n orthogonal matrix from the QR factorisation of a Gaussian matrix,
// sign-fixed so the distribution is Haar.
Eigen::MatrixXd random_orthogonal(Rng& rng, std::size_t n) {
  const Eigen::MatrixXd g = gaussian(rng, n, n);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(g.rows(), g.cols());
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  return q;
}

void validate(const SynthConfig& c) {
  auto fail = [](const std::string& msg) { throw Error(Errc::InvalidArgument, "synth: " + msg); };
  if (c.n_images == 0) fail("n_images must be >= 1");
  if (c.patches == 0) fail("patches must be >= 1");
  if (c.dim == 0 || c.out_dim == 0) fail("dimensions must be >= 1");
  if (c.vocab_size == 0) fail("vocab_size must be >= 1");
  if (c.sparsity == 0 || c.sparsity > c.vocab_size) fail("sparsity must lie in [1, vocab_size]");
  if (c.classes == 0) fail("classes must be >= 1");
  if (c.max_objects == 0) fail("max_objects must be >= 1");
  if (c.patch_px == 0) fail("patch_px must be >= 1");
  if (!(c.noise_sigma >= 0.0) || !(c.nuisance_sigma >= 0.0)) fail("noise levels must be >= 0");
}

}  // namespace

PatchGrid synth_grid(std::size_t patches, std::size_t patch_px) {
  const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(patches))));
  if (side * side == patches) return PatchGrid{side, side, patch_px};
  return PatchGrid{1, patches, patch_px};
}

SynthData synth_dataset(const SynthConfig& config) {
  validate(config);
  Rng rng(config.seed);
  SynthData out;
  out.grid = synth_grid(config.patches, config.patch_px);
  const auto dp = static_cast<Eigen::Index>(config.out_dim);
  const auto d = static_cast<Eigen::Index>(config.dim);

  // Vocabulary.
  RowMatrix words;
  if (config.vocab_size <= config.out_dim) {
    const Eigen::MatrixXd q = random_orthogonal(rng, config.out_dim);
    words = q.leftCols(static_cast<Eigen::Index>(config.vocab_size)).transpose();
  } else {
    words = gaussian(rng, config.vocab_size, config.out_dim);
    for (Eigen::Index i = 0; i < words.rows(); ++i) words.row(i).normalize();
  }
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < config.vocab_size; ++i) tokens.push_back("tok" + std::to_string(i));
  out.vocab = VocabTable(tokens, DenseMatrix(words, Dtype::f64), true);

  // Classes: `sparsity` distinct tokens each, distinct label strings.
  std::vector<Vector> class_text;
  for (std::size_t c = 0; c < config.classes; ++c) {
    SynthClass cls;
    for (int attempt = 0;; ++attempt) {
      cls.token_ids.clear();
      while (cls.token_ids.size() < config.sparsity) {
        const auto id = static_cast<std::size_t>(rng.below(config.vocab_size));
        if (std::find(cls.token_ids.begin(), cls.token_ids.end(), id) == cls.token_ids.end()) cls.token_ids.push_back(id);
      }
      cls.label.clear();
      for (auto id : cls.token_ids) cls.label += (cls.label.empty() ? "" : " ") + tokens[id];
      const bool unique = std::none_of(out.classes.begin(), out.classes.end(),
                                       [&](const SynthClass& o) { return o.label == cls.label; });
      if (unique || attempt > 1000) break;
    }
    class_text.push_back(mean_embedding(cls.token_ids, out.vocab));
    out.classes.push_back(std::move(cls));
  }

  // Orthonormal basis U (d' x r) of the class text span.
  Eigen::MatrixXd text_cols(dp, static_cast<Eigen::Index>(config.classes));
  for (std::size_t c = 0; c < config.classes; ++c) text_cols.col(static_cast<Eigen::Index>(c)) = class_text[c];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(text_cols, Eigen::ComputeThinU);
  svd.setThreshold(1e-10);
  const Eigen::Index rank = svd.rank();
  if (rank > d) throw Error(Errc::InvalidArgument, "synth: class text span has rank " + std::to_string(rank) + " > dim");
  const Eigen::MatrixXd basis = svd.matrixU().leftCols(rank);

  // Input frame: first `rank` columns carry the signal coordinates, the rest
  // is nuisance. The true projector reads the signal columns back out.
  const Eigen::MatrixXd frame = random_orthogonal(rng, config.dim);
  const Eigen::MatrixXd signal_in = frame.leftCols(rank);
  const Eigen::MatrixXd nuisance_in = frame.rightCols(d - rank);
  out.truth.kind = ProjectorKind::linear;
  out.truth.weight1 = basis * signal_in.transpose();
  out.truth.bias1 = Vector::Zero(dp);

  std::vector<Vector> class_coords;
  for (const auto& t : class_text) class_coords.push_back(basis.transpose() * t);

  const PatchGrid& grid = out.grid;
  const std::size_t max_h = std::max<std::size_t>(1, grid.grid_h / 2);
  const std::size_t max_w = std::max<std::size_t>(1, grid.grid_w / 2);

  for (std::size_t img = 0; img < config.n_images; ++img) {
    char name[32];
    std::snprintf(name, sizeof name, "%06zu.jpg", img);
    std::vector<int> planted(grid.size(), -1);
    PadRecord record;
    record.image_id = name;
    record.width = grid.input_w();
    record.height = grid.input_h();
    TrainSample sample;
    sample.image_id = name;

    const std::size_t n_obj = 1 + static_cast<std::size_t>(rng.below(std::min(config.max_objects, config.classes)));
    std::vector<std::size_t> used_classes;
    for (std::size_t o = 0; o < n_obj; ++o) {
      const std::size_t h = 1 + static_cast<std::size_t>(rng.below(max_h));
      const std::size_t w = 1 + static_cast<std::size_t>(rng.below(max_w));
      bool placed = false;
      std::size_t r0 = 0, c0 = 0;
      for (int attempt = 0; attempt < 20 && !placed; ++attempt) {
        r0 = static_cast<std::size_t>(rng.below(grid.grid_h - h + 1));
        c0 = static_cast<std::size_t>(rng.below(grid.grid_w - w + 1));
        placed = true;
        for (std::size_t r = r0; r < r0 + h && placed; ++r) {
          for (std::size_t c = c0; c < c0 + w; ++c) {
            if (planted[r * grid.grid_w + c] >= 0) {
              placed = false;
              break;
            }
          }
        }
      }
      if (!placed) continue;
      std::size_t cls;
      do {
        cls = static_cast<std::size_t>(rng.below(config.classes));
      } while (std::find(used_classes.begin(), used_classes.end(), cls) != used_classes.end());
      used_classes.push_back(cls);

      TrainObject obj;
      for (std::size_t r = r0; r < r0 + h; ++r) {
        for (std::size_t c = c0; c < c0 + w; ++c) {
          planted[r * grid.grid_w + c] = static_cast<int>(cls);
          obj.patch_indices.push_back(r * grid.grid_w + c);
        }
      }
      obj.token_ids = out.classes[cls].token_ids;

      MaskAnnotation ann;
      ann.tag = out.classes[cls].label;
      const auto px = static_cast<double>(grid.patch_px);
      ann.bbox = BBox{static_cast<double>(c0) * px, static_cast<double>(r0) * px, static_cast<double>(c0 + w) * px,
                      static_cast<double>(r0 + h) * px};
      ann.mask_h = record.height;
      ann.mask_w = record.width;
      ann.rle = rle_encode(patch_set_to_mask(obj.patch_indices, grid));
      record.labels.push_back(std::move(ann));
      sample.objects.push_back(std::move(obj));
    }

    record.caption = "a synthetic scene with";
    for (std::size_t k = 0; k < record.labels.size(); ++k) {
      record.caption += (k == 0 ? " " : " and ") + record.labels[k].tag;
    }

    RowMatrix patches(static_cast<Eigen::Index>(grid.size()), d);
    for (std::size_t p = 0; p < grid.size(); ++p) {
      Vector x = Vector::Zero(d);
      if (planted[p] >= 0) {
        const double scale = rng.uniform(0.75, 1.25);
        x += signal_in * (scale * class_coords[static_cast<std::size_t>(planted[p])]);
      }
      for (Eigen::Index k = 0; k < nuisance_in.cols(); ++k) x += (config.nuisance_sigma * rng.normal()) * nuisance_in.col(k);
      for (Eigen::Index k = 0; k < d; ++k) x[k] += config.noise_sigma * rng.normal();
      patches.row(static_cast<Eigen::Index>(p)) = x.transpose();
    }
    sample.patches = DenseMatrix(std::move(patches), Dtype::f64);

    out.planted.push_back(std::move(planted));
    out.records.push_back(std::move(record));
    out.dataset.push_back(std::move(sample));
  }
  return out;
}

}  // namespace projlens
