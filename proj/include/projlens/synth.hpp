#pragma once

#include "projlens/mask.hpp"
#include "projlens/pad.hpp"
#include "projlens/projector.hpp"
#include "projlens/trainer.hpp"
#include "projlens/vocab.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace projlens {

struct SynthConfig {
  std::uint64_t seed = 7;
  std::size_t n_images = 256;
  std::size_t patches = 16;  // S; a perfect square gives a square grid
  std::size_t dim = 32;      // d, encoder width
  std::size_t out_dim = 24;  // d', LLM width
  std::size_t vocab_size = 64;
  std::size_t sparsity = 1;  // tokens per object label
  double noise_sigma = 0.05;
  std::size_t classes = 8;
  std::size_t max_objects = 3;
  double nuisance_sigma = 0.2;  // per-coordinate std of signal-orthogonal input energy
  std::size_t patch_px = 4;
};

struct SynthClass {
  std::string label;
  std::vector<std::size_t> token_ids;
};

struct SynthData {
  std::vector<TrainSample> dataset;
  VocabTable vocab;
  ProjectorParams truth;  // linear map taking each object patch onto scale * t
  std::vector<PadRecord> records;
  PatchGrid grid;
  std::vector<SynthClass> classes;
  // planted[image][patch] = class index, or -1 for background patches.
  std::vector<std::vector<int>> planted;
};

// Synthetic stand-in for exported encoder embeddings with known ground truth.
// Vocab rows are orthonormal when vocab_size <= out_dim and random unit
// vectors otherwise. Each image gets up to max_objects non-overlapping
// rectangles of patches, one class each. Object patches are
// scale * (pre-image of t_class) + nuisance + noise, background patches
// nuisance + noise, where the nuisance lies in the kernel of the hidden true
// projector.
SynthData synth_dataset(const SynthConfig& config);

PatchGrid synth_grid(std::size_t patches, std::size_t patch_px);

}  // namespace projlens
