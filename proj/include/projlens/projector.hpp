#pragma once

#include "projlens/matrix.hpp"
#include "projlens/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace projlens {

enum class ProjectorKind { linear, mlp2 };

std::string to_string(ProjectorKind kind);
ProjectorKind parse_projector_kind(std::string_view text);

// linear: out = W1 x + b1                       (W1 is d' x d)
// mlp2:   out = W2 gelu(W1 x + b1) + b2         (W1 is h x d, W2 is d' x h)
// GELU is the tanh approximation.
struct ProjectorParams {
  ProjectorKind kind = ProjectorKind::linear;
  RowMatrix weight1;
  Vector bias1;
  RowMatrix weight2;  // empty for linear
  Vector bias2;       // empty for linear

  std::size_t in_dim() const { return static_cast<std::size_t>(weight1.cols()); }
  std::size_t hidden_dim() const { return kind == ProjectorKind::mlp2 ? static_cast<std::size_t>(weight1.rows()) : 0; }
  std::size_t out_dim() const {
    return static_cast<std::size_t>(kind == ProjectorKind::mlp2 ? weight2.rows() : weight1.rows());
  }

  // Zero-valued parameters with the same shapes (used as a gradient).
  ProjectorParams zeros_like() const;
  std::size_t parameter_count() const;

  // Views of every tensor in a fixed order: weight1, bias1[, weight2, bias2].
  std::vector<std::span<double>> tensors();
  std::vector<std::span<const double>> tensors() const;

  bool operator==(const ProjectorParams& other) const;
};

// Weights uniform in +-1/sqrt(fan_in), biases zero.
ProjectorParams init_projector(ProjectorKind kind, std::size_t in_dim, std::size_t hidden_dim, std::size_t out_dim, Rng& rng);

double gelu(double x);
double gelu_derivative(double x);

// Intermediate values kept for the backward pass.
struct ForwardCache {
  RowMatrix pre_activation;  // mlp2 only: X W1^T + b1
  RowMatrix hidden;          // mlp2 only: gelu(pre_activation)
};

RowMatrix project(const ProjectorParams& params, const RowMatrix& patches, ForwardCache* cache = nullptr);
DenseMatrix project(const ProjectorParams& params, const DenseMatrix& patches);

// Gradient of a scalar loss w.r.t. the parameters, given dL/d(output).
ProjectorParams projector_backward(const ProjectorParams& params, const RowMatrix& patches, const ForwardCache& cache,
                                   const RowMatrix& grad_out);

struct CheckpointMeta {
  std::size_t step = 0;
  std::uint64_t seed = 0;
};

// One NPY per tensor (biases stored as 1 x n) plus meta.json.
void save_checkpoint(const ProjectorParams& params, const CheckpointMeta& meta, const std::filesystem::path& dir);
ProjectorParams load_checkpoint(const std::filesystem::path& dir, CheckpointMeta* meta = nullptr);

}  // namespace projlens
