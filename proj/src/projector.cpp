#include "projlens/projector.hpp"

#include "projlens/error.hpp"
#include "projlens/npy.hpp"

#include <json.hpp>

#include <cmath>
#include <numbers>

namespace projlens {
namespace {

constexpr double kGeluScale = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluCubic = 0.044715;

void check_shapes(const ProjectorParams& p) {
  const bool ok = p.kind == ProjectorKind::linear
                      ? p.bias1.size() == p.weight1.rows() && p.weight2.size() == 0 && p.bias2.size() == 0
                      : p.bias1.size() == p.weight1.rows() && p.weight2.cols() == p.weight1.rows() &&
                            p.bias2.size() == p.weight2.rows();
  if (!ok) throw Error(Errc::DimensionMismatch, "projector tensors have inconsistent shapes");
}

DenseMatrix as_row(const Vector& v) { return DenseMatrix(RowMatrix(v.transpose()), Dtype::f64); }

Vector from_row(const DenseMatrix& m, const char* name) {
  if (m.rows() != 1) throw Error(Errc::BadShape, std::string(name) + " must be stored as a 1 x n array");
  return m.values.row(0).transpose();
}

}  // namespace

std::string to_string(ProjectorKind kind) { return kind == ProjectorKind::linear ? "linear" : "mlp2"; }

ProjectorKind parse_projector_kind(std::string_view text) {
  if (text == "linear") return ProjectorKind::linear;
  if (text == "mlp2" || text == "mlp") return ProjectorKind::mlp2;
  throw Error(Errc::InvalidArgument, "unknown projector kind '" + std::string(text) + "'");
}

ProjectorParams ProjectorParams::zeros_like() const {
  ProjectorParams z;
  z.kind = kind;
  z.weight1 = RowMatrix::Zero(weight1.rows(), weight1.cols());
  z.bias1 = Vector::Zero(bias1.size());
  z.weight2 = RowMatrix::Zero(weight2.rows(), weight2.cols());
  z.bias2 = Vector::Zero(bias2.size());
  return z;
}

std::size_t ProjectorParams::parameter_count() const {
  return static_cast<std::size_t>(weight1.size() + bias1.size() + weight2.size() + bias2.size());
}

std::vector<std::span<double>> ProjectorParams::tensors() {
  std::vector<std::span<double>> out{{weight1.data(), static_cast<std::size_t>(weight1.size())},
                                     {bias1.data(), static_cast<std::size_t>(bias1.size())}};
  if (kind == ProjectorKind::mlp2) {
    out.emplace_back(weight2.data(), static_cast<std::size_t>(weight2.size()));
    out.emplace_back(bias2.data(), static_cast<std::size_t>(bias2.size()));
  }
  return out;
}

std::vector<std::span<const double>> ProjectorParams::tensors() const {
  std::vector<std::span<const double>> out{{weight1.data(), static_cast<std::size_t>(weight1.size())},
                                           {bias1.data(), static_cast<std::size_t>(bias1.size())}};
  if (kind == ProjectorKind::mlp2) {
    out.emplace_back(weight2.data(), static_cast<std::size_t>(weight2.size()));
    out.emplace_back(bias2.data(), static_cast<std::size_t>(bias2.size()));
  }
  return out;
}

bool ProjectorParams::operator==(const ProjectorParams& o) const {
  auto same = [](const auto& a, const auto& b) { return a.rows() == b.rows() && a.cols() == b.cols() && a == b; };
  return kind == o.kind && same(weight1, o.weight1) && same(bias1, o.bias1) && same(weight2, o.weight2) &&
         same(bias2, o.bias2);
}

ProjectorParams init_projector(ProjectorKind kind, std::size_t in_dim, std::size_t hidden_dim, std::size_t out_dim, Rng& rng) {
  if (in_dim == 0 || out_dim == 0 || (kind == ProjectorKind::mlp2 && hidden_dim == 0)) {
    throw Error(Errc::InvalidArgument, "projector dimensions must be positive");
  }
  auto uniform_matrix = [&rng](std::size_t rows, std::size_t cols) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
    RowMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(-bound, bound);
    }
    return m;
  };
  ProjectorParams p;
  p.kind = kind;
  if (kind == ProjectorKind::linear) {
    p.weight1 = uniform_matrix(out_dim, in_dim);
    p.bias1 = Vector::Zero(static_cast<Eigen::Index>(out_dim));
  } else {
    p.weight1 = uniform_matrix(hidden_dim, in_dim);
    p.bias1 = Vector::Zero(static_cast<Eigen::Index>(hidden_dim));
    p.weight2 = uniform_matrix(out_dim, hidden_dim);
    p.bias2 = Vector::Zero(static_cast<Eigen::Index>(out_dim));
  }
  return p;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::tanh(kGeluScale * (x + kGeluCubic * x * x * x))); }

double gelu_derivative(double x) {
  const double t = std::tanh(kGeluScale * (x + kGeluCubic * x * x * x));
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * kGeluScale * (1.0 + 3.0 * kGeluCubic * x * x);
}

RowMatrix project(const ProjectorParams& params, const RowMatrix& patches, ForwardCache* cache) {
  check_shapes(params);
  if (static_cast<std::size_t>(patches.cols()) != params.in_dim()) {
    throw Error(Errc::DimensionMismatch, "patches have dim " + std::to_string(patches.cols()) + ", projector expects " +
                                             std::to_string(params.in_dim()));
  }
  RowMatrix first = patches * params.weight1.transpose();
  first.rowwise() += params.bias1.transpose();
  if (params.kind == ProjectorKind::linear) return first;

  RowMatrix hidden = first.unaryExpr([](double x) { return gelu(x); });
  RowMatrix out = hidden * params.weight2.transpose();
  out.rowwise() += params.bias2.transpose();
  if (cache) {
    cache->pre_activation = std::move(first);
    cache->hidden = std::move(hidden);
  }
  return out;
}

DenseMatrix project(const ProjectorParams& params, const DenseMatrix& patches) {
  return DenseMatrix(project(params, patches.values), Dtype::f64);
}

ProjectorParams projector_backward(const ProjectorParams& params, const RowMatrix& patches, const ForwardCache& cache,
                                   const RowMatrix& grad_out) {
  ProjectorParams g = params.zeros_like();
  if (params.kind == ProjectorKind::linear) {
    g.weight1 = grad_out.transpose() * patches;
    g.bias1 = grad_out.colwise().sum().transpose();
    return g;
  }
  g.weight2 = grad_out.transpose() * cache.hidden;
  g.bias2 = grad_out.colwise().sum().transpose();
  RowMatrix grad_pre = grad_out * params.weight2;
  grad_pre.array() *= cache.pre_activation.unaryExpr([](double x) { return gelu_derivative(x); }).array();
  g.weight1 = grad_pre.transpose() * patches;
  g.bias1 = grad_pre.colwise().sum().transpose();
  return g;
}

void save_checkpoint(const ProjectorParams& params, const CheckpointMeta& meta, const std::filesystem::path& dir) {
  check_shapes(params);
  std::filesystem::create_directories(dir);
  save_matrix(DenseMatrix(params.weight1, Dtype::f64), dir / "weight1.npy");
  save_matrix(as_row(params.bias1), dir / "bias1.npy");
  if (params.kind == ProjectorKind::mlp2) {
    save_matrix(DenseMatrix(params.weight2, Dtype::f64), dir / "weight2.npy");
    save_matrix(as_row(params.bias2), dir / "bias2.npy");
  }
  nlohmann::ordered_json j;
  j["kind"] = to_string(params.kind);
  j["d"] = params.in_dim();
  j["h"] = params.hidden_dim();
  j["d_out"] = params.out_dim();
  j["step"] = meta.step;
  j["seed"] = meta.seed;
  write_file(dir / "meta.json", j.dump(2) + "\n");
}

ProjectorParams load_checkpoint(const std::filesystem::path& dir, CheckpointMeta* meta) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(dir / "meta.json"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, "checkpoint meta.json: " + std::string(e.what()));
  }
  if (!j.contains("kind")) throw Error(Errc::MissingField, "checkpoint meta.json lacks 'kind'");
  ProjectorParams p;
  p.kind = parse_projector_kind(j["kind"].get<std::string>());
  p.weight1 = load_matrix(dir / "weight1.npy").values;
  p.bias1 = from_row(load_matrix(dir / "bias1.npy"), "bias1");
  if (p.kind == ProjectorKind::mlp2) {
    p.weight2 = load_matrix(dir / "weight2.npy").values;
    p.bias2 = from_row(load_matrix(dir / "bias2.npy"), "bias2");
  }
  check_shapes(p);
  if (meta) {
    meta->step = j.value("step", std::size_t{0});
    meta->seed = j.value("seed", std::uint64_t{0});
  }
  return p;
}

}  // namespace projlens
