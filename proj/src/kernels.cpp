#include "projlens/kernels.hpp"

#include <cmath>

namespace projlens::kernels {
namespace {

using Index = Eigen::Index;

void second_moment_row(const RowMatrix& v, Index j, RowMatrix& out) {
  const Index n = v.rows();
  const Index d = v.cols();
  double* dst = out.row(j).data();
  for (Index i = 0; i < n; ++i) {
    const double* src = v.row(i).data();
    const double a = src[j];
    for (Index k = 0; k < d; ++k) dst[k] += a * src[k];
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Index k = 0; k < d; ++k) dst[k] *= inv_n;
}

double gram_entry(const RowMatrix& v, Index a, Index b) {
  const double* x = v.row(a).data();
  const double* y = v.row(b).data();
  double s = 0.0;
  for (Index k = 0; k < v.cols(); ++k) s += x[k] * y[k];
  return s / static_cast<double>(v.rows());
}

double row_cosine(const RowMatrix& v, Index i, const Vector& t, double t_norm) {
  const double* x = v.row(i).data();
  double dot = 0.0;
  double sq = 0.0;
  for (Index k = 0; k < v.cols(); ++k) {
    dot += x[k] * t[k];
    sq += x[k] * x[k];
  }
  if (sq == 0.0 || t_norm == 0.0) return 0.0;
  return dot / (std::sqrt(sq) * t_norm);
}

std::size_t patch_count(const BinaryMask& mask, const PatchGrid& grid, std::size_t p) {
  const std::size_t r0 = (p / grid.grid_w) * grid.patch_px;
  const std::size_t c0 = (p % grid.grid_w) * grid.patch_px;
  std::size_t count = 0;
  for (std::size_t r = r0; r < r0 + grid.patch_px; ++r) {
    for (std::size_t c = c0; c < c0 + grid.patch_px; ++c) count += mask.at(r, c) ? 1 : 0;
  }
  return count;
}

}  // namespace

RowMatrix second_moment_serial(const RowMatrix& v) {
  RowMatrix out = RowMatrix::Zero(v.cols(), v.cols());
  for (Index j = 0; j < v.cols(); ++j) second_moment_row(v, j, out);
  return out;
}

RowMatrix second_moment(const RowMatrix& v) {
  RowMatrix out = RowMatrix::Zero(v.cols(), v.cols());
  const Index d = v.cols();
#pragma omp parallel for schedule(dynamic, 4)
  for (Index j = 0; j < d; ++j) second_moment_row(v, j, out);
  return out;
}

RowMatrix gram_serial(const RowMatrix& v) {
  const Index n = v.rows();
  RowMatrix out(n, n);
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) out(a, b) = gram_entry(v, a, b);
  }
  return out;
}

RowMatrix gram(const RowMatrix& v) {
  const Index n = v.rows();
  RowMatrix out(n, n);
#pragma omp parallel for schedule(dynamic, 8)
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) out(a, b) = gram_entry(v, a, b);
  }
  return out;
}

std::vector<double> cosine_rows_serial(const RowMatrix& v, const Vector& t) {
  const double t_norm = t.norm();
  std::vector<double> out(static_cast<std::size_t>(v.rows()));
  for (Index i = 0; i < v.rows(); ++i) out[static_cast<std::size_t>(i)] = row_cosine(v, i, t, t_norm);
  return out;
}

std::vector<double> cosine_rows(const RowMatrix& v, const Vector& t) {
  const double t_norm = t.norm();
  const Index n = v.rows();
  std::vector<double> out(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = row_cosine(v, i, t, t_norm);
  return out;
}

std::vector<std::size_t> coverage_counts_serial(const BinaryMask& mask, const PatchGrid& grid) {
  std::vector<std::size_t> out(grid.size());
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = patch_count(mask, grid, p);
  return out;
}

std::vector<std::size_t> coverage_counts(const BinaryMask& mask, const PatchGrid& grid) {
  const auto s = static_cast<std::ptrdiff_t>(grid.size());
  std::vector<std::size_t> out(grid.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < s; ++p) {
    out[static_cast<std::size_t>(p)] = patch_count(mask, grid, static_cast<std::size_t>(p));
  }
  return out;
}

}  // namespace projlens::kernels
