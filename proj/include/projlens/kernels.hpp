#pragma once

// Data-parallel inner loops. Each kernel has a serial reference and an
// OpenMP version; the OpenMP versions partition output elements across
// threads and keep every per-element reduction in the serial order, so both
// produce bit-identical results regardless of thread count.

#include "projlens/mask.hpp"
#include "projlens/matrix.hpp"

#include <cstddef>
#include <vector>

namespace projlens::kernels {

// (1/n) V^T V for an n x d matrix of rows.
RowMatrix second_moment_serial(const RowMatrix& v);
RowMatrix second_moment(const RowMatrix& v);

// (1/n) V V^T, the n x n Gram matrix with the same nonzero spectrum.
RowMatrix gram_serial(const RowMatrix& v);
RowMatrix gram(const RowMatrix& v);

// cos(t, v_i) per row; rows with zero norm map to 0.
std::vector<double> cosine_rows_serial(const RowMatrix& v, const Vector& t);
std::vector<double> cosine_rows(const RowMatrix& v, const Vector& t);

// Foreground pixel count per patch (row-major patch order).
std::vector<std::size_t> coverage_counts_serial(const BinaryMask& mask, const PatchGrid& grid);
std::vector<std::size_t> coverage_counts(const BinaryMask& mask, const PatchGrid& grid);

}  // namespace projlens::kernels
