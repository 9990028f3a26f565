#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace projlens {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class Dtype { f32, f64 };

// n x d matrix of row vectors (one embedding per row). Values are held in
// double precision regardless of the on-disk dtype; `dtype` records the
// storage precision to use when the matrix is written back out.
struct DenseMatrix {
  RowMatrix values;
  Dtype dtype = Dtype::f64;

  DenseMatrix() = default;
  DenseMatrix(RowMatrix v, Dtype t = Dtype::f64) : values(std::move(v)), dtype(t) {}

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
  double operator()(std::size_t i, std::size_t j) const {
    return values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  bool operator==(const DenseMatrix& other) const {
    return dtype == other.dtype && values.rows() == other.values.rows() &&
           values.cols() == other.values.cols() && values == other.values;
  }
};

}  // namespace projlens
