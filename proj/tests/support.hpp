#pragma once

#include "projlens/matrix.hpp"
#include "projlens/rng.hpp"

#include <Eigen/QR>

#include <unistd.h>

#include <filesystem>
#include <string>

namespace projlens::testing {

inline RowMatrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  RowMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.normal();
  return m;
}

inline Vector random_vector(Rng& rng, std::size_t n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
  return v;
}

// Haar-distributed orthogonal matrix (QR of a Gaussian matrix, sign-fixed).
inline RowMatrix random_orthogonal(Rng& rng, std::size_t n) {
  const RowMatrix g = random_matrix(rng, n, n);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR();
  for (Eigen::Index j = 0; j < q.cols(); ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(PROJLENS_TEST_DATA) / name;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("projlens_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace projlens::testing
