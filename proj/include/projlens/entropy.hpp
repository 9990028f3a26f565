#pragma once

#include "projlens/matrix.hpp"

#include <json.hpp>

#include <cstddef>
#include <vector>

namespace projlens {

// Spectrum of the trace-normalised second-moment matrix rho of an embedding
// set. Entropy is in nats.
struct SpectrumReport {
  std::vector<double> eigenvalues;  // descending, sum 1, clipped at 0
  double entropy = 0.0;
  std::size_t effective_rank = 0;
  std::size_t n = 0;
  std::size_t d = 0;
};

enum class SpectrumRoute {
  automatic,   // covariance when d <= n, Gram otherwise
  covariance,  // eigenvalues of the d x d second moment
  gram,        // eigenvalues of the n x n Gram matrix
  svd,         // squared singular values of V / sqrt(n)
};

// Sigma = (1/n) sum_i v_i v_i^T, uncentred. Rows of `v` are the vectors.
RowMatrix second_moment(const DenseMatrix& v);

// Turns raw (unnormalised) eigenvalues into a report. Values below
// 1e-12 * max are treated as zero.
SpectrumReport spectrum_from_eigenvalues(std::vector<double> raw, std::size_t n, std::size_t d);

SpectrumReport von_neumann_entropy(const DenseMatrix& v, SpectrumRoute route = SpectrumRoute::automatic);

// H(before) - H(after); positive means the map compressed the set.
double entropy_reduction(const DenseMatrix& before, const DenseMatrix& after);

// {entropy, effective_rank, eigenvalues, n, d}; max_eigenvalues == 0 keeps
// the full spectrum.
nlohmann::ordered_json to_json(const SpectrumReport& report, std::size_t max_eigenvalues = 0);

}  // namespace projlens
