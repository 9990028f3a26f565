#include "projlens/entropy.hpp"

#include "projlens/error.hpp"
#include "projlens/kernels.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>

namespace projlens {
namespace {

constexpr double kRelativeCutoff = 1e-12;

void check_input(const DenseMatrix& v) {
  if (v.rows() == 0) throw Error(Errc::EmptyMatrix, "entropy needs at least one vector");
  if (v.cols() == 0) throw Error(Errc::EmptyMatrix, "entropy needs vectors of positive dimension");
  if (v.values.cwiseAbs().maxCoeff() == 0.0) throw Error(Errc::ZeroInput, "all-zero embedding set has no density matrix");
}

std::vector<double> symmetric_eigenvalues(const RowMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error(Errc::InvalidArgument, "eigendecomposition failed to converge");
  const auto& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

}  // namespace

RowMatrix second_moment(const DenseMatrix& v) {
  check_input(v);
  return kernels::second_moment(v.values);
}

SpectrumReport spectrum_from_eigenvalues(std::vector<double> raw, std::size_t n, std::size_t d) {
  std::sort(raw.begin(), raw.end(), std::greater<>());
  SpectrumReport r;
  r.n = n;
  r.d = d;
  const double top = raw.empty() ? 0.0 : raw.front();
  if (!(top > 0.0)) throw Error(Errc::ZeroInput, "second moment has no positive eigenvalue");
  const double cutoff = kRelativeCutoff * top;
  double trace = 0.0;
  for (auto& x : raw) {
    if (x <= cutoff) x = 0.0;
    trace += x;
  }
  r.eigenvalues.reserve(raw.size());
  for (double x : raw) {
    const double lambda = x / trace;
    r.eigenvalues.push_back(lambda);
    if (lambda > 0.0) {
      r.entropy -= lambda * std::log(lambda);
      ++r.effective_rank;
    }
  }
  r.entropy = std::max(r.entropy, 0.0);
  return r;
}

SpectrumReport von_neumann_entropy(const DenseMatrix& v, SpectrumRoute route) {
  check_input(v);
  const std::size_t n = v.rows();
  const std::size_t d = v.cols();
  if (route == SpectrumRoute::automatic) route = d > n ? SpectrumRoute::gram : SpectrumRoute::covariance;

  std::vector<double> raw;
  switch (route) {
    case SpectrumRoute::covariance:
      raw = symmetric_eigenvalues(kernels::second_moment(v.values));
      break;
    case SpectrumRoute::gram:
      raw = symmetric_eigenvalues(kernels::gram(v.values));
      break;
    case SpectrumRoute::svd: {
      const Eigen::MatrixXd scaled = v.values / std::sqrt(static_cast<double>(n));
      Eigen::BDCSVD<Eigen::MatrixXd> svd(scaled);
      const auto& s = svd.singularValues();
      raw.reserve(static_cast<std::size_t>(s.size()));
      for (Eigen::Index i = 0; i < s.size(); ++i) raw.push_back(s[i] * s[i]);
      break;
    }
    case SpectrumRoute::automatic:
      break;
  }
  return spectrum_from_eigenvalues(std::move(raw), n, d);
}

double entropy_reduction(const DenseMatrix& before, const DenseMatrix& after) {
  return von_neumann_entropy(before).entropy - von_neumann_entropy(after).entropy;
}

nlohmann::ordered_json to_json(const SpectrumReport& report, std::size_t max_eigenvalues) {
  nlohmann::ordered_json j;
  j["entropy"] = report.entropy;
  j["log_base"] = "e";
  j["effective_rank"] = report.effective_rank;
  j["n"] = report.n;
  j["d"] = report.d;
  const std::size_t keep = max_eigenvalues == 0 ? report.eigenvalues.size()
                                                : std::min(max_eigenvalues, report.eigenvalues.size());
  j["eigenvalues"] = std::vector<double>(report.eigenvalues.begin(), report.eigenvalues.begin() + static_cast<std::ptrdiff_t>(keep));
  j["eigenvalues_truncated"] = keep < report.eigenvalues.size();
  return j;
}

}  // namespace projlens
