#include "projlens/pursuit.hpp"

#include "projlens/error.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace projlens {

Dictionary::Dictionary(const VocabTable& vocab) : atoms_(vocab.embeddings().values), norms_(atoms_.rows()) {
  for (Eigen::Index i = 0; i < atoms_.rows(); ++i) {
    norms_[i] = atoms_.row(i).norm();
    if (norms_[i] == 0.0) throw Error(Errc::ZeroNorm, "vocab row " + std::to_string(i) + " has zero norm");
    if (!vocab.unit_normalized()) atoms_.row(i) /= norms_[i];
  }
}

PursuitResult matching_pursuit(const Vector& v, const Dictionary& dict, const PursuitOptions& options) {
  if (static_cast<std::size_t>(v.size()) != dict.dim()) {
    throw Error(Errc::DimensionMismatch, "vector dim " + std::to_string(v.size()) + " vs dictionary dim " +
                                             std::to_string(dict.dim()));
  }
  if (options.distinct && options.k > dict.size()) {
    throw Error(Errc::InvalidArgument, "K=" + std::to_string(options.k) + " distinct atoms requested from a dictionary of " +
                                           std::to_string(dict.size()));
  }
  PursuitResult out;
  out.residual = v;
  out.steps.reserve(options.k);
  const double v_norm = v.norm();
  const auto& atoms = dict.atoms();
  std::vector<bool> used(options.distinct ? dict.size() : 0, false);
  Vector scores(atoms.rows());
  for (std::size_t step = 0; step < options.k; ++step) {
    scores.noalias() = atoms * out.residual;
    Eigen::Index best = -1;
    double best_score = 0.0;
    for (Eigen::Index m = 0; m < scores.size(); ++m) {
      if (options.distinct && used[static_cast<std::size_t>(m)]) continue;
      const double s = options.absolute ? std::abs(scores[m]) : scores[m];
      if (best < 0 || s > best_score) {
        best = m;
        best_score = s;
      }
    }
    const double alpha = scores[best];
    out.residual.noalias() -= alpha * atoms.row(best).transpose();
    if (options.distinct) used[static_cast<std::size_t>(best)] = true;
    PursuitStep s;
    s.token_id = static_cast<std::size_t>(best);
    s.coefficient = alpha;
    s.residual_norm = out.residual.norm();
    s.cosine = v_norm > 0.0 ? atoms.row(best).dot(v) / v_norm : 0.0;
    out.steps.push_back(s);
  }
  return out;
}

PursuitResult matching_pursuit(const Vector& v, const VocabTable& vocab, const PursuitOptions& options) {
  return matching_pursuit(v, Dictionary(vocab), options);
}

std::string display_token(const std::string& token) {
  std::string t = token;
  for (const std::string marker : {"\xE2\x96\x81", "\xC4\xA0", "##"}) {
    if (t.rfind(marker, 0) == 0) {
      t.erase(0, marker.size());
      break;
    }
  }
  for (auto& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return t;
}

namespace {

TokenMapPatch decompose_patch(const DenseMatrix& v, std::size_t i, const Dictionary& dict, const VocabTable& vocab,
                              const PursuitOptions& options, const std::unordered_set<std::string>& wordlist) {
  TokenMapPatch p;
  p.index = i;
  p.result = matching_pursuit(v.values.row(static_cast<Eigen::Index>(i)).transpose(), dict, options);
  p.recognized.reserve(p.result.steps.size());
  for (const auto& s : p.result.steps) {
    p.recognized.push_back(!wordlist.empty() && wordlist.contains(display_token(vocab.token(s.token_id))));
  }
  return p;
}

void check_dims(const DenseMatrix& v, const VocabTable& vocab) {
  if (v.cols() != vocab.dim()) {
    throw Error(Errc::DimensionMismatch, "embeddings have dim " + std::to_string(v.cols()) + ", vocab has dim " +
                                             std::to_string(vocab.dim()));
  }
}

}  // namespace

TokenMap tokenmap_serial(const DenseMatrix& v, const VocabTable& vocab, const PursuitOptions& options,
                         const std::unordered_set<std::string>& wordlist) {
  check_dims(v, vocab);
  const Dictionary dict(vocab);
  TokenMap map;
  map.patches.reserve(v.rows());
  for (std::size_t i = 0; i < v.rows(); ++i) map.patches.push_back(decompose_patch(v, i, dict, vocab, options, wordlist));
  return map;
}

TokenMap tokenmap(const DenseMatrix& v, const VocabTable& vocab, const PursuitOptions& options,
                  const std::unordered_set<std::string>& wordlist) {
  check_dims(v, vocab);
  if (options.distinct && options.k > vocab.size()) {
    throw Error(Errc::InvalidArgument, "K exceeds vocabulary size with distinct atoms");
  }
  const Dictionary dict(vocab);
  TokenMap map;
  map.patches.resize(v.rows());
  const auto n = static_cast<std::ptrdiff_t>(v.rows());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    map.patches[static_cast<std::size_t>(i)] = decompose_patch(v, static_cast<std::size_t>(i), dict, vocab, options, wordlist);
  }
  return map;
}

nlohmann::ordered_json to_json(const TokenMap& map, const VocabTable& vocab) {
  auto patches = nlohmann::ordered_json::array();
  for (const auto& p : map.patches) {
    nlohmann::ordered_json pj;
    pj["index"] = p.index;
    auto steps = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < p.result.steps.size(); ++k) {
      const auto& s = p.result.steps[k];
      nlohmann::ordered_json sj;
      sj["token"] = vocab.token(s.token_id);
      sj["token_id"] = s.token_id;
      sj["alpha"] = s.coefficient;
      sj["cosine"] = s.cosine;
      sj["residual_norm"] = s.residual_norm;
      sj["recognized"] = static_cast<bool>(p.recognized[k]);
      steps.push_back(std::move(sj));
    }
    pj["steps"] = std::move(steps);
    patches.push_back(std::move(pj));
  }
  return patches;
}

std::string cosine_maps_csv(const TokenMap& map, const VocabTable& vocab) {
  std::ostringstream os;
  os.precision(17);
  os << "iteration,patch,token,alpha,cosine\n";
  std::size_t k_max = 0;
  for (const auto& p : map.patches) k_max = std::max(k_max, p.result.steps.size());
  for (std::size_t k = 0; k < k_max; ++k) {
    for (const auto& p : map.patches) {
      if (k >= p.result.steps.size()) continue;
      const auto& s = p.result.steps[k];
      std::string token = vocab.token(s.token_id);
      if (token.find_first_of(",\"\n") != std::string::npos) {
        std::string quoted = "\"";
        for (char c : token) {
          if (c == '"') quoted += '"';
          quoted += c;
        }
        token = quoted + "\"";
      }
      os << (k + 1) << ',' << p.index << ',' << token << ',' << s.coefficient << ',' << s.cosine << '\n';
    }
  }
  return os.str();
}

}  // namespace projlens
