#pragma once

#include "projlens/matrix.hpp"
#include "projlens/vocab.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

namespace projlens {

struct PursuitOptions {
  std::size_t k = 5;
  bool distinct = false;  // forbid re-selecting an atom
  bool absolute = false;  // argmax |<w, v>| instead of the signed product
};

struct PursuitStep {
  std::size_t token_id = 0;
  double coefficient = 0.0;    // <w, v_i> with w unit-norm
  double residual_norm = 0.0;  // ||v_{i+1}||
  double cosine = 0.0;         // cos(original v, w), for rendering
};

struct PursuitResult {
  std::vector<PursuitStep> steps;
  Vector residual;
};

// Vocabulary rows scaled to unit norm; the original norms are kept.
class Dictionary {
 public:
  explicit Dictionary(const VocabTable& vocab);

  std::size_t size() const { return static_cast<std::size_t>(atoms_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(atoms_.cols()); }
  const RowMatrix& atoms() const { return atoms_; }
  const Vector& norms() const { return norms_; }

 private:
  RowMatrix atoms_;
  Vector norms_;
};

// Greedy matching pursuit: each step picks the atom with the largest inner
// product with the current residual (lowest id on ties), records the
// coefficient and subtracts the projection.
PursuitResult matching_pursuit(const Vector& v, const Dictionary& dict, const PursuitOptions& options = {});
PursuitResult matching_pursuit(const Vector& v, const VocabTable& vocab, const PursuitOptions& options = {});

struct TokenMapPatch {
  std::size_t index = 0;
  PursuitResult result;
  std::vector<bool> recognized;  // per step
};

struct TokenMap {
  std::vector<TokenMapPatch> patches;
};

// Strips tokenizer word markers ("▁", "Ġ", "##") and lowercases.
std::string display_token(const std::string& token);

TokenMap tokenmap_serial(const DenseMatrix& v, const VocabTable& vocab, const PursuitOptions& options,
                         const std::unordered_set<std::string>& wordlist = {});
// Patches are decomposed in parallel; output order and values match the
// serial version exactly.
TokenMap tokenmap(const DenseMatrix& v, const VocabTable& vocab, const PursuitOptions& options,
                  const std::unordered_set<std::string>& wordlist = {});

nlohmann::ordered_json to_json(const TokenMap& map, const VocabTable& vocab);

// One row per (iteration, patch): iteration,patch,token,alpha,cosine.
std::string cosine_maps_csv(const TokenMap& map, const VocabTable& vocab);

}  // namespace projlens
