#pragma once

#include "projlens/matrix.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace projlens {

// LLM input word embeddings W, one row per token string.
class VocabTable {
 public:
  VocabTable() = default;
  VocabTable(std::vector<std::string> tokens, DenseMatrix embeddings, bool unit_normalized = false);

  std::size_t size() const { return tokens_.size(); }
  std::size_t dim() const { return embeddings_.cols(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  const DenseMatrix& embeddings() const { return embeddings_; }
  auto row(std::size_t id) const { return embeddings_.values.row(static_cast<Eigen::Index>(id)); }
  bool unit_normalized() const { return unit_normalized_; }

  std::optional<std::size_t> find(std::string_view token) const;

  // Copy with every row scaled to unit L2 norm. Throws ZeroNorm on a zero row.
  VocabTable normalized() const;

 private:
  std::vector<std::string> tokens_;
  DenseMatrix embeddings_;
  bool unit_normalized_ = false;
  std::unordered_map<std::string, std::size_t> index_;
};

// Tokens are one per line (LF separated, a trailing newline is optional).
std::vector<std::string> parse_token_lines(std::string_view text);

VocabTable load_vocab(const std::filesystem::path& embeddings_path, const std::filesystem::path& tokens_path);
void save_vocab(const VocabTable& vocab, const std::filesystem::path& embeddings_path,
                const std::filesystem::path& tokens_path);

}  // namespace projlens
