#include "projlens/vocab.hpp"

#include "projlens/error.hpp"
#include "projlens/npy.hpp"

#include <cmath>

namespace projlens {

VocabTable::VocabTable(std::vector<std::string> tokens, DenseMatrix embeddings, bool unit_normalized)
    : tokens_(std::move(tokens)), embeddings_(std::move(embeddings)), unit_normalized_(unit_normalized) {
  if (tokens_.size() != embeddings_.rows()) {
    throw Error(Errc::CountMismatch, std::to_string(tokens_.size()) + " tokens but " +
                                         std::to_string(embeddings_.rows()) + " embedding rows");
  }
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    auto [it, inserted] = index_.emplace(tokens_[i], i);
    if (!inserted) {
      // 1-based line numbers, matching the token file.
      throw Error(Errc::DuplicateToken, "token '" + tokens_[i] + "' on lines " + std::to_string(it->second + 1) +
                                            " and " + std::to_string(i + 1));
    }
  }
  if (unit_normalized_) {
    for (Eigen::Index i = 0; i < embeddings_.values.rows(); ++i) {
      if (std::abs(embeddings_.values.row(i).norm() - 1.0) > 1e-6) {
        throw Error(Errc::InvalidArgument, "row " + std::to_string(i) + " is not unit norm");
      }
    }
  }
}

std::optional<std::size_t> VocabTable::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

VocabTable VocabTable::normalized() const {
  RowMatrix unit = embeddings_.values;
  for (Eigen::Index i = 0; i < unit.rows(); ++i) {
    const double n = unit.row(i).norm();
    if (n == 0.0) throw Error(Errc::ZeroNorm, "vocab row " + std::to_string(i) + " ('" + tokens_[i] + "') has zero norm");
    unit.row(i) /= n;
  }
  return VocabTable(tokens_, DenseMatrix(std::move(unit), embeddings_.dtype), true);
}

std::vector<std::string> parse_token_lines(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    tokens.emplace_back(line);
    start = end + 1;
  }
  return tokens;
}

VocabTable load_vocab(const std::filesystem::path& embeddings_path, const std::filesystem::path& tokens_path) {
  auto embeddings = load_matrix(embeddings_path);
  auto tokens = parse_token_lines(read_file(tokens_path));
  return VocabTable(std::move(tokens), std::move(embeddings), false);
}

void save_vocab(const VocabTable& vocab, const std::filesystem::path& embeddings_path,
                const std::filesystem::path& tokens_path) {
  save_matrix(vocab.embeddings(), embeddings_path);
  std::string text;
  for (const auto& t : vocab.tokens()) {
    text += t;
    text += '\n';
  }
  write_file(tokens_path, text);
}

}  // namespace projlens
