#pragma once

#include "projlens/matrix.hpp"
#include "projlens/vocab.hpp"

#include <json.hpp>

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace projlens {

// Deterministic stand-in for an LLM tokenizer: labels are split on
// whitespace, then each word is consumed by greedy longest match over the
// vocabulary strings.
struct TokenizerSpec {
  bool lowercase = true;
  // When set, `word_prefix` is prepended to every word before matching
  // (SentencePiece-style "▁word" pieces).
  bool space_prefix = false;
  std::string word_prefix = "\xE2\x96\x81";
};

// Pre-tokenised label -> token ids, taking precedence over the tokenizer.
using TokenOverrides = std::unordered_map<std::string, std::vector<std::size_t>>;

TokenOverrides parse_token_overrides(std::string_view json_text);

class Tokenizer {
 public:
  Tokenizer(const VocabTable& vocab, TokenizerSpec spec = {});

  std::vector<std::size_t> tokenize(std::string_view label) const;
  const TokenizerSpec& spec() const { return spec_; }

 private:
  std::string normalize(std::string_view s) const;

  TokenizerSpec spec_;
  std::unordered_map<std::string, std::size_t> lookup_;
  std::size_t max_len_ = 0;
};

std::vector<std::size_t> tokenize(std::string_view label, const VocabTable& vocab, const TokenizerSpec& spec = {});

struct TextEmbedding {
  std::string label;
  std::vector<std::size_t> token_ids;
  Vector vector;
};

// Mean of the vocabulary rows for `ids`.
Vector mean_embedding(std::span<const std::size_t> ids, const VocabTable& vocab);

TextEmbedding label_embedding(std::string_view label, const VocabTable& vocab, const TokenizerSpec& spec = {},
                              const TokenOverrides* overrides = nullptr);
TextEmbedding label_embedding(std::string_view label, const VocabTable& vocab, const Tokenizer& tokenizer,
                              const TokenOverrides* overrides = nullptr);

}  // namespace projlens
