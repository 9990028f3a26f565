#include "projlens/text_embed.hpp"

#include "projlens/error.hpp"

#include <cctype>

namespace projlens {
namespace {

std::vector<std::string_view> split_words(std::string_view s) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) words.push_back(s.substr(i, j - i));
    i = j;
  }
  return words;
}

}  // namespace

TokenOverrides parse_token_overrides(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::ParseError, std::string("token override file: ") + e.what());
  }
  if (!doc.is_object()) throw Error(Errc::ParseError, "token override file must map label -> [token ids]");
  TokenOverrides out;
  for (const auto& [label, ids] : doc.items()) {
    if (!ids.is_array() || ids.empty()) throw Error(Errc::ParseError, "override for '" + label + "' must be a non-empty id list");
    std::vector<std::size_t> v;
    for (const auto& id : ids) {
      if (!id.is_number_unsigned()) throw Error(Errc::ParseError, "override for '" + label + "' has a non-integer id");
      v.push_back(id.get<std::size_t>());
    }
    out.emplace(label, std::move(v));
  }
  return out;
}

Tokenizer::Tokenizer(const VocabTable& vocab, TokenizerSpec spec) : spec_(std::move(spec)) {
  lookup_.reserve(vocab.size());
  for (std::size_t id = 0; id < vocab.size(); ++id) {
    std::string key = normalize(vocab.token(id));
    if (key.empty()) continue;
    max_len_ = std::max(max_len_, key.size());
    lookup_.emplace(std::move(key), id);  // lowest id wins on case-folded collisions
  }
}

std::string Tokenizer::normalize(std::string_view s) const {
  std::string out(s);
  if (spec_.lowercase) {
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::vector<std::size_t> Tokenizer::tokenize(std::string_view label) const {
  const auto words = split_words(label);
  if (words.empty()) throw Error(Errc::InvalidArgument, "empty label");
  std::vector<std::size_t> ids;
  for (auto raw_word : words) {
    std::string word = normalize(raw_word);
    if (spec_.space_prefix) word = normalize(spec_.word_prefix) + word;
    std::size_t pos = 0;
    while (pos < word.size()) {
      std::size_t len = std::min(max_len_, word.size() - pos);
      for (; len > 0; --len) {
        auto it = lookup_.find(word.substr(pos, len));
        if (it != lookup_.end()) {
          ids.push_back(it->second);
          break;
        }
      }
      if (len == 0) {
        throw Error(Errc::UntokenizableSegment, "no vocabulary token matches '" + word.substr(pos) + "' in label '" +
                                                    std::string(label) + "'");
      }
      pos += len;
    }
  }
  return ids;
}

std::vector<std::size_t> tokenize(std::string_view label, const VocabTable& vocab, const TokenizerSpec& spec) {
  return Tokenizer(vocab, spec).tokenize(label);
}

Vector mean_embedding(std::span<const std::size_t> ids, const VocabTable& vocab) {
  if (ids.empty()) throw Error(Errc::InvalidArgument, "cannot average zero token embeddings");
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(vocab.dim()));
  for (auto id : ids) {
    if (id >= vocab.size()) throw Error(Errc::OutOfRange, "token id " + std::to_string(id) + " >= vocab size " + std::to_string(vocab.size()));
    sum += vocab.row(id).transpose();
  }
  return sum / static_cast<double>(ids.size());
}

TextEmbedding label_embedding(std::string_view label, const VocabTable& vocab, const Tokenizer& tokenizer,
                              const TokenOverrides* overrides) {
  TextEmbedding out;
  out.label = std::string(label);
  if (overrides) {
    if (auto it = overrides->find(out.label); it != overrides->end()) out.token_ids = it->second;
  }
  if (out.token_ids.empty()) out.token_ids = tokenizer.tokenize(label);
  out.vector = mean_embedding(out.token_ids, vocab);
  return out;
}

TextEmbedding label_embedding(std::string_view label, const VocabTable& vocab, const TokenizerSpec& spec,
                              const TokenOverrides* overrides) {
  return label_embedding(label, vocab, Tokenizer(vocab, spec), overrides);
}

}  // namespace projlens
