#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hoaxdet/core/ops.hpp"

namespace hoaxdet::text {

using TokenId = ad::TokenId;
using TokenList = std::vector<std::string>;

inline constexpr std::size_t kSequenceLength = 1000;
inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kOovId = 1;
inline constexpr std::string_view kPadToken = "<PAD>";
inline constexpr std::string_view kOovToken = "<OOV>";

/// Cleaning pass: strip URLs, lowercase, replace every non-letter with a
/// space, collapse whitespace and trim. Letters are ASCII a-z plus the Latin-1
/// and Latin Extended-A letter ranges. Idempotent.
std::string normalize_text(std::string_view raw);

/// Splits normalized text on single spaces. Throws ContractError when the
/// input is not normalized (empty tokens, uppercase ASCII).
TokenList tokenize(std::string_view normalized);

class StopwordList {
 public:
  StopwordList() = default;
  explicit StopwordList(std::unordered_set<std::string> words) : words_(std::move(words)) {}

  /// One word per line, UTF-8, '#' starts a comment. Throws ResourceError when
  /// the file cannot be read.
  static StopwordList load(const std::filesystem::path& path);

  /// The Indonesian list shipped under data/.
  static StopwordList bundled();
  static std::filesystem::path bundled_path();

  bool contains(const std::string& word) const { return words_.contains(word); }
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

TokenList remove_stopwords(const TokenList& tokens, const StopwordList& stoplist);

/// normalize -> tokenize -> remove_stopwords.
TokenList preprocess(std::string_view raw, const StopwordList& stoplist);

/// Dense token index with PAD = 0 and OOV = 1.
class Vocabulary {
 public:
  Vocabulary();

  /// Tokens with frequency >= min_count, ordered by descending frequency and
  /// then lexicographically, take ids 2.. V-1.
  static Vocabulary build(std::span<const TokenList> corpus, std::size_t min_count = 1);

  static Vocabulary from_tokens(std::vector<std::string> tokens);
  static Vocabulary load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  std::string serialize() const;

  TokenId id(const std::string& token) const;
  bool contains(const std::string& token) const { return index_.contains(token); }
  const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t min_count() const { return min_count_; }

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  std::size_t min_count_ = 1;
};

struct EncodedSequence {
  std::vector<TokenId> ids;
  std::size_t true_length = 0;
};

/// Maps tokens to ids (unknown -> OOV), keeps the first `length` tokens and
/// right-pads with PAD.
EncodedSequence encode_pad(const TokenList& tokens, const Vocabulary& vocab, std::size_t length = kSequenceLength);

TokenList decode(const EncodedSequence& seq, const Vocabulary& vocab);

}  // namespace hoaxdet::text
