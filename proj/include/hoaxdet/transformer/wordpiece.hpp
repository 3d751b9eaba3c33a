#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hoaxdet/text/pipeline.hpp"
#include "hoaxdet/transformer/config.hpp"

namespace hoaxdet::tfm {

/// Subword inventory. Ids 0-4 are [PAD] [UNK] [CLS] [SEP] [MASK]; pieces
/// that continue a word carry a "##" prefix.
class WordPieceVocab {
 public:
  WordPieceVocab();

  static WordPieceVocab from_pieces(std::vector<std::string> pieces);
  static WordPieceVocab load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  std::string serialize() const;  // one piece per line

  std::int32_t id(const std::string& piece) const;  // [UNK] when absent
  bool contains(const std::string& piece) const { return index_.contains(piece); }
  const std::string& piece(std::int32_t id) const { return pieces_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return pieces_.size(); }
  const std::vector<std::string>& pieces() const { return pieces_; }

  /// Appends a piece; returns false when it was already present.
  bool add(const std::string& piece);

  bool operator==(const WordPieceVocab& other) const { return pieces_ == other.pieces_; }

 private:
  std::vector<std::string> pieces_;
  std::unordered_map<std::string, std::int32_t> index_;
};

inline constexpr const char* kSpecialPieces[] = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"};

/// Builds a vocabulary from normalized word lists: specials, every character
/// seen (bare, and "##"-prefixed where it occurs inside a word), then merged
/// pieces in order of pair frequency until `target_size` is reached. Ties go
/// to the lexicographically smaller merged text, compared without the "##"
/// marker first.
WordPieceVocab train_wordpiece_vocab(std::span<const text::TokenList> corpus, std::size_t target_size);

/// Greedy longest-match-first segmentation of a single word.
std::vector<std::string> wordpiece_tokenize(const std::string& word, const WordPieceVocab& vocab);

/// Ids of every piece of every word, in order.
std::vector<std::int32_t> wordpiece_encode(const text::TokenList& words, const WordPieceVocab& vocab);

}  // namespace hoaxdet::tfm
