#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hoaxdet/core/rng.hpp"
#include "hoaxdet/transformer/wordpiece.hpp"

namespace hoaxdet::tfm {

using IdList = std::vector<std::int32_t>;
using SentenceList = std::vector<IdList>;

struct MaskedIds {
  IdList ids;                        // with [MASK] substituted
  std::vector<std::size_t> positions;
  IdList originals;                  // ids at `positions` before masking
};

inline constexpr double kMaskRate = 0.15;

/// Selects each non-special position independently with probability `rate`
/// and replaces it with [MASK]. Throws ContractError when no position is
/// eligible.
MaskedIds mask_for_mlm(const IdList& ids, double rate, Rng& rng);

struct SentencePair {
  IdList first;
  IdList second;
  bool is_next = false;
  std::size_t first_document = 0;
  std::size_t second_document = 0;
};

/// Draws `count` pairs. The anchor is a uniformly chosen sentence that has a
/// successor; with probability 0.5 the follower is that successor, otherwise
/// a uniform sentence from a uniformly chosen other document. Throws
/// ContractError with fewer than two documents, an empty document, or no
/// sentence that has a successor.
std::vector<SentencePair> build_nsp_pairs(const std::vector<SentenceList>& documents, std::size_t count, Rng& rng);

struct PretrainExample {
  IdList ids;       // [CLS] A [SEP] B [SEP]
  IdList segments;  // 0 through the first [SEP], then 1
  std::vector<std::size_t> masked_positions;
  IdList masked_originals;
  bool is_next = false;
};

/// Trims the longer sentence from the end until the pair fits `max_seq`,
/// frames it, then masks it.
PretrainExample make_pretrain_example(const SentencePair& pair, std::size_t max_seq, double mask_rate, Rng& rng);

/// Splits on '.', '?' or '!' followed by whitespace (or end of text).
std::vector<std::string> split_sentences(std::string_view raw);

/// Sentence segmentation, normalization and subword encoding of one raw body;
/// sentences with fewer than `min_words` words are dropped.
SentenceList prepare_document(std::string_view raw, const WordPieceVocab& vocab, std::size_t min_words = 3);

}  // namespace hoaxdet::tfm
