#pragma once

#include <memory>
#include <span>
#include <vector>

#include "hoaxdet/harness/dataset.hpp"
#include "hoaxdet/models/classifier.hpp"
#include "hoaxdet/text/pipeline.hpp"
#include "hoaxdet/transformer/wordpiece.hpp"

namespace hoaxdet::harness {

/// Turns raw articles into the fixed-length id sequences a model consumes.
/// Word-level models use cleaning, stopword removal and head truncation; the
/// transformer uses cleaning and subword pieces framed by [CLS] and [SEP].
class ArticleEncoder {
 public:
  static ArticleEncoder for_model(const zoo::Classifier& model);

  std::vector<ad::TokenId> encode(std::string_view raw_text) const;
  std::vector<ad::TokenId> encode(const RawArticle& article) const { return encode(article_text(article)); }

 private:
  ArticleEncoder() = default;

  std::size_t length_ = 0;
  std::shared_ptr<const text::Vocabulary> words_;
  std::shared_ptr<const text::StopwordList> stopwords_;
  std::shared_ptr<const tfm::WordPieceVocab> pieces_;
};

/// Encodes `records[i]` for every i in `indices` (all records when empty).
LabeledSet encode_records(const ArticleEncoder& encoder, std::span<const RawArticle> records,
                          std::span<const std::size_t> indices = {});

}  // namespace hoaxdet::harness
