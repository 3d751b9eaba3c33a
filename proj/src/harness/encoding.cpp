#include "hoaxdet/harness/encoding.hpp"

#include "hoaxdet/transformer/model.hpp"

namespace hoaxdet::harness {

ArticleEncoder ArticleEncoder::for_model(const zoo::Classifier& model) {
  ArticleEncoder enc;
  enc.length_ = model.input_length();
  if (model.kind() == zoo::ModelKind::transformer) {
    enc.pieces_ = std::make_shared<const tfm::WordPieceVocab>(tfm::WordPieceVocab::from_pieces(model.vocabulary_tokens()));
  } else {
    enc.words_ = std::make_shared<const text::Vocabulary>(text::Vocabulary::from_tokens(model.vocabulary_tokens()));
    enc.stopwords_ = std::make_shared<const text::StopwordList>(text::StopwordList::bundled());
  }
  return enc;
}

std::vector<ad::TokenId> ArticleEncoder::encode(std::string_view raw_text) const {
  if (pieces_) return tfm::encode_for_classification(raw_text, *pieces_, length_);
  return text::encode_pad(text::preprocess(raw_text, *stopwords_), *words_, length_).ids;
}

LabeledSet encode_records(const ArticleEncoder& encoder, std::span<const RawArticle> records,
                          std::span<const std::size_t> indices) {
  LabeledSet out;
  auto push = [&](std::size_t i) {
    if (i >= records.size()) {
      throw OutOfRangeError("record index " + std::to_string(i) + " outside a corpus of " +
                            std::to_string(records.size()));
    }
    out.push_back({encoder.encode(records[i]), records[i].label});
  };
  if (indices.empty()) {
    for (std::size_t i = 0; i < records.size(); ++i) push(i);
  } else {
    for (const auto i : indices) push(i);
  }
  return out;
}

}  // namespace hoaxdet::harness
