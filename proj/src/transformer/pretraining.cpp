#include "hoaxdet/transformer/pretraining.hpp"

#include <algorithm>

#include "hoaxdet/text/pipeline.hpp"

namespace hoaxdet::tfm {

MaskedIds mask_for_mlm(const IdList& ids, double rate, Rng& rng) {
  if (rate < 0 || rate > 1) throw ConfigError("mask rate must lie in [0, 1]");
  MaskedIds out{ids, {}, {}};
  bool eligible = false;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (SpecialTokens::is_special(ids[i])) continue;
    eligible = true;
    if (rng.bernoulli(rate)) {
      out.positions.push_back(i);
      out.originals.push_back(ids[i]);
      out.ids[i] = SpecialTokens::mask;
    }
  }
  if (!eligible) throw ContractError("mask_for_mlm: no non-special positions");
  return out;
}

std::vector<SentencePair> build_nsp_pairs(const std::vector<SentenceList>& documents, std::size_t count, Rng& rng) {
  if (documents.size() < 2) throw ContractError("build_nsp_pairs: need at least two documents");
  std::vector<std::pair<std::size_t, std::size_t>> anchors;
  for (std::size_t d = 0; d < documents.size(); ++d) {
    if (documents[d].empty()) throw ContractError("build_nsp_pairs: document " + std::to_string(d) + " is empty");
    for (std::size_t s = 0; s + 1 < documents[d].size(); ++s) anchors.emplace_back(d, s);
  }
  if (anchors.empty()) throw ContractError("build_nsp_pairs: no document has two sentences");

  std::vector<SentencePair> pairs;
  pairs.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    const auto [doc, sent] = anchors[rng.uniform_int(anchors.size())];
    SentencePair pair;
    pair.first = documents[doc][sent];
    pair.first_document = doc;
    pair.is_next = rng.bernoulli(0.5);
    if (pair.is_next) {
      pair.second = documents[doc][sent + 1];
      pair.second_document = doc;
    } else {
      std::size_t other = rng.uniform_int(documents.size() - 1);
      if (other >= doc) ++other;
      const auto& sentences = documents[other];
      pair.second = sentences[rng.uniform_int(sentences.size())];
      pair.second_document = other;
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

PretrainExample make_pretrain_example(const SentencePair& pair, std::size_t max_seq, double mask_rate, Rng& rng) {
  if (max_seq < 5) throw ConfigError("max sequence too short for a sentence pair");
  IdList a = pair.first, b = pair.second;
  while (a.size() + b.size() + 3 > max_seq) {
    (a.size() >= b.size() ? a : b).pop_back();
  }
  PretrainExample ex;
  ex.is_next = pair.is_next;
  ex.ids.push_back(SpecialTokens::cls);
  ex.ids.insert(ex.ids.end(), a.begin(), a.end());
  ex.ids.push_back(SpecialTokens::sep);
  ex.segments.assign(ex.ids.size(), 0);
  ex.ids.insert(ex.ids.end(), b.begin(), b.end());
  ex.ids.push_back(SpecialTokens::sep);
  ex.segments.resize(ex.ids.size(), 1);

  const bool has_content = std::any_of(ex.ids.begin(), ex.ids.end(), [](auto id) { return !SpecialTokens::is_special(id); });
  if (has_content) {
    auto masked = mask_for_mlm(ex.ids, mask_rate, rng);
    ex.ids = std::move(masked.ids);
    ex.masked_positions = std::move(masked.positions);
    ex.masked_originals = std::move(masked.originals);
  }
  return ex;
}

std::vector<std::string> split_sentences(std::string_view raw) {
  auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
  std::vector<std::string> out;
  auto emit = [&](std::size_t from, std::size_t to) {
    while (from < to && is_ws(raw[from])) ++from;
    while (to > from && is_ws(raw[to - 1])) --to;
    if (from < to) out.emplace_back(raw.substr(from, to - from));
  };
  std::size_t start = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const char c = raw[i];
    if ((c == '.' || c == '?' || c == '!') && (i + 1 == raw.size() || is_ws(raw[i + 1]))) {
      emit(start, i + 1);
      start = i + 1;
    }
  }
  emit(start, raw.size());
  return out;
}

SentenceList prepare_document(std::string_view raw, const WordPieceVocab& vocab, std::size_t min_words) {
  SentenceList out;
  for (const auto& sentence : split_sentences(raw)) {
    const auto words = text::tokenize(text::normalize_text(sentence));
    if (words.size() < min_words) continue;
    out.push_back(wordpiece_encode(words, vocab));
  }
  return out;
}

}  // namespace hoaxdet::tfm
