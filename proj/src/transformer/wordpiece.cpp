#include "hoaxdet/transformer/wordpiece.hpp"

#include <fstream>
#include <map>
#include <set>

namespace hoaxdet::tfm {

namespace {

constexpr std::string_view kContinuation = "##";

// Byte offsets of UTF-8 code point starts, plus the end offset.
std::vector<std::size_t> char_boundaries(const std::string& word) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if ((static_cast<unsigned char>(word[i]) & 0xC0) != 0x80) out.push_back(i);
  }
  out.push_back(word.size());
  return out;
}

std::string bare(const std::string& piece) {
  return piece.starts_with(kContinuation) ? piece.substr(kContinuation.size()) : piece;
}

}  // namespace

WordPieceVocab::WordPieceVocab() {
  for (const char* s : kSpecialPieces) add(s);
}

bool WordPieceVocab::add(const std::string& piece) {
  if (!index_.emplace(piece, static_cast<std::int32_t>(pieces_.size())).second) return false;
  pieces_.push_back(piece);
  return true;
}

std::int32_t WordPieceVocab::id(const std::string& piece) const {
  const auto it = index_.find(piece);
  return it == index_.end() ? SpecialTokens::unk : it->second;
}

WordPieceVocab WordPieceVocab::from_pieces(std::vector<std::string> pieces) {
  if (pieces.size() < SpecialTokens::count) throw ParseError("subword vocabulary lacks special tokens");
  for (std::size_t i = 0; i < SpecialTokens::count; ++i) {
    if (pieces[i] != kSpecialPieces[i]) {
      throw ParseError("expected special token " + std::string(kSpecialPieces[i]), static_cast<long>(i + 1));
    }
  }
  WordPieceVocab vocab;
  for (std::size_t i = SpecialTokens::count; i < pieces.size(); ++i) {
    if (!vocab.add(pieces[i])) throw ParseError("duplicate piece '" + pieces[i] + "'", static_cast<long>(i + 1));
  }
  return vocab;
}

WordPieceVocab WordPieceVocab::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ResourceError("cannot read subword vocabulary " + path.string());
  std::vector<std::string> pieces;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pieces.push_back(line);
  }
  return from_pieces(std::move(pieces));
}

std::string WordPieceVocab::serialize() const {
  std::string out;
  for (const auto& p : pieces_) {
    out += p;
    out += '\n';
  }
  return out;
}

void WordPieceVocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ResourceError("cannot write subword vocabulary " + path.string());
  out << serialize();
}

WordPieceVocab train_wordpiece_vocab(std::span<const text::TokenList> corpus, std::size_t target_size) {
  std::map<std::string, std::size_t> word_counts;
  for (const auto& doc : corpus) {
    for (const auto& w : doc) ++word_counts[w];
  }

  std::vector<std::vector<std::string>> words;
  std::vector<std::size_t> counts;
  std::set<std::string> initial, inner;
  for (const auto& [word, n] : word_counts) {
    const auto cuts = char_boundaries(word);
    std::vector<std::string> pieces;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      std::string ch = word.substr(cuts[c], cuts[c + 1] - cuts[c]);
      if (c == 0) {
        initial.insert(ch);
        pieces.push_back(ch);
      } else {
        inner.insert(ch);
        pieces.push_back(std::string(kContinuation) + ch);
      }
    }
    words.push_back(std::move(pieces));
    counts.push_back(n);
  }

  WordPieceVocab vocab;
  std::set<std::string> all_chars = initial;
  all_chars.insert(inner.begin(), inner.end());
  for (const auto& ch : all_chars) vocab.add(ch);
  for (const auto& ch : inner) vocab.add(std::string(kContinuation) + ch);
  if (target_size < vocab.size()) {
    throw ConfigError("target size " + std::to_string(target_size) + " is below the " + std::to_string(vocab.size()) +
                      " specials and characters");
  }

  while (vocab.size() < target_size) {
    std::map<std::pair<std::string, std::string>, std::size_t> pairs;
    for (std::size_t w = 0; w < words.size(); ++w) {
      for (std::size_t i = 0; i + 1 < words[w].size(); ++i) pairs[{words[w][i], words[w][i + 1]}] += counts[w];
    }
    if (pairs.empty()) break;

    const std::pair<std::string, std::string>* best = nullptr;
    std::size_t best_count = 0;
    std::string best_merged;
    for (const auto& [pair, n] : pairs) {
      std::string merged = pair.first + bare(pair.second);
      const bool better = n > best_count || (n == best_count && (bare(merged) < bare(best_merged) ||
                                                                 (bare(merged) == bare(best_merged) && merged < best_merged)));
      if (!best || better) {
        best = &pair;
        best_count = n;
        best_merged = std::move(merged);
      }
    }
    const auto [left, right] = *best;
    for (auto& pieces : words) {
      std::vector<std::string> next;
      next.reserve(pieces.size());
      for (std::size_t i = 0; i < pieces.size(); ++i) {
        if (i + 1 < pieces.size() && pieces[i] == left && pieces[i + 1] == right) {
          next.push_back(best_merged);
          ++i;
        } else {
          next.push_back(std::move(pieces[i]));
        }
      }
      pieces = std::move(next);
    }
    vocab.add(best_merged);
  }
  return vocab;
}

std::vector<std::string> wordpiece_tokenize(const std::string& word, const WordPieceVocab& vocab) {
  constexpr std::size_t kMaxWordChars = 100;
  const auto cuts = char_boundaries(word);
  if (word.empty()) return {};
  if (cuts.size() - 1 > kMaxWordChars) return {kSpecialPieces[SpecialTokens::unk]};
  std::vector<std::string> out;
  std::size_t start = 0;  // index into cuts
  while (start + 1 < cuts.size()) {
    std::size_t end = cuts.size() - 1;
    std::string found;
    while (end > start) {
      std::string candidate = word.substr(cuts[start], cuts[end] - cuts[start]);
      if (start > 0) candidate = std::string(kContinuation) + candidate;
      if (vocab.contains(candidate)) {
        found = std::move(candidate);
        break;
      }
      --end;
    }
    if (found.empty()) return {kSpecialPieces[SpecialTokens::unk]};
    out.push_back(std::move(found));
    start = end;
  }
  return out;
}

std::vector<std::int32_t> wordpiece_encode(const text::TokenList& words, const WordPieceVocab& vocab) {
  std::vector<std::int32_t> ids;
  for (const auto& w : words) {
    for (const auto& p : wordpiece_tokenize(w, vocab)) ids.push_back(vocab.id(p));
  }
  return ids;
}

}  // namespace hoaxdet::tfm
