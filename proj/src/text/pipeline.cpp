#include "hoaxdet/text/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "hoaxdet/core/errors.hpp"
#include "hoaxdet/text/article.hpp"

namespace hoaxdet {

std::string_view to_string(Label label) { return label == Label::fake ? "fake" : "valid"; }

std::string_view to_string(Source source) {
  switch (source) {
    case Source::mendeley:
      return "mendeley";
    case Source::github:
      return "github";
    case Source::turnbackhoax:
      return "turnbackhoax";
  }
  return "unknown";
}

std::optional<Label> parse_label(std::string_view text) {
  if (text == "valid") return Label::valid;
  if (text == "fake") return Label::fake;
  return std::nullopt;
}

std::optional<Source> parse_source(std::string_view text) {
  if (text == "mendeley") return Source::mendeley;
  if (text == "github") return Source::github;
  if (text == "turnbackhoax") return Source::turnbackhoax;
  return std::nullopt;
}

}  // namespace hoaxdet

namespace hoaxdet::text {

namespace {

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool starts_with_ci(std::string_view s, std::size_t at, std::string_view prefix) {
  if (s.size() - at < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    const auto c = static_cast<unsigned char>(s[at + i]);
    if (std::tolower(c) != prefix[i]) return false;
  }
  return true;
}

std::string strip_urls(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  std::size_t i = 0;
  while (i < raw.size()) {
    const bool token_start = i == 0 || is_space(static_cast<unsigned char>(raw[i - 1])) ||
                             !std::isalnum(static_cast<unsigned char>(raw[i - 1]));
    if (token_start && (starts_with_ci(raw, i, "http://") || starts_with_ci(raw, i, "https://") ||
                        starts_with_ci(raw, i, "www."))) {
      while (i < raw.size() && !is_space(static_cast<unsigned char>(raw[i]))) ++i;
      out.push_back(' ');
      continue;
    }
    out.push_back(raw[i++]);
  }
  return out;
}

// Decodes one UTF-8 code point; returns 0xFFFD and advances one byte on
// malformed input.
char32_t next_code_point(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> int {
    if (i + k >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[i + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  if ((b0 & 0xE0) == 0xC0) {
    const int c1 = cont(1);
    if (c1 >= 0) {
      i += 2;
      return static_cast<char32_t>(((b0 & 0x1F) << 6) | c1);
    }
  } else if ((b0 & 0xF0) == 0xE0) {
    const int c1 = cont(1), c2 = cont(2);
    if (c1 >= 0 && c2 >= 0) {
      i += 3;
      return static_cast<char32_t>(((b0 & 0x0F) << 12) | (c1 << 6) | c2);
    }
  } else if ((b0 & 0xF8) == 0xF0) {
    const int c1 = cont(1), c2 = cont(2), c3 = cont(3);
    if (c1 >= 0 && c2 >= 0 && c3 >= 0) {
      i += 4;
      return static_cast<char32_t>(((b0 & 0x07) << 18) | (c1 << 12) | (c2 << 6) | c3);
    }
  }
  ++i;
  return 0xFFFD;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_letter(char32_t cp) {
  if (cp >= 'a' && cp <= 'z') return true;
  if (cp >= 0xC0 && cp <= 0xFF) return cp != 0xD7 && cp != 0xF7;
  return cp >= 0x100 && cp <= 0x17F;
}

char32_t to_lower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  if (cp >= 0x100 && cp <= 0x17F && cp % 2 == 0) return cp + 1;
  return cp;
}

}  // namespace

std::string normalize_text(std::string_view raw) {
  const std::string no_urls = strip_urls(raw);
  std::string out;
  out.reserve(no_urls.size());
  bool pending_space = false;
  std::size_t i = 0;
  while (i < no_urls.size()) {
    const char32_t cp = to_lower(next_code_point(no_urls, i));
    if (!is_letter(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    append_utf8(out, cp);
  }
  return out;
}

TokenList tokenize(std::string_view normalized) {
  TokenList tokens;
  if (normalized.empty()) return tokens;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = normalized.find(' ', start);
    const std::string_view piece = normalized.substr(start, end == std::string_view::npos ? end : end - start);
    if (piece.empty()) throw ContractError("tokenize: input must be normalized (empty token)");
    if (std::any_of(piece.begin(), piece.end(), [](char c) { return c >= 'A' && c <= 'Z'; })) {
      throw ContractError("tokenize: input must be normalized (uppercase letters)");
    }
    tokens.emplace_back(piece);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return tokens;
}

StopwordList StopwordList::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ResourceError("cannot read stopword list " + path.string());
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    words.insert(line.substr(first, last - first + 1));
  }
  return StopwordList(std::move(words));
}

std::filesystem::path StopwordList::bundled_path() {
  return std::filesystem::path(HOAXDET_DATA_DIR) / "stopwords-id.txt";
}

StopwordList StopwordList::bundled() { return load(bundled_path()); }

TokenList remove_stopwords(const TokenList& tokens, const StopwordList& stoplist) {
  TokenList kept;
  kept.reserve(tokens.size());
  std::copy_if(tokens.begin(), tokens.end(), std::back_inserter(kept),
               [&](const std::string& t) { return !stoplist.contains(t); });
  return kept;
}

TokenList preprocess(std::string_view raw, const StopwordList& stoplist) {
  return remove_stopwords(tokenize(normalize_text(raw)), stoplist);
}

Vocabulary::Vocabulary() : tokens_{std::string(kPadToken), std::string(kOovToken)} {
  index_.emplace(tokens_[0], kPadId);
  index_.emplace(tokens_[1], kOovId);
}

Vocabulary Vocabulary::build(std::span<const TokenList> corpus, std::size_t min_count) {
  if (corpus.empty()) throw ContractError("build_vocab: empty corpus");
  std::unordered_map<std::string, std::size_t> freq;
  for (const auto& doc : corpus) {
    for (const auto& tok : doc) ++freq[tok];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [tok, n] : freq) {
    if (n >= min_count && tok != kPadToken && tok != kOovToken) ranked.emplace_back(tok, n);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  Vocabulary vocab;
  vocab.min_count_ = min_count;
  for (auto& [tok, n] : ranked) {
    vocab.index_.emplace(tok, static_cast<TokenId>(vocab.tokens_.size()));
    vocab.tokens_.push_back(tok);
  }
  return vocab;
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < 2 || tokens[0] != kPadToken || tokens[1] != kOovToken) {
    throw ParseError("vocabulary must start with <PAD> and <OOV>");
  }
  Vocabulary vocab;
  for (std::size_t i = 2; i < tokens.size(); ++i) {
    if (!vocab.index_.emplace(tokens[i], static_cast<TokenId>(vocab.tokens_.size())).second) {
      throw ParseError("duplicate vocabulary token '" + tokens[i] + "'", static_cast<long>(i + 1));
    }
    vocab.tokens_.push_back(std::move(tokens[i]));
  }
  return vocab;
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ResourceError("cannot read vocabulary " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return from_tokens(std::move(tokens));
}

std::string Vocabulary::serialize() const {
  std::string out;
  for (const auto& t : tokens_) {
    out += t;
    out += '\n';
  }
  return out;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ResourceError("cannot write vocabulary " + path.string());
  out << serialize();
}

TokenId Vocabulary::id(const std::string& token) const {
  const auto it = index_.find(token);
  return it == index_.end() ? kOovId : it->second;
}

EncodedSequence encode_pad(const TokenList& tokens, const Vocabulary& vocab, std::size_t length) {
  EncodedSequence seq;
  seq.ids.assign(length, kPadId);
  seq.true_length = std::min(tokens.size(), length);
  for (std::size_t i = 0; i < seq.true_length; ++i) seq.ids[i] = vocab.id(tokens[i]);
  return seq;
}

TokenList decode(const EncodedSequence& seq, const Vocabulary& vocab) {
  TokenList out;
  for (std::size_t i = 0; i < seq.true_length; ++i) out.push_back(vocab.token(seq.ids[i]));
  return out;
}

}  // namespace hoaxdet::text
