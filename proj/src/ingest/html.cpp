#include "hoaxdet/ingest/html.hpp"

#include <algorithm>
#include <set>

#include "hoaxdet/core/errors.hpp"

namespace hoaxdet::ingest {

namespace {

const std::set<std::string, std::less<>> kVoidElements = {"area", "base", "br",   "col",   "embed",  "hr",    "img",
                                                          "input", "link", "meta", "param", "source", "track", "wbr"};
const std::set<std::string, std::less<>> kRawTextElements = {"script", "style"};
const std::set<std::string, std::less<>> kHiddenElements = {"script", "style", "noscript", "template"};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

void append_utf8(std::string& out, unsigned long cp) {
  if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

class Parser {
 public:
  explicit Parser(std::string_view html) : s_(html) {}

  std::unique_ptr<HtmlNode> run() {
    auto root = std::make_unique<HtmlNode>();
    root->tag = "#document";
    current_ = root.get();
    while (i_ < s_.size()) {
      if (s_[i_] == '<') {
        if (s_.compare(i_, 4, "<!--") == 0) {
          skip_past("-->", i_ + 4);
        } else if (i_ + 1 < s_.size() && (s_[i_ + 1] == '!' || s_[i_ + 1] == '?')) {
          skip_past(">", i_ + 1);
        } else if (i_ + 1 < s_.size() && s_[i_ + 1] == '/') {
          end_tag();
        } else if (i_ + 1 < s_.size() && std::isalpha(static_cast<unsigned char>(s_[i_ + 1]))) {
          start_tag();
        } else {
          add_text("<");
          ++i_;
        }
      } else {
        const std::size_t next = s_.find('<', i_);
        const std::size_t end = next == std::string_view::npos ? s_.size() : next;
        add_text(decode_entities(s_.substr(i_, end - i_)));
        i_ = end;
      }
    }
    return root;
  }

 private:
  void skip_past(std::string_view terminator, std::size_t from) {
    const std::size_t at = s_.find(terminator, from);
    i_ = at == std::string_view::npos ? s_.size() : at + terminator.size();
  }

  void add_text(std::string text) {
    if (text.empty()) return;
    if (!current_->children.empty() && current_->children.back()->is_text()) {
      current_->children.back()->text += text;
      return;
    }
    auto node = std::make_unique<HtmlNode>();
    node->text = std::move(text);
    node->parent = current_;
    current_->children.push_back(std::move(node));
  }

  std::string read_name() {
    const std::size_t start = i_;
    while (i_ < s_.size() && !is_space(s_[i_]) && s_[i_] != '>' && s_[i_] != '/' && s_[i_] != '=') ++i_;
    return lower(s_.substr(start, i_ - start));
  }

  void skip_space() {
    while (i_ < s_.size() && is_space(s_[i_])) ++i_;
  }

  void start_tag() {
    ++i_;
    auto node = std::make_unique<HtmlNode>();
    node->tag = read_name();
    bool self_closing = false;
    while (i_ < s_.size()) {
      skip_space();
      if (i_ >= s_.size()) break;
      if (s_[i_] == '>') {
        ++i_;
        break;
      }
      if (s_[i_] == '/') {
        self_closing = true;
        ++i_;
        continue;
      }
      std::string name = read_name();
      if (name.empty()) {
        ++i_;
        continue;
      }
      skip_space();
      std::string value;
      if (i_ < s_.size() && s_[i_] == '=') {
        ++i_;
        skip_space();
        if (i_ < s_.size() && (s_[i_] == '"' || s_[i_] == '\'')) {
          const char quote = s_[i_++];
          const std::size_t end = s_.find(quote, i_);
          const std::size_t stop = end == std::string_view::npos ? s_.size() : end;
          value = decode_entities(s_.substr(i_, stop - i_));
          i_ = std::min(s_.size(), stop + 1);
        } else {
          const std::size_t start = i_;
          while (i_ < s_.size() && !is_space(s_[i_]) && s_[i_] != '>') ++i_;
          value = decode_entities(s_.substr(start, i_ - start));
        }
      }
      node->attributes.emplace(std::move(name), std::move(value));
    }

    const std::string tag = node->tag;
    node->parent = current_;
    HtmlNode* raw = node.get();
    current_->children.push_back(std::move(node));
    if (self_closing || kVoidElements.contains(tag)) return;

    if (kRawTextElements.contains(tag)) {
      const std::string closing = "</" + tag;
      std::size_t end = i_;
      while (true) {
        end = s_.find('<', end);
        if (end == std::string_view::npos || lower(s_.substr(end, closing.size())) == closing) break;
        ++end;
      }
      const std::size_t stop = end == std::string_view::npos ? s_.size() : end;
      auto body = std::make_unique<HtmlNode>();
      body->text = std::string(s_.substr(i_, stop - i_));
      body->parent = raw;
      raw->children.push_back(std::move(body));
      i_ = stop;
      if (i_ < s_.size()) skip_past(">", i_);
      return;
    }
    current_ = raw;
  }

  void end_tag() {
    i_ += 2;
    const std::string tag = read_name();
    skip_past(">", i_);
    for (HtmlNode* n = current_; n && n->parent; n = n->parent) {
      if (n->tag == tag) {
        current_ = n->parent;
        return;
      }
    }
  }

  std::string_view s_;
  std::size_t i_ = 0;
  HtmlNode* current_ = nullptr;
};

struct Compound {
  std::string tag;  // empty or "*" for any
  std::string id;
  std::vector<std::string> classes;

  bool matches(const HtmlNode& n) const {
    if (n.is_text() || n.tag == "#document") return false;
    if (!tag.empty() && tag != "*" && n.tag != tag) return false;
    if (!id.empty() && n.attribute("id") != id) return false;
    return std::all_of(classes.begin(), classes.end(), [&](const std::string& c) { return n.has_class(c); });
  }
};

Compound parse_compound(std::string_view s) {
  Compound c;
  std::size_t i = 0;
  auto read = [&] {
    const std::size_t start = i;
    while (i < s.size() && s[i] != '.' && s[i] != '#') ++i;
    return std::string(s.substr(start, i - start));
  };
  c.tag = lower(read());
  while (i < s.size()) {
    const char kind = s[i++];
    std::string name = read();
    if (name.empty()) throw ConfigError("malformed selector '" + std::string(s) + "'");
    if (kind == '.') {
      c.classes.push_back(std::move(name));
    } else {
      c.id = std::move(name);
    }
  }
  return c;
}

std::vector<std::vector<Compound>> parse_selector(std::string_view selector) {
  std::vector<std::vector<Compound>> groups;
  std::size_t start = 0;
  while (start <= selector.size()) {
    std::size_t comma = selector.find(',', start);
    if (comma == std::string_view::npos) comma = selector.size();
    std::vector<Compound> chain;
    std::size_t i = start;
    while (i < comma) {
      while (i < comma && is_space(selector[i])) ++i;
      const std::size_t word = i;
      while (i < comma && !is_space(selector[i])) ++i;
      if (i > word) chain.push_back(parse_compound(selector.substr(word, i - word)));
    }
    if (chain.empty()) throw ConfigError("empty selector in '" + std::string(selector) + "'");
    groups.push_back(std::move(chain));
    start = comma + 1;
  }
  return groups;
}

bool matches_chain(const HtmlNode& node, const std::vector<Compound>& chain) {
  if (!chain.back().matches(node)) return false;
  std::size_t k = chain.size() - 1;
  for (const HtmlNode* a = node.parent; a && k > 0; a = a->parent) {
    if (chain[k - 1].matches(*a)) --k;
  }
  return k == 0;
}

void collect(const HtmlNode& node, const std::vector<std::vector<Compound>>& groups,
             std::vector<const HtmlNode*>& out) {
  for (const auto& chain : groups) {
    if (matches_chain(node, chain)) {
      out.push_back(&node);
      break;
    }
  }
  for (const auto& child : node.children) collect(*child, groups, out);
}

void gather_text(const HtmlNode& node, std::string& out) {
  if (node.is_text()) {
    out += node.text;
    return;
  }
  if (kHiddenElements.contains(node.tag)) return;
  if (node.tag == "br") out.push_back(' ');
  for (const auto& child : node.children) gather_text(*child, out);
  if (node.tag == "p" || node.tag == "div" || node.tag == "li") out.push_back(' ');
}

std::string collapse(std::string_view s) {
  std::string out;
  bool space = false;
  for (const char c : s) {
    if (is_space(c)) {
      space = !out.empty();
    } else {
      if (space) out.push_back(' ');
      space = false;
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace

std::string HtmlNode::attribute(const std::string& name) const {
  const auto it = attributes.find(name);
  return it == attributes.end() ? std::string() : it->second;
}

bool HtmlNode::has_class(std::string_view name) const {
  const std::string classes = attribute("class");
  std::size_t i = 0;
  while (i < classes.size()) {
    while (i < classes.size() && is_space(classes[i])) ++i;
    const std::size_t start = i;
    while (i < classes.size() && !is_space(classes[i])) ++i;
    if (i > start && std::string_view(classes).substr(start, i - start) == name) return true;
  }
  return false;
}

HtmlDocument HtmlDocument::parse(std::string_view html) {
  HtmlDocument doc;
  doc.root_ = Parser(html).run();
  return doc;
}

std::vector<const HtmlNode*> HtmlDocument::select(std::string_view selector) const {
  const auto groups = parse_selector(selector);
  std::vector<const HtmlNode*> out;
  collect(*root_, groups, out);
  return out;
}

std::string text_content(const HtmlNode& node) {
  std::string raw;
  gather_text(node, raw);
  return collapse(raw);
}

std::string decode_entities(std::string_view text) {
  static const std::map<std::string, std::string, std::less<>> named = {
      {"amp", "&"},       {"lt", "<"},        {"gt", ">"},        {"quot", "\""},     {"apos", "'"},
      {"nbsp", " "},      {"ndash", "\xE2\x80\x93"}, {"mdash", "\xE2\x80\x94"}, {"hellip", "\xE2\x80\xA6"},
      {"lsquo", "\xE2\x80\x98"}, {"rsquo", "\xE2\x80\x99"}, {"ldquo", "\xE2\x80\x9C"}, {"rdquo", "\xE2\x80\x9D"}};
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '&') {
      out.push_back(text[i]);
      continue;
    }
    const std::size_t semi = text.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out.push_back('&');
      continue;
    }
    const std::string_view name = text.substr(i + 1, semi - i - 1);
    if (name.size() > 1 && name[0] == '#') {
      const bool hex = name[1] == 'x' || name[1] == 'X';
      const std::string digits(name.substr(hex ? 2 : 1));
      char* end = nullptr;
      const unsigned long cp = std::strtoul(digits.c_str(), &end, hex ? 16 : 10);
      if (!digits.empty() && end && *end == '\0') {
        append_utf8(out, cp);
        i = semi;
        continue;
      }
    } else if (const auto it = named.find(name); it != named.end()) {
      out += it->second;
      i = semi;
      continue;
    }
    out.push_back('&');
  }
  return out;
}

nlohmann::json SelectorConfig::to_json() const {
  return {{"headline", headline}, {"body", body}, {"category", category}, {"article_link", article_link}};
}

SelectorConfig SelectorConfig::from_json(const nlohmann::json& j) {
  SelectorConfig c;
  c.headline = j.value("headline", c.headline);
  c.body = j.value("body", c.body);
  c.category = j.value("category", c.category);
  c.article_link = j.value("article_link", c.article_link);
  return c;
}

ParsedArticle parse_article_html(std::string_view html, const SelectorConfig& selectors) {
  const auto doc = HtmlDocument::parse(html);
  ParsedArticle out;
  const auto titles = doc.select(selectors.headline);
  if (!titles.empty()) out.headline = text_content(*titles.front());
  if (out.headline.empty()) throw ParseError("headline");

  std::vector<std::string> paragraphs;
  for (const auto* p : doc.select(selectors.body)) {
    std::string t = text_content(*p);
    if (!t.empty()) paragraphs.push_back(std::move(t));
  }
  for (std::size_t i = 0; i < paragraphs.size(); ++i) {
    if (i) out.body.push_back('\n');
    out.body += paragraphs[i];
  }
  if (out.body.empty()) throw ParseError("body");

  const auto categories = doc.select(selectors.category);
  if (!categories.empty()) out.category = text_content(*categories.front());
  return out;
}

std::vector<std::string> parse_index_links(std::string_view html, const SelectorConfig& selectors) {
  const auto doc = HtmlDocument::parse(html);
  std::vector<std::string> links;
  for (const auto* a : doc.select(selectors.article_link)) {
    std::string href = a->attribute("href");
    if (!href.empty() && std::find(links.begin(), links.end(), href) == links.end()) links.push_back(std::move(href));
  }
  return links;
}

}  // namespace hoaxdet::ingest
