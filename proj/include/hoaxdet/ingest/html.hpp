#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace hoaxdet::ingest {

struct HtmlNode {
  std::string tag;  // lowercase; empty for text nodes
  std::map<std::string, std::string> attributes;
  std::string text;  // text nodes only, entities decoded
  std::vector<std::unique_ptr<HtmlNode>> children;
  HtmlNode* parent = nullptr;

  bool is_text() const { return tag.empty(); }
  std::string attribute(const std::string& name) const;
  bool has_class(std::string_view name) const;
};

/// Forgiving tree builder: unknown or unbalanced end tags are ignored, void
/// elements never take children, and script/style bodies are kept raw.
class HtmlDocument {
 public:
  static HtmlDocument parse(std::string_view html);

  const HtmlNode& root() const { return *root_; }

  /// Matches a selector list: comma-separated groups of descendant-combined
  /// compound selectors built from `tag`, `.class`, `#id` and `*`.
  std::vector<const HtmlNode*> select(std::string_view selector) const;

 private:
  std::unique_ptr<HtmlNode> root_;
};

/// Visible text under `node` with whitespace collapsed; script, style and
/// noscript content is dropped.
std::string text_content(const HtmlNode& node);

std::string decode_entities(std::string_view text);

struct SelectorConfig {
  std::string headline = "h1.entry-title";
  std::string body = "div.entry-content p";
  std::string category = "span.cat-links a";
  std::string article_link = "h2.entry-title a";

  nlohmann::json to_json() const;
  static SelectorConfig from_json(const nlohmann::json& j);
};

struct ParsedArticle {
  std::string headline;
  std::string body;  // paragraphs joined by "\n"
  std::string category;

  bool operator==(const ParsedArticle&) const = default;
};

/// Throws ParseError naming "headline" or "body" when either is missing or
/// empty. A missing category yields an empty string.
ParsedArticle parse_article_html(std::string_view html, const SelectorConfig& selectors);

/// href values of the article links on a category index page, in order,
/// without duplicates.
std::vector<std::string> parse_index_links(std::string_view html, const SelectorConfig& selectors);

}  // namespace hoaxdet::ingest
