#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace hoaxdet {

/// Class label; "fake" is the positive class throughout.
enum class Label { valid = 0, fake = 1 };

enum class Source { mendeley, github, turnbackhoax };

std::string_view to_string(Label label);
std::string_view to_string(Source source);
std::optional<Label> parse_label(std::string_view text);
std::optional<Source> parse_source(std::string_view text);

struct RawArticle {
  Label label = Label::valid;
  std::string headline;
  std::string body;
  Source source = Source::turnbackhoax;
};

/// Headline and body joined by a single space, headline first.
inline std::string article_text(const RawArticle& a) { return a.headline + " " + a.body; }

}  // namespace hoaxdet
