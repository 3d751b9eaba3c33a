#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "hoaxdet/ingest/scraper.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include "hoaxdet/core/errors.hpp"

namespace hoaxdet::ingest {

namespace {

std::string replace_all(std::string s, std::string_view key, std::string_view value) {
  for (std::size_t at = s.find(key); at != std::string::npos; at = s.find(key, at + value.size())) {
    s.replace(at, key.size(), value);
  }
  return s;
}

std::optional<std::string> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

bool retryable(const FetchResponse& r) { return r.status == 0 || r.status == 429 || r.status >= 500; }

std::string describe(const FetchResponse& r) {
  if (r.status == 0) return "transport error: " + (r.error.empty() ? std::string("no response") : r.error);
  return "HTTP status " + std::to_string(r.status);
}

// Page source abstraction shared by live and fixture crawls.
struct PageReader {
  virtual ~PageReader() = default;
  virtual FetchResponse index(int page, int* attempts) = 0;
  virtual FetchResponse article(const std::string& url, int* attempts) = 0;
  virtual std::string index_url(int page) const = 0;
};

struct FixtureReader final : PageReader {
  FixtureReader(std::filesystem::path dir, std::string category) : dir(std::move(dir)), category(std::move(category)) {}

  FetchResponse load(const std::filesystem::path& path, int* attempts) {
    if (attempts) *attempts = 1;
    if (auto body = read_file(path)) return {200, std::move(*body), {}};
    return {404, {}, "missing fixture " + path.string()};
  }
  FetchResponse index(int page, int* attempts) override {
    return load(dir / category / (std::to_string(page) + ".html"), attempts);
  }
  FetchResponse article(const std::string& url, int* attempts) override {
    return load(dir / category / "articles" / (url_slug(url) + ".html"), attempts);
  }
  std::string index_url(int page) const override { return (dir / category / (std::to_string(page) + ".html")).string(); }

  std::filesystem::path dir;
  std::string category;
};

struct LiveReader final : PageReader {
  LiveReader(const SourceConfig& config, std::string category, Fetcher& fetcher, Sleeper sleeper)
      : config(config), category(std::move(category)), client(config, fetcher, std::move(sleeper)) {}

  FetchResponse index(int page, int* attempts) override { return client.get(index_url(page), attempts); }
  FetchResponse article(const std::string& url, int* attempts) override {
    const std::string absolute = url.starts_with("http") ? url : config.base_url + (url.starts_with('/') ? "" : "/") + url;
    return client.get(absolute, attempts);
  }
  std::string index_url(int page) const override {
    std::string url = replace_all(config.index_url_template, "{base}", config.base_url);
    url = replace_all(url, "{category}", category);
    return replace_all(url, "{page}", std::to_string(page));
  }

  const SourceConfig& config;
  std::string category;
  PoliteClient client;
};

}  // namespace

void SourceConfig::validate() const {
  if (categories.empty()) throw ConfigError("source config maps no categories");
  if (max_pages < 1) throw ConfigError("max_pages must be at least 1");
  if (!fixture_mode() && request_interval_ms < 1000) {
    throw ConfigError("request interval " + std::to_string(request_interval_ms) +
                      " ms is below the 1000 ms politeness floor");
  }
  if (request_interval_ms < 0) throw ConfigError("request interval must be non-negative");
}

nlohmann::json SourceConfig::to_json() const {
  nlohmann::json cats = nlohmann::json::object();
  for (const auto& [name, label] : categories) cats[name] = std::string(to_string(label));
  nlohmann::json j = {{"base_url", base_url},
                      {"index_url_template", index_url_template},
                      {"categories", cats},
                      {"max_pages", max_pages},
                      {"request_interval_ms", request_interval_ms},
                      {"user_agent", user_agent},
                      {"selectors", selectors.to_json()}};
  j["fixture_dir"] = fixture_dir ? nlohmann::json(fixture_dir->string()) : nlohmann::json(nullptr);
  return j;
}

SourceConfig SourceConfig::from_json(const nlohmann::json& j) {
  SourceConfig c;
  c.base_url = j.value("base_url", c.base_url);
  c.index_url_template = j.value("index_url_template", c.index_url_template);
  if (j.contains("categories")) {
    c.categories.clear();
    for (const auto& [name, label] : j.at("categories").items()) {
      const auto parsed = parse_label(label.get<std::string>());
      if (!parsed) throw ConfigError("category '" + name + "' maps to unknown label '" + label.get<std::string>() + "'");
      c.categories[name] = *parsed;
    }
  }
  c.max_pages = j.value("max_pages", c.max_pages);
  c.request_interval_ms = j.value("request_interval_ms", c.request_interval_ms);
  c.user_agent = j.value("user_agent", c.user_agent);
  if (j.contains("fixture_dir") && !j["fixture_dir"].is_null()) c.fixture_dir = j["fixture_dir"].get<std::string>();
  if (j.contains("selectors")) c.selectors = SelectorConfig::from_json(j["selectors"]);
  c.validate();
  return c;
}

FetchResponse HttpFetcher::get(const std::string& url, const std::string& user_agent) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) return {0, {}, "not an absolute URL: " + url};
  const auto path_start = url.find('/', scheme_end + 3);
  const std::string origin = url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
  try {
    httplib::Client client(origin);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_follow_location(true);
    const auto res = client.Get(path, httplib::Headers{{"User-Agent", user_agent}});
    if (!res) return {0, {}, httplib::to_string(res.error())};
    return {res->status, res->body, {}};
  } catch (const std::exception& e) {
    return {0, {}, e.what()};
  }
}

Sleeper real_sleeper() {
  return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

PoliteClient::PoliteClient(const SourceConfig& config, Fetcher& fetcher, Sleeper sleeper)
    : config_(config), fetcher_(fetcher), sleeper_(std::move(sleeper)) {
  if (config_.fixture_mode()) throw ForbiddenOperationError("network access requested while in fixture mode");
  config_.validate();
}

FetchResponse PoliteClient::get(const std::string& url, int* attempts) {
  FetchResponse last;
  int made = 0;
  for (int attempt = 0; attempt <= kMaxRetries; ++attempt) {
    sleeper_(std::chrono::milliseconds(config_.request_interval_ms));
    last = fetcher_.get(url, config_.user_agent);
    ++made;
    if (!retryable(last)) break;
  }
  if (attempts) *attempts = made;
  return last;
}

std::string url_slug(const std::string& url) {
  std::string path = url.substr(0, url.find_first_of("?#"));
  if (const auto scheme = path.find("://"); scheme != std::string::npos) {
    const auto slash = path.find('/', scheme + 3);
    path = slash == std::string::npos ? std::string() : path.substr(slash);
  }
  while (!path.empty() && path.back() == '/') path.pop_back();
  const auto last = path.find_last_of('/');
  std::string slug = last == std::string::npos ? path : path.substr(last + 1);
  if (slug.ends_with(".html")) slug.resize(slug.size() - 5);
  return slug;
}

ScrapeResult scrape_category(const SourceConfig& config, const std::string& category, Fetcher& network,
                             const Sleeper& sleeper) {
  config.validate();
  const auto mapped = config.categories.find(category);
  if (mapped == config.categories.end()) throw ConfigError("category '" + category + "' has no label mapping");

  std::unique_ptr<PageReader> reader;
  if (config.fixture_mode()) {
    reader = std::make_unique<FixtureReader>(*config.fixture_dir, category);
  } else {
    reader = std::make_unique<LiveReader>(config, category, network, sleeper);
  }

  ScrapeResult result;
  std::vector<std::string> links;
  for (int page = 1; page <= config.max_pages; ++page) {
    int attempts = 0;
    const auto res = reader->index(page, &attempts);
    if (res.status == 404) break;
    if (!res.ok()) {
      result.skips.push_back({reader->index_url(page), describe(res), attempts});
      break;
    }
    ++result.pages_visited;
    const auto found = parse_index_links(res.body, config.selectors);
    if (found.empty()) break;
    for (const auto& l : found) {
      if (std::find(links.begin(), links.end(), l) == links.end()) links.push_back(l);
    }
  }

  for (const auto& link : links) {
    int attempts = 0;
    const auto res = reader->article(link, &attempts);
    if (!res.ok()) {
      result.skips.push_back({link, res.status == 404 && config.fixture_mode() ? res.error : describe(res), attempts});
      continue;
    }
    try {
      const auto parsed = parse_article_html(res.body, config.selectors);
      result.records.push_back({mapped->second, parsed.headline, parsed.body, Source::turnbackhoax});
    } catch (const ParseError& e) {
      result.skips.push_back({link, std::string("parse failure: missing ") + e.what(), attempts});
    }
  }
  return result;
}

}  // namespace hoaxdet::ingest
