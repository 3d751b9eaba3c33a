#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hoaxdet/ingest/html.hpp"
#include "hoaxdet/text/article.hpp"

namespace hoaxdet::ingest {

struct SourceConfig {
  std::string base_url = "https://turnbackhoax.id";
  /// `{base}`, `{category}` and `{page}` are substituted.
  std::string index_url_template = "{base}/category/{category}/page/{page}/";
  std::map<std::string, Label> categories = {{"Benar", Label::valid}, {"Hoax", Label::fake}};
  int max_pages = 1;
  std::int64_t request_interval_ms = 1000;
  std::string user_agent = "hoaxdet-corpus-builder/1.0 (research crawler)";
  std::optional<std::filesystem::path> fixture_dir;
  SelectorConfig selectors;

  bool fixture_mode() const { return fixture_dir.has_value(); }

  /// Throws ConfigError on an interval below 1000 ms in live mode, an empty
  /// category map or a non-positive page cap.
  void validate() const;

  nlohmann::json to_json() const;
  static SourceConfig from_json(const nlohmann::json& j);
};

struct FetchResponse {
  int status = 0;  // 0 when the request never completed
  std::string body;
  std::string error;

  bool ok() const { return status >= 200 && status < 300; }
};

/// Network access point; tests substitute counting fakes.
class Fetcher {
 public:
  virtual ~Fetcher() = default;
  virtual FetchResponse get(const std::string& url, const std::string& user_agent) = 0;
};

/// HTTP(S) client backed by cpp-httplib.
class HttpFetcher final : public Fetcher {
 public:
  explicit HttpFetcher(std::chrono::seconds timeout = std::chrono::seconds(20)) : timeout_(timeout) {}
  FetchResponse get(const std::string& url, const std::string& user_agent) override;

 private:
  std::chrono::seconds timeout_;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// Sleeps on the calling thread.
Sleeper real_sleeper();

struct SkipReport {
  std::string url;
  std::string reason;
  int attempts = 0;
};

struct ScrapeResult {
  std::vector<RawArticle> records;
  std::vector<SkipReport> skips;
  std::size_t pages_visited = 0;
};

inline constexpr int kMaxRetries = 3;

/// Rate-limited, retrying GET: every request is preceded by the configured
/// interval, so consecutive requests are never closer than that. Throws ForbiddenOperationError when the config
/// is in fixture mode.
class PoliteClient {
 public:
  PoliteClient(const SourceConfig& config, Fetcher& fetcher, Sleeper sleeper);

  /// One attempt plus up to kMaxRetries retries on transport errors and 5xx
  /// or 429 statuses. `attempts` receives the number of requests made.
  FetchResponse get(const std::string& url, int* attempts = nullptr);

 private:
  const SourceConfig& config_;
  Fetcher& fetcher_;
  Sleeper sleeper_;
};

/// Walks index pages 1..max_pages of `category`, then every linked article.
/// In fixture mode pages come from `<fixture_dir>/<category>/<page>.html` and
/// `<fixture_dir>/<category>/articles/<slug>.html` and `network` is never
/// touched. Failures become skip reports.
ScrapeResult scrape_category(const SourceConfig& config, const std::string& category, Fetcher& network,
                             const Sleeper& sleeper);

/// Last non-empty path segment of a URL, without query or fragment.
std::string url_slug(const std::string& url);

}  // namespace hoaxdet::ingest
