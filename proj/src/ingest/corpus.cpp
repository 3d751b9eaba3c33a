#include "hoaxdet/ingest/corpus.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "hoaxdet/core/errors.hpp"
#include "hoaxdet/core/rng.hpp"
#include "hoaxdet/harness/io.hpp"
#include "hoaxdet/ingest/csv.hpp"
#include "hoaxdet/text/pipeline.hpp"

namespace hoaxdet::ingest {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = kFnvOffset) {
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= kFnvPrime;
  }
  return h;
}

std::string trim_lower(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  std::string out(s.substr(first, last - first + 1));
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::size_t column_index(const CsvRow& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ConfigError("CSV has no column '" + name + "'");
}

}  // namespace

std::uint64_t content_hash(const DatasetRecord& record) {
  return fnv1a(text::normalize_text(record.headline + " " + record.body));
}

std::string hash_hex(std::uint64_t hash) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, hash >>= 4) out[static_cast<std::size_t>(i)] = digits[hash & 0xF];
  return out;
}

nlohmann::json ColumnMapping::to_json() const {
  nlohmann::json map = nlohmann::json::object();
  for (const auto& [k, v] : labels) map[k] = std::string(to_string(v));
  return {{"label_column", label_column}, {"headline_column", headline_column}, {"body_column", body_column},
          {"labels", map}};
}

ColumnMapping ColumnMapping::from_json(const nlohmann::json& j) {
  ColumnMapping m;
  m.label_column = j.value("label_column", m.label_column);
  m.headline_column = j.value("headline_column", m.headline_column);
  m.body_column = j.value("body_column", m.body_column);
  if (j.contains("labels")) {
    m.labels.clear();
    for (const auto& [k, v] : j.at("labels").items()) {
      const auto label = parse_label(v.get<std::string>());
      if (!label) throw ConfigError("label mapping '" + k + "' targets unknown label '" + v.get<std::string>() + "'");
      m.labels[trim_lower(k)] = *label;
    }
  }
  return m;
}

ColumnMapping ColumnMapping::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ResourceError("cannot read column mapping " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("column mapping " + path.string() + ": " + e.what());
  }
}

std::vector<DatasetRecord> import_csv_dataset(const std::filesystem::path& path, Source source,
                                              const ColumnMapping& mapping) {
  const auto table = read_csv(path);
  const std::size_t label_col = column_index(table.header, mapping.label_column);
  const std::size_t headline_col = column_index(table.header, mapping.headline_column);
  const std::size_t body_col = column_index(table.header, mapping.body_column);
  std::vector<DatasetRecord> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto it = mapping.labels.find(trim_lower(row[label_col]));
    if (it == mapping.labels.end()) throw ParseError("unknown label value '" + row[label_col] + "'", table.lines[r]);
    out.push_back({it->second, row[headline_col], row[body_col], source});
  }
  return out;
}

std::string serialize_corpus(std::span<const DatasetRecord> records) {
  std::string out = csv_line({"label", "headline", "body", "source"});
  for (const auto& r : records) {
    out += csv_line({std::string(to_string(r.label)), r.headline, r.body, std::string(to_string(r.source))});
  }
  return out;
}

void write_corpus(const std::filesystem::path& path, std::span<const DatasetRecord> records) {
  harness::write_file_atomic(path, serialize_corpus(records));
}

std::vector<DatasetRecord> read_corpus(const std::filesystem::path& path) {
  const auto table = read_csv(path);
  const std::size_t label_col = column_index(table.header, "label");
  const std::size_t headline_col = column_index(table.header, "headline");
  const std::size_t body_col = column_index(table.header, "body");
  const std::size_t source_col = column_index(table.header, "source");
  std::vector<DatasetRecord> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto label = parse_label(row[label_col]);
    if (!label) throw ParseError("label must be valid or fake, got '" + row[label_col] + "'", table.lines[r]);
    const auto source = parse_source(row[source_col]);
    if (!source) throw ParseError("unknown source '" + row[source_col] + "'", table.lines[r]);
    out.push_back({*label, row[headline_col], row[body_col], *source});
  }
  return out;
}

CorpusManifest CorpusManifest::describe(std::span<const DatasetRecord> records) {
  CorpusManifest m;
  for (const auto& r : records) {
    auto& counts = m.per_source[std::string(to_string(r.source))];
    ++(r.label == Label::fake ? counts.fake : counts.valid);
    ++(r.label == Label::fake ? m.totals.fake : m.totals.valid);
  }
  m.created = utc_timestamp();
  return m;
}

nlohmann::json CorpusManifest::to_json(bool include_timestamp) const {
  nlohmann::json sources = nlohmann::json::object();
  for (const auto& [name, c] : per_source) {
    sources[name] = {{"valid", c.valid}, {"fake", c.fake}, {"total", c.total()}};
  }
  nlohmann::json j = {{"sources", sources},
                      {"valid", totals.valid},
                      {"fake", totals.fake},
                      {"total", totals.total()},
                      {"duplicates_dropped", duplicates_dropped}};
  j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
  if (include_timestamp) j["created"] = created;
  return j;
}

CorpusManifest CorpusManifest::from_json(const nlohmann::json& j) {
  CorpusManifest m;
  for (const auto& [name, c] : j.at("sources").items()) {
    m.per_source[name] = {c.at("valid").get<std::int64_t>(), c.at("fake").get<std::int64_t>()};
  }
  m.totals = {j.at("valid").get<std::int64_t>(), j.at("fake").get<std::int64_t>()};
  m.created = j.value("created", "");
  m.duplicates_dropped = j.value("duplicates_dropped", std::size_t{0});
  if (j.contains("seed") && !j["seed"].is_null()) m.seed = j["seed"].get<std::uint64_t>();
  LabelCounts sum;
  for (const auto& [name, c] : m.per_source) {
    sum.valid += c.valid;
    sum.fake += c.fake;
  }
  if (sum != m.totals) throw CorruptionError("manifest totals differ from the per-source sums");
  if (j.contains("total") && j["total"].get<std::int64_t>() != m.totals.total()) {
    throw CorruptionError("manifest total differs from its label counts");
  }
  return m;
}

std::string CorpusManifest::content_hash() const { return hash_hex(fnv1a(to_json(false).dump())); }

MergeResult merge_and_dedupe(std::span<const std::vector<DatasetRecord>> streams) {
  MergeResult out;
  std::unordered_set<std::uint64_t> seen;
  std::size_t dropped = 0;
  for (const auto& stream : streams) {
    for (const auto& r : stream) {
      if (seen.insert(content_hash(r)).second) {
        out.records.push_back(r);
      } else {
        ++dropped;
      }
    }
  }
  out.manifest = CorpusManifest::describe(out.records);
  out.manifest.duplicates_dropped = dropped;
  return out;
}

nlohmann::json SplitIndices::to_json() const {
  return {{"seed", seed}, {"ratio", ratio}, {"train", train}, {"test", test}};
}

SplitIndices SplitIndices::from_json(const nlohmann::json& j) {
  SplitIndices s;
  s.seed = j.at("seed").get<std::uint64_t>();
  s.ratio = j.at("ratio").get<double>();
  s.train = j.at("train").get<std::vector<std::size_t>>();
  s.test = j.at("test").get<std::vector<std::size_t>>();
  return s;
}

SplitIndices train_test_split(std::size_t n, std::uint64_t seed, double ratio) {
  if (n < 2) throw ContractError("train_test_split: need at least two records, got " + std::to_string(n));
  if (!(ratio > 0 && ratio < 1)) throw ConfigError("split ratio must lie strictly between 0 and 1");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  // Rounding guards against 0.8 * n landing just below an integer.
  const auto cut = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
  SplitIndices s;
  s.seed = seed;
  s.ratio = ratio;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(cut), order.end());
  return s;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace hoaxdet::ingest
