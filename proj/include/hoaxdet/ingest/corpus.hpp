#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hoaxdet/text/article.hpp"

namespace hoaxdet::ingest {

using DatasetRecord = RawArticle;

/// FNV-1a 64 over the normalized headline and body.
std::uint64_t content_hash(const DatasetRecord& record);
std::string hash_hex(std::uint64_t hash);

/// How an external CSV maps onto records. Label values are matched after
/// trimming and lowercasing.
struct ColumnMapping {
  std::string label_column = "label";
  std::string headline_column = "headline";
  std::string body_column = "body";
  std::map<std::string, Label> labels = {{"valid", Label::valid}, {"fake", Label::fake}};

  nlohmann::json to_json() const;
  static ColumnMapping from_json(const nlohmann::json& j);
  static ColumnMapping load(const std::filesystem::path& path);
};

/// Throws ConfigError for a missing column and ParseError (with the line) for
/// an unmapped label value.
std::vector<DatasetRecord> import_csv_dataset(const std::filesystem::path& path, Source source,
                                              const ColumnMapping& mapping);

/// Canonical corpus CSV with header label,headline,body,source.
std::string serialize_corpus(std::span<const DatasetRecord> records);
void write_corpus(const std::filesystem::path& path, std::span<const DatasetRecord> records);
std::vector<DatasetRecord> read_corpus(const std::filesystem::path& path);

struct LabelCounts {
  std::int64_t valid = 0;
  std::int64_t fake = 0;

  std::int64_t total() const { return valid + fake; }
  bool operator==(const LabelCounts&) const = default;
};

struct CorpusManifest {
  std::map<std::string, LabelCounts> per_source;
  LabelCounts totals;
  std::string created;  // ISO-8601 UTC
  std::optional<std::uint64_t> seed;
  std::size_t duplicates_dropped = 0;

  static CorpusManifest describe(std::span<const DatasetRecord> records);

  /// Everything except the timestamp, so identical inputs give identical
  /// hashes.
  nlohmann::json to_json(bool include_timestamp = true) const;
  static CorpusManifest from_json(const nlohmann::json& j);
  std::string content_hash() const;
};

struct MergeResult {
  std::vector<DatasetRecord> records;
  CorpusManifest manifest;
};

/// Concatenates in order and keeps the first record of each content hash.
MergeResult merge_and_dedupe(std::span<const std::vector<DatasetRecord>> streams);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
  double ratio = 0.8;

  nlohmann::json to_json() const;
  static SplitIndices from_json(const nlohmann::json& j);
};

/// Seeded shuffle of 0..n-1; the first floor(ratio * n) go to train. Throws
/// ContractError for n < 2.
SplitIndices train_test_split(std::size_t n, std::uint64_t seed, double ratio = 0.8);

std::string utc_timestamp();

}  // namespace hoaxdet::ingest
