#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "hoaxdet/models/classifier.hpp"

namespace hoaxdet::tfm {
class PretrainingModel;
}

namespace hoaxdet::harness {

/// One JSON header line (kind, hyperparameters, vocabulary, and per layer its
/// shape, byte offset and byte length), a newline, then the parameters as
/// little-endian float32 in header order.
std::string encode_checkpoint(std::string_view kind, const nlohmann::json& hyperparameters,
                              const std::vector<std::string>& vocabulary, std::span<const zoo::NamedParameter> params);

struct DecodedCheckpoint {
  nlohmann::json header;
  std::string_view blob;  // points into the decoded buffer
};

/// Validates framing, format tag, version and blob size.
DecodedCheckpoint decode_checkpoint(const std::string& bytes);

/// Copies every layer into `params`. Throws CorruptionError when a layer is
/// missing from either side, has another shape, or lies outside the blob.
void restore_parameters(const DecodedCheckpoint& checkpoint, std::span<const zoo::NamedParameter> params);

std::string serialize_checkpoint(zoo::Classifier& model);
void save_checkpoint(zoo::Classifier& model, const std::filesystem::path& path);

/// Throws CorruptionError on damage, VersionError on an unknown architecture
/// kind, and ContractError for a pretraining checkpoint.
std::unique_ptr<zoo::Classifier> deserialize_checkpoint(const std::string& bytes);
std::unique_ptr<zoo::Classifier> load_checkpoint(const std::filesystem::path& path);

/// Encoder plus pretraining heads, tagged with stage "pretraining".
void save_pretraining_checkpoint(tfm::PretrainingModel& model, const std::filesystem::path& path);
std::unique_ptr<tfm::PretrainingModel> load_pretraining_checkpoint(const std::filesystem::path& path);

}  // namespace hoaxdet::harness
