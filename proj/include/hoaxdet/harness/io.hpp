#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

namespace hoaxdet::harness {

/// Writes to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& value);

/// Throws ResourceError when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Throws ParseError when the content is not JSON.
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace hoaxdet::harness
