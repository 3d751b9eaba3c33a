#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hoaxdet::ingest {

using CsvRow = std::vector<std::string>;

struct CsvTable {
  CsvRow header;
  std::vector<CsvRow> rows;
  std::vector<long> lines;  // 1-based physical line where each row starts
};

/// RFC 4180: quoted fields may hold commas, CRLF and doubled quotes. The
/// first record is the header. Throws ParseError on an unterminated quote or
/// a row whose width differs from the header.
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

/// Quotes a field only when it contains a comma, quote, CR or LF.
std::string csv_field(std::string_view value);
std::string csv_line(const CsvRow& row);  // ends with "\n"
std::string format_csv(const CsvTable& table);

}  // namespace hoaxdet::ingest
