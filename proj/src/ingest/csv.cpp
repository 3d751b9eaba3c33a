#include "hoaxdet/ingest/csv.hpp"

#include <fstream>
#include <sstream>

#include "hoaxdet/core/errors.hpp"

namespace hoaxdet::ingest {

CsvTable parse_csv(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::vector<CsvRow> records;
  std::vector<long> starts;
  CsvRow row;
  std::string field;
  long line = 1;
  long record_line = 1;
  bool in_quotes = false;
  bool quoted_field = false;
  bool row_open = false;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    quoted_field = false;
  };
  auto end_row = [&] {
    end_field();
    records.push_back(std::move(row));
    starts.push_back(record_line);
    row.clear();
    row_open = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (!row_open) {
      row_open = true;
      record_line = line;
    }
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || quoted_field) throw ParseError("unexpected quote inside an unquoted field", line);
        in_quotes = true;
        quoted_field = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        [[fallthrough]];
      case '\n':
        end_row();
        ++line;
        break;
      default:
        if (quoted_field) throw ParseError("characters after a closing quote", line);
        field.push_back(c);
    }
  }
  if (in_quotes) throw ParseError("unterminated quoted field", record_line);
  if (row_open) end_row();

  CsvTable table;
  if (records.empty()) throw ParseError("missing header row", 1);
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() == 1 && records[r][0].empty()) continue;  // blank line
    if (records[r].size() != table.header.size()) {
      throw ParseError("row has " + std::to_string(records[r].size()) + " fields, header has " +
                           std::to_string(table.header.size()),
                       starts[r]);
    }
    table.rows.push_back(std::move(records[r]));
    table.lines.push_back(starts[r]);
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ResourceError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str());
}

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (const char c : value) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string csv_line(const CsvRow& row) {
  std::string out;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out.push_back(',');
    out += csv_field(row[i]);
  }
  out.push_back('\n');
  return out;
}

std::string format_csv(const CsvTable& table) {
  std::string out = csv_line(table.header);
  for (const auto& row : table.rows) out += csv_line(row);
  return out;
}

}  // namespace hoaxdet::ingest
