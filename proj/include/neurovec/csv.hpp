#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "neurovec/error.hpp"

namespace neurovec {

struct CsvOptions {
  char delimiter = ',';
};

/// Header plus raw cells. Row numbers reported in errors are 1-based data rows.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// RFC-4180 style reader: quoted fields may contain delimiters, newlines and
/// doubled quotes. CRLF and LF line endings are accepted; a UTF-8 BOM is skipped.
inline CsvTable parse_csv(std::string_view text, const CsvOptions& opts = {}) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool inQuotes = false;
  bool fieldQuoted = false;
  bool recordStarted = false;
  std::size_t line = 1;

  auto endField = [&] {
    record.push_back(std::move(field));
    field.clear();
    fieldQuoted = false;
  };
  auto endRecord = [&] {
    endField();
    // A line with a single empty unquoted field is a blank line.
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
    recordStarted = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (inQuotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          inQuotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && field.empty() && !fieldQuoted) {
      inQuotes = true;
      fieldQuoted = true;
      recordStarted = true;
    } else if (c == opts.delimiter) {
      endField();
      recordStarted = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      ++line;
      endRecord();
    } else {
      field.push_back(c);
      recordStarted = true;
    }
  }
  if (inQuotes) {
    throw DataError("unterminated quoted field near line " + std::to_string(line));
  }
  if (recordStarted || !field.empty()) endRecord();

  if (records.empty()) throw DataError("CSV input has no header row");
  CsvTable table;
  table.header = std::move(records.front());
  table.rows.assign(std::make_move_iterator(records.begin() + 1),
                    std::make_move_iterator(records.end()));
  return table;
}

inline CsvTable read_csv(const std::filesystem::path& path, const CsvOptions& opts = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), opts);
}

/// Quotes a field when it contains the delimiter, a quote or a line break.
inline std::string csv_escape(std::string_view field, char delimiter = ',') {
  if (field.find_first_of(std::string{delimiter, '"', '\n', '\r'}) == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace neurovec
