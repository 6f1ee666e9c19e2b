#pragma once

// File plumbing: RFC 4180 CSV, JSON lines, atomic writes, number formatting.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "itopic/error.hpp"
#include "itopic/text.hpp"

namespace itopic::io {

namespace fs = std::filesystem;

struct CsvRow {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

/// Writes through a sibling temp file and renames, so readers never observe a partial file.
inline void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorKind::Io, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot rename " + tmp.string() + ": " + ec.message());
}

inline std::vector<CsvRow> parse_csv(std::string_view data) {
  std::vector<CsvRow> rows;
  std::size_t pos = 0, line = 1;
  if (data.substr(0, 3) == "\xEF\xBB\xBF") pos = 3;
  while (pos < data.size()) {
    CsvRow row;
    row.line = line;
    std::string field;
    bool quoted = false, field_started = false, end_of_record = false;
    while (!end_of_record) {
      if (pos >= data.size()) {
        if (quoted) throw Error(ErrorKind::ParseError, "line " + std::to_string(row.line) + ": unterminated quote");
        row.fields.push_back(std::move(field));
        break;
      }
      const char c = data[pos++];
      if (quoted) {
        if (c == '"') {
          if (pos < data.size() && data[pos] == '"') {
            field.push_back('"');
            ++pos;
          } else {
            quoted = false;
          }
        } else {
          if (c == '\n') ++line;
          field.push_back(c);
        }
        continue;
      }
      switch (c) {
        case '"':
          if (field_started)
            throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": stray quote");
          quoted = field_started = true;
          break;
        case ',':
          row.fields.push_back(std::move(field));
          field.clear();
          field_started = false;
          break;
        case '\r':
          if (pos < data.size() && data[pos] == '\n') ++pos;
          [[fallthrough]];
        case '\n':
          ++line;
          row.fields.push_back(std::move(field));
          end_of_record = true;
          break;
        default:
          field.push_back(c);
          field_started = true;
      }
    }
    if (row.fields.size() == 1 && row.fields[0].empty()) continue;  // blank line
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

/// Records from a CSV with a header row, picking the named id and text columns.
inline std::vector<RawRecord> read_records_csv(const fs::path& path, std::string_view id_col = "id",
                                               std::string_view text_col = "text") {
  const std::string data = read_file(path);
  auto rows = parse_csv(data);
  if (rows.empty()) throw Error(ErrorKind::ParseError, "line 1: missing header");
  const auto& header = rows.front().fields;
  auto find_col = [&](std::string_view name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw Error(ErrorKind::ParseError, "line 1: no column named '" + std::string(name) + "'");
  };
  const std::size_t id_idx = find_col(id_col), text_idx = find_col(text_col);
  std::vector<RawRecord> out;
  out.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    auto& row = rows[r];
    if (row.fields.size() != header.size())
      throw Error(ErrorKind::ParseError, "line " + std::to_string(row.line) + ": expected " +
                                             std::to_string(header.size()) + " fields, got " +
                                             std::to_string(row.fields.size()));
    try {
      utf8::validate(row.fields[text_idx]);
      utf8::validate(row.fields[id_idx]);
    } catch (const Error&) {
      throw Error(ErrorKind::MalformedUtf8, "line " + std::to_string(row.line) + ": invalid UTF-8");
    }
    if (row.fields[id_idx].empty())
      throw Error(ErrorKind::ParseError, "line " + std::to_string(row.line) + ": empty id");
    out.push_back({std::move(row.fields[id_idx]), std::move(row.fields[text_idx])});
  }
  return out;
}

/// Shortest decimal text that round-trips the double exactly.
inline std::string format_exact(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

/// Rounds to six significant digits; emitted JSON numbers stay short and stable.
inline double sig6(double v) {
  if (!std::isfinite(v) || v == 0.0) return v == 0.0 ? 0.0 : v;
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 6);
  double out = 0.0;
  std::from_chars(buf, end, out);
  return out;
}

inline std::string dump_json(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

inline std::vector<Document> read_documents_jsonl(const fs::path& path) {
  const std::string data = read_file(path);
  std::vector<Document> docs;
  std::istringstream in(data);
  std::string line;
  std::size_t lineno = 0;
  std::unordered_set<std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      Document d;
      d.id = j.at("id").get<std::string>();
      d.clean = j.at("text").get<std::string>();
      if (d.id.empty()) throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": empty id");
      if (!seen.insert(d.id).second) throw Error(ErrorKind::DuplicateId, d.id);
      docs.push_back(std::move(d));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return docs;
}

inline std::string documents_jsonl(const std::vector<Document>& docs) {
  std::string out;
  for (const auto& d : docs) out += nlohmann::ordered_json{{"id", d.id}, {"text", d.clean}}.dump() + "\n";
  return out;
}

}  // namespace itopic::io
