#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "prefrec/common.hpp"

namespace prefrec {

// Shortest decimal form that parses back to the identical double, so CSV
// bytes are reproducible across runs and platforms with IEEE doubles.
inline std::string fmt_double(double v) {
  std::array<char, 64> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (res.ec != std::errc()) throw NumericError("csv: cannot format double");
  return std::string(buf.data(), res.ptr);
}

template <typename Int>
std::string fmt_int(Int v) {
  std::array<char, 32> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (res.ec != std::errc()) throw NumericError("csv: cannot format integer");
  return std::string(buf.data(), res.ptr);
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

// Comma-separated writer with a fixed column count. Binary mode keeps line
// endings to a single '\n' everywhere.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header)
      : path_(path), out_(path, std::ios::binary), n_cols_(header.size()) {
    if (!out_) throw DataError("csv: cannot open " + path + " for writing");
    if (header.empty()) throw ConfigError("csv: header must name at least one column");
    write_row(header);
  }

  void row(const std::vector<std::string>& fields) {
    if (fields.size() != n_cols_)
      throw ConfigError("csv: row has " + std::to_string(fields.size()) + " fields, header has " +
                        std::to_string(n_cols_) + " (" + path_ + ")");
    write_row(fields);
  }

  void close() {
    out_.flush();
    if (!out_) throw DataError("csv: write failed: " + path_);
    out_.close();
  }

 private:
  void write_row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i > 0) out_ << ',';
      out_ << csv_escape(fields[i]);
    }
    out_ << '\n';
  }

  std::string path_;
  std::ofstream out_;
  std::size_t n_cols_;
};

struct CsvTable {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw ParseError("csv: " + path + " has no column \"" + name + "\"");
  }
};

// Quote-aware reader: fields may contain commas, doubled quotes, and
// newlines when quoted. Rejects stray/unterminated quotes and ragged rows.
inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("csv: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  std::vector<std::vector<std::string>> records;
  std::vector<std::string> cur;
  std::string field;
  bool in_quotes = false;
  bool quoted_field = false;  // the current field started with a quote
  bool just_closed = false;   // a closing quote wants , or newline next
  std::size_t line = 1;

  auto end_field = [&] {
    cur.push_back(field);
    field.clear();
    quoted_field = false;
    just_closed = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(cur));
    cur.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
          just_closed = true;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == ',') {
      end_field();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_record();
      ++line;
    } else if (c == '"') {
      if (!field.empty() || just_closed)
        throw ParseError("csv: " + path + ":" + std::to_string(line) + ": stray quote");
      in_quotes = true;
      quoted_field = true;
    } else {
      if (just_closed)
        throw ParseError("csv: " + path + ":" + std::to_string(line) +
                         ": text after closing quote");
      field += c;
    }
  }
  if (in_quotes) throw ParseError("csv: " + path + ": unterminated quote at end of file");
  if (!field.empty() || !cur.empty() || quoted_field || just_closed) end_record();

  CsvTable table;
  table.path = path;
  std::size_t record_no = 0;
  for (auto& rec : records) {
    ++record_no;
    if (rec.size() == 1 && rec[0].empty()) continue;  // blank line
    if (table.header.empty()) {
      table.header = std::move(rec);
      continue;
    }
    if (rec.size() != table.header.size())
      throw ParseError("csv: " + path + ": record " + std::to_string(record_no) + " has " +
                       std::to_string(rec.size()) + " fields, header has " +
                       std::to_string(table.header.size()));
    table.rows.push_back(std::move(rec));
  }
  if (table.header.empty()) throw ParseError("csv: " + path + " is empty");
  return table;
}

inline double parse_csv_double(const CsvTable& t, const std::vector<std::string>& row,
                               std::size_t col) {
  const std::string& s = row.at(col);
  // from_chars handles "nan"/"inf" spellings produced by fmt_double.
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError("csv: " + t.path + ": not a number: \"" + s + "\"");
  return v;
}

inline std::int64_t parse_csv_int(const CsvTable& t, const std::vector<std::string>& row,
                                  std::size_t col) {
  const std::string& s = row.at(col);
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError("csv: " + t.path + ": not an integer: \"" + s + "\"");
  return v;
}

}  // namespace prefrec
