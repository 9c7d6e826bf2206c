#pragma once

// Small CSV and number-formatting helpers shared by the readers and writers.

#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "hubfair/error.hpp"

namespace hubfair::text {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Splits one CSV record. Double-quoted fields may contain commas; "" is an
// escaped quote. Fields are trimmed of surrounding blanks.
inline std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.emplace_back(trim(field));
      field.clear();
    } else {
      field.push_back(ch);
    }
  }
  out.emplace_back(trim(field));
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<long long> parse_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc{} && ptr == s.data() + s.size()) return v;
  // Accept integral values written as reals, e.g. "120.0".
  auto d = parse_double(s);
  if (d && *d == static_cast<double>(static_cast<long long>(*d))) {
    return static_cast<long long>(*d);
  }
  return std::nullopt;
}

// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline bool is_county_fips(std::string_view s) {
  if (s.size() != 5) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

// FNV-1a, 64 bit. Stable across platforms; used for config and file hashes.
inline std::uint64_t fnv1a(std::string_view data,
                           std::uint64_t h = 14695981039346656037ull) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

// Line-oriented CSV reader with a mandatory header row. Columns are looked up
// by name so column order in the file is free.
class CsvReader {
 public:
  CsvReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {
    std::string header;
    while (std::getline(in_, header)) {
      ++line_no_;
      if (!trim(header).empty()) break;
      header.clear();
    }
    if (header.size() >= 3 && header.compare(0, 3, "\xEF\xBB\xBF") == 0) header.erase(0, 3);
    if (!trim(header).empty()) {
      columns_ = split_csv(header);
      for (std::size_t i = 0; i < columns_.size(); ++i) index_[columns_[i]] = i;
    }
  }

  bool empty_file() const { return columns_.empty(); }
  bool has(const std::string& col) const { return index_.count(col) != 0; }
  const std::string& source() const { return source_; }

  std::size_t column(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) {
      throw InputError(source_ + ": missing required column '" + name + "'");
    }
    return it->second;
  }

  void require(std::initializer_list<const char*> names) const {
    for (const char* n : names) (void)column(n);
  }

  // Reads the next non-blank record; returns false at end of file.
  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (trim(line).empty()) continue;
      fields = split_csv(line);
      return true;
    }
    return false;
  }

  std::size_t line_number() const { return line_no_; }
  std::size_t width() const { return columns_.size(); }

 private:
  std::istream& in_;
  std::string source_;
  std::vector<std::string> columns_;
  std::map<std::string, std::size_t> index_;
  std::size_t line_no_ = 0;
};

}  // namespace hubfair::text
