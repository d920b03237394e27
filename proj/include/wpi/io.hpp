#pragma once

// CSV and hashing helpers for the experiment runner. Numeric cells are
// printed with %.17g so a double round-trips exactly and reruns with the
// same seed produce byte identical files.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "wpi/common.hpp"

namespace wpi {

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns)
      : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw ConfigError("cannot open " + path + " for writing");
    width_ = columns.size();
    line(columns);
  }

  // Cells are preformatted strings; empty string marks a non applicable
  // cell. Row width must match the header.
  void row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw InvalidParameter("csv row width mismatch");
    line(cells);
  }

  const std::string& path() const { return path_; }

  void close() {
    out_.flush();
    if (!out_) throw ConfigError("write to " + path_ + " failed");
    out_.close();
  }

 private:
  // Standard escaping: cells holding a comma, quote or newline are wrapped
  // in double quotes with inner quotes doubled.
  static std::string escape(const std::string& cell) {
    if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
    std::string q = "\"";
    for (char c : cell) {
      q += c;
      if (c == '"') q += c;
    }
    q += '"';
    return q;
  }

  void line(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) out_ << ',';
      out_ << escape(cells[k]);
    }
    out_ << '\n';
  }

  std::string path_;
  std::ofstream out_;
  std::size_t width_ = 0;
};

// FNV-1a, the 64 bit variant.
inline std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace wpi
