#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pseudorot/core/errors.hpp"

namespace pseudorot::csv {

// Shortest round-trip decimal form; locale independent.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

class Writer {
 public:
  explicit Writer(std::vector<std::string> header) : columns_(header.size()) {
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw InvalidArgument("csv row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << escape(cells[i]);
    }
    out_ << '\n';
  }

  std::string str() const { return out_.str(); }

  void save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("io_error", "cannot write " + path);
    f << out_.str();
  }

 private:
  static std::string escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  }

  std::size_t columns_;
  std::ostringstream out_;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Reads the dialect produced by Writer: comma separated, LF endings,
// mandatory header, double-quote escaping.
inline Table parse(const std::string& text) {
  Table t;
  std::vector<std::string> current;
  std::string cell;
  bool quoted = false, any = false;
  auto end_row = [&] {
    current.push_back(cell);
    cell.clear();
    if (t.header.empty()) t.header = current;
    else t.rows.push_back(current);
    current.clear();
    any = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') { cell += '"'; ++i; }
        else quoted = false;
      } else {
        cell += c;
      }
      continue;
    }
    if (c == '"') { quoted = true; any = true; }
    else if (c == ',') { current.push_back(cell); cell.clear(); any = true; }
    else if (c == '\n') end_row();
    else if (c == '\r') throw InvalidArgument("csv: CR line endings are not allowed");
    else { cell += c; any = true; }
  }
  if (any || !cell.empty()) end_row();
  if (t.header.empty()) throw InvalidArgument("csv: missing header");
  for (const auto& r : t.rows)
    if (r.size() != t.header.size()) throw InvalidArgument("csv: ragged row");
  return t;
}

inline Table load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("io_error", "cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

}  // namespace pseudorot::csv
