#pragma once

// Locale-independent CSV output and small JSON helpers.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "minlor/error.hpp"
#include "minlor/neutral.hpp"

namespace minlor::io {

/// 17 significant digits, '.' decimal point, "nan"/"inf" for non-finite values.
inline std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[48];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
    add_row_text(header);
  }

  void add_row(std::initializer_list<double> values) { add_row(std::vector<double>(values)); }

  void add_row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_real(v));
    add_row_text(cells);
  }

  void add_row_text(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw Error(ErrorKind::precondition, "CSV row has the wrong number of cells");
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) out_ << ',';
      out_ << cells[k];
    }
    out_ << '\n';
  }

  std::string str() const { return out_.str(); }

 private:
  std::size_t columns_;
  std::ostringstream out_;
};

inline void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
  f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!f) throw Error(ErrorKind::io, "failed writing " + path.string());
}

inline nlohmann::ordered_json to_json(const NeutralVector& v) { return {v[0], v[1], v[2], v[3]}; }

/// Non-finite numbers become null (JSON has no NaN).
inline nlohmann::ordered_json real(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

/// 1-based line and column of a byte offset.
inline std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t k = 0; k < offset && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace minlor::io
