#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <type_traits>

// CSV emission. Numbers are written locale-independently in the shortest
// form that round-trips to the same double.

namespace pollreg {

inline std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string csv_cell(const std::string& s) { return s; }
inline std::string csv_cell(const char* s) { return s; }
inline std::string csv_cell(double v) { return csv_number(v); }
inline std::string csv_cell(bool v) { return v ? "1" : "0"; }

template <class T>
  requires std::is_integral_v<T> && (!std::is_same_v<T, bool>)
inline std::string csv_cell(T v) {
  return std::to_string(v);
}

}  // namespace detail

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path);
  }

  // Comment lines start with '#' and precede the header row.
  void comment(const std::string& text) { out_ << "# " << text << '\n'; }

  template <class... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ","), first = false, out_ << detail::csv_cell(cells)), ...);
    out_ << '\n';
  }

  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
};

}  // namespace pollreg
