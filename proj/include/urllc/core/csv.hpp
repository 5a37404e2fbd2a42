// SPDX-License-Identifier: Apache-2.0
//
// Locale-independent CSV output. Probabilities use 6 significant digits in
// scientific notation, dB values 2 decimals.
#pragma once

#include <charconv>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace urllc::csv {

inline std::string sci(double v, int digits = 6) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, digits - 1);
  return std::string(buf, r.ptr);
}

inline std::string fixed(double v, int decimals) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
  return std::string(buf, r.ptr);
}

inline std::string prob(double v) { return sci(v, 6); }
inline std::string db(double v) { return fixed(v, 2); }
inline std::string num(double v) { return sci(v, 10); }

inline std::string integer(std::int64_t v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}

  Writer& comment(std::string_view line) {
    os_ << "# " << line << '\n';
    return *this;
  }

  Writer& header(const std::vector<std::string>& cols) { return row(cols); }

  Writer& row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os_ << ',';
      os_ << cells[i];
    }
    os_ << '\n';
    return *this;
  }

  void flush() { os_.flush(); }

 private:
  std::ostream& os_;
};

}  // namespace urllc::csv
