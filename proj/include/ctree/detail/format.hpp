#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "ctree/error.hpp"

namespace ctree::detail {

// Shortest "%#.Ng" rendering with N >= min_digits that parses back to the same
// double. Trailing zeros are kept, so the output always carries N digits.
inline std::string format_real(double value, int min_digits = 12) {
  char buf[64];
  for (int digits = min_digits; digits <= 17; ++digits) {
    std::snprintf(buf, sizeof buf, "%#.*g", digits, value);
    if (std::strtod(buf, nullptr) == value) break;
  }
  return buf;
}

// Fixed-width rendering for tabular output.
inline std::string format_fixed(double value, int decimals = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed on '" + path + "'");
  return buf.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failed on '" + path + "'");
}

}  // namespace ctree::detail
