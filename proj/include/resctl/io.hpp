#pragma once

// Plain CSV output with round-trip precision.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "resctl/errors.hpp"
#include "resctl/types.hpp"

namespace resctl {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path, std::ios::binary) {
    if (!out_) throw ValidationError("cannot open for writing: " + path, "out");
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_double(values[i]);
    out_ << '\n';
  }

  /// First column a label, the rest numbers.
  void row(const std::string& label, const std::vector<double>& values) {
    out_ << label;
    for (double v : values) out_ << ',' << format_double(v);
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

/// Columns: x, Re, Im, |.|, arg.
inline void write_complex_series(const std::string& path, const std::string& x_label, const RVector& x, const CVector& v) {
  CsvWriter w(path, {x_label, "re", "im", "abs", "arg"});
  for (Eigen::Index i = 0; i < x.size(); ++i) w.row({x(i), v(i).real(), v(i).imag(), std::abs(v(i)), std::arg(v(i))});
}

}  // namespace resctl
