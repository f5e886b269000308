#include "ionloc/csv.hpp"

#include <cmath>
#include <cstdio>
#include <locale>
#include <sstream>


namespace ionloc {

std::string format_number(double v) {
  if (v == 0.0) return "0";  // folds -0 as well
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(12);
  os << v;
  return os.str();
}

CsvWriter::CsvWriter(const std::string& path, std::initializer_list<std::string_view> header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot open " + path + " for writing");
  bool first = true;
  for (auto h : header) {
    if (!first) out_ << ',';
    out_ << h;
    first = false;
  }
  out_ << '\n';
}

CsvWriter& CsvWriter::field(double v) {
  if (!first_) out_ << ',';
  out_ << format_number(v);
  first_ = false;
  return *this;
}

CsvWriter& CsvWriter::field(long v) {
  if (!first_) out_ << ',';
  out_ << v;
  first_ = false;
  return *this;
}

CsvWriter& CsvWriter::field(std::string_view v) {
  if (!first_) out_ << ',';
  out_ << v;
  first_ = false;
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  first_ = true;
  ++rows_;
}

void CsvWriter::close() {
  out_.close();
  if (!out_) throw std::runtime_error("failed writing " + path_);
}

}  // namespace ionloc
