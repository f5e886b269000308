#pragma once

#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace ionloc {

/// CSV output with a header row, '.' decimal separator, LF line endings and
/// 12 significant digits for floating-point fields.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::initializer_list<std::string_view> header);

  CsvWriter& field(double v);
  CsvWriter& field(long v);
  CsvWriter& field(int v) { return field(static_cast<long>(v)); }
  CsvWriter& field(std::string_view v);
  void end_row();

  long rows() const { return rows_; }
  const std::string& path() const { return path_; }
  void close();

 private:
  std::string path_;
  std::ofstream out_;
  bool first_ = true;
  long rows_ = 0;
};

/// Formats a double with 12 significant digits, independent of locale.
std::string format_number(double v);

}  // namespace ionloc
