#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace icutl::csv {

// RFC 4180 reader over a file loaded into memory. Quoted fields may contain
// commas, doubled quotes and line breaks. `line()` reports the 1-based
// physical line on which the current record started.
class Reader {
 public:
  explicit Reader(const std::filesystem::path& path);

  // Advances to the next record; false at end of input.
  bool next();

  const std::vector<std::string>& fields() const { return fields_; }
  std::size_t line() const { return record_line_; }

 private:
  std::string data_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t record_line_ = 0;
  std::vector<std::string> fields_;
};

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path);

  void row(std::initializer_list<std::string_view> fields);
  void row(const std::vector<std::string>& fields);

 private:
  void field(std::string_view value, bool first);

  std::ofstream out_;
};

std::string format_double(double v);

}  // namespace icutl::csv
