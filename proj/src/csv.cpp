#include "icutl/csv.hpp"

#include <cstdio>
#include <sstream>

#include "icutl/error.hpp"

namespace icutl::csv {

Reader::Reader(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  data_ = std::move(ss).str();
  if (data_.size() >= 3 && data_.compare(0, 3, "\xEF\xBB\xBF") == 0) pos_ = 3;
}

bool Reader::next() {
  fields_.clear();
  if (pos_ >= data_.size()) return false;
  record_line_ = line_;
  std::string current;
  bool in_quotes = false;
  while (pos_ < data_.size()) {
    const char c = data_[pos_++];
    if (in_quotes) {
      if (c == '"') {
        if (pos_ < data_.size() && data_[pos_] == '"') {
          current.push_back('"');
          ++pos_;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line_;
        current.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields_.push_back(std::move(current));
      current.clear();
    } else if (c == '\r') {
      // swallowed; CRLF terminators are accepted
    } else if (c == '\n') {
      ++line_;
      fields_.push_back(std::move(current));
      return true;
    } else {
      current.push_back(c);
    }
  }
  if (in_quotes) {
    throw Error(ErrorCode::kParseError,
                "unterminated quoted field starting at line " + std::to_string(record_line_));
  }
  fields_.push_back(std::move(current));
  return true;
}

Writer::Writer(const std::filesystem::path& path) : out_(path, std::ios::binary) {
  if (!out_) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
}

void Writer::field(std::string_view value, bool first) {
  if (!first) out_.put(',');
  if (value.find_first_of(",\"\r\n") == std::string_view::npos) {
    out_ << value;
    return;
  }
  out_.put('"');
  for (char c : value) {
    if (c == '"') out_.put('"');
    out_.put(c);
  }
  out_.put('"');
}

void Writer::row(std::initializer_list<std::string_view> fields) {
  bool first = true;
  for (auto f : fields) {
    field(f, first);
    first = false;
  }
  out_.put('\n');
  if (!out_) throw Error(ErrorCode::kIoError, "write failed");
}

void Writer::row(const std::vector<std::string>& fields) {
  bool first = true;
  for (const auto& f : fields) {
    field(f, first);
    first = false;
  }
  out_.put('\n');
  if (!out_) throw Error(ErrorCode::kIoError, "write failed");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace icutl::csv
