#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace favor {

// Shortest round-trip representation, '.' decimal point, independent of the
// global locale. Non-finite values print as nan / inf / -inf.
std::string format_double(double v);

// Comma-separated rows with an optional header; comment rows start with '#'.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, bool write_header) : out_(out), write_header_(write_header) {}

  void header(const std::vector<std::string>& columns);
  void row(const std::vector<std::string>& cells);
  void comment(std::string_view text);

  static std::string cell(double v) { return format_double(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(std::string_view v) { return std::string(v); }
  static std::string cell(bool v) { return v ? "true" : "false"; }

 private:
  std::ostream& out_;
  bool write_header_;
  std::size_t columns_ = 0;
};

}  // namespace favor
