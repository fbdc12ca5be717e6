#include "favor/csv.hpp"

#include <charconv>
#include <cmath>

#include "favor/errors.hpp"

namespace favor {

namespace {

std::string escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string quoted = "\"";
  for (char c : field) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

void write_line(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out << ',';
    out << escape(cells[i]);
  }
  out << '\n';
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void CsvWriter::header(const std::vector<std::string>& columns) {
  columns_ = columns.size();
  if (write_header_) write_line(out_, columns);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (columns_ != 0 && cells.size() != columns_) {
    throw InvalidArgument("CsvWriter: row has " + std::to_string(cells.size()) +
                          " cells, header has " + std::to_string(columns_));
  }
  write_line(out_, cells);
}

void CsvWriter::comment(std::string_view text) { out_ << "# " << text << '\n'; }

}  // namespace favor
