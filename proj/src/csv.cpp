#include "shb/csv.hpp"

#include <charconv>
#include <istream>
#include <sstream>

#include "shb/error.hpp"

namespace shb::csv {

std::string format_number(double value) {
  // Shortest text that reads back to the same double.
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, r.ptr);
}

namespace {

bool parse_row(const std::string& line, std::vector<double>& row) {
  row.clear();
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    if (first == std::string::npos) return false;
    const char* begin = field.data() + first;
    const char* end = field.data() + last + 1;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end) return false;
    row.push_back(v);
  }
  return !row.empty();
}

}  // namespace

std::vector<std::vector<double>> read_numeric(std::istream& in,
                                              std::size_t min_columns) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::vector<double> row;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!parse_row(line, row)) continue;
    if (row.size() < min_columns) {
      throw Error("csv line " + std::to_string(line_no) + ": expected at least " +
                  std::to_string(min_columns) + " columns");
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace shb::csv
